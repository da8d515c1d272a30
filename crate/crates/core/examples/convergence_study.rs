//! Convergence study over halving meshes through the driver, printing the
//! error table with fitted orders.
//!
//! `cargo run --release --example convergence_study -- 10 1`

use eifem::config::{Command, RunConfig};
use eifem::driver::run_convergence;

fn main() -> eifem::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = RunConfig::new(Command::Convergence);
    cfg.set("beta_minus", args.first().map_or("10", String::as_str))?;
    cfg.set("beta_plus", args.get(1).map_or("1", String::as_str))?;
    cfg.set("mesh", "16,32,64,128")?;
    cfg.set("formats", "md")?;
    cfg.set("out", std::env::temp_dir().join("eifem_convergence").to_str().unwrap_or("out"))?;
    let summary = run_convergence(&cfg, &mut std::io::stderr())?;
    println!("{}", summary.table);
    Ok(())
}
