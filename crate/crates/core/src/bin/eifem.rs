use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eifem::config::{Command, RunConfig};
use eifem::driver;
use eifem::Error;

#[derive(Parser)]
#[command(name = "eifem", version, about = "Enriched immersed finite elements for elliptic interface problems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve on each mesh and report errors, conservation and iterations
    Solve(Overrides),
    /// Convergence study with fitted orders
    Convergence(Overrides),
    /// PCG iteration counts of the auxiliary-space preconditioner
    PrecondBench(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Flat key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    beta_minus: Option<f64>,
    #[arg(long)]
    beta_plus: Option<f64>,
    /// Coefficient cases for precond-bench, e.g. 1:1,1:10
    #[arg(long)]
    cases: Option<String>,
    /// Squares per side, e.g. 16,32,64
    #[arg(long)]
    mesh: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<String>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Gauss–Seidel sweeps in the preconditioner
    #[arg(long)]
    ngs: Option<usize>,
    /// AMG V-cycles per diagonal block
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    maxit: Option<usize>,
    /// standard or flexible
    #[arg(long)]
    variant: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, md, vtk
    #[arg(long)]
    formats: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the matrix, right-hand side and solution in Matrix Market format
    #[arg(long)]
    dump_system: bool,
}

impl Overrides {
    fn into_config(self, command: Command) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(command, path)?,
            None => RunConfig::new(command),
        };
        let cases_given = self.cases.is_some();
        let pairs: [(&str, Option<String>); 14] = [
            ("beta_minus", self.beta_minus.map(|v| v.to_string())),
            ("beta_plus", self.beta_plus.map(|v| v.to_string())),
            ("cases", self.cases),
            ("mesh", self.mesh),
            ("theta", self.theta),
            ("kappa", self.kappa.map(|v| v.to_string())),
            ("ngs", self.ngs.map(|v| v.to_string())),
            ("cycles", self.cycles.map(|v| v.to_string())),
            ("rtol", self.rtol.map(|v| v.to_string())),
            ("maxit", self.maxit.map(|v| v.to_string())),
            ("variant", self.variant),
            ("out", self.out.map(|p| p.display().to_string())),
            ("formats", self.formats),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        // explicit coefficients select a single benchmark case
        if command == Command::PrecondBench && (self.beta_minus.is_some() || self.beta_plus.is_some()) && !cases_given {
            cfg.set("cases", &format!("{}:{}", cfg.beta_minus, cfg.beta_plus))?;
        }
        cfg.dump_system |= self.dump_system;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, overrides) = match cli.command {
        Cmd::Solve(o) => (Command::Solve, o),
        Cmd::Convergence(o) => (Command::Convergence, o),
        Cmd::PrecondBench(o) => (Command::PrecondBench, o),
    };
    let cfg = match overrides.into_config(command) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut stderr = std::io::stderr();
    match driver::run(&cfg, &mut stderr) {
        Ok(summary) => {
            println!("{}", summary.table);
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for f in &summary.files {
                eprintln!("wrote {}", f.display());
            }
            match summary.into_result() {
                Ok(_) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
