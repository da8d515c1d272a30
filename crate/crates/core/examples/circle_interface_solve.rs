//! Solves the circular interface benchmark once and prints errors,
//! conservation and PCG iterations.
//!
//! `cargo run --release --example circle_interface_solve -- 64 1000 1`

use eifem::prelude::*;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(64), |s| s.parse())?;
    let beta_minus: f64 = args.get(1).map_or(Ok(1000.0), |s| s.parse()).map_err(|e| Error::Parse(format!("{e}")))?;
    let beta_plus: f64 = args.get(2).map_or(Ok(1.0), |s| s.parse()).map_err(|e| Error::Parse(format!("{e}")))?;

    let problem = circle_benchmark(beta_minus, beta_plus)?;
    let mesh = StructuredMesh::new(n, Rect::default())?;
    let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta)?;
    let params = AssemblyParams::default();
    let system = assemble(&space, &problem, &params)?;
    let pre = AuxPreconditioner::new(&system, &AuxParams::default())?;
    let pcg_params = PcgParams { rtol: 1e-12, ..PcgParams::default() };
    let out = pcg(&system.matrix, &system.rhs, Some(&pre), &pcg_params)?;

    let field = system.field_from_dofs(&space, &out.x);
    let flux = recover_flux(&space, &problem, &field, &params);
    let report = conservation_report(&mesh, &flux, &system.element_source);
    let (flux_l2, flux_hdiv) = error_flux(&space, &flux, &*problem.exact_u, &*problem.source);

    println!("{} on a {n}x{n} mesh ({} interface elements)", problem.name, space.interface_elements().count());
    println!("dofs            {} ({} nodal + {} element)", system.n_dofs(), system.n_nodal, system.n_elements);
    println!("PCG iterations  {}", out.iterations);
    println!("|p - p_h|_0     {:.4e}", error_l2(&space, &field, &*problem.exact_p));
    println!("|p - p_h|_h     {:.4e}", error_energy(&space, &field, &problem));
    println!("|u - u_h|_0     {flux_l2:.4e}");
    println!("|div(u - u_h)|  {flux_hdiv:.4e}");
    println!("conservation    {:.3e} per element, {:.3e} global", report.max, report.global);
    Ok(())
}
