//! Recovers the lowest-order Raviart–Thomas flux and checks local
//! conservation element by element, for a loose and a tight solve.

use eifem::prelude::*;

fn main() -> Result<()> {
    let problem = circle_benchmark(100.0, 1.0)?;
    let mesh = StructuredMesh::new(64, Rect::default())?;
    let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta)?;
    let params = AssemblyParams::default();
    let system = assemble(&space, &problem, &params)?;
    let pre = AuxPreconditioner::new(&system, &AuxParams::default())?;

    for rtol in [1e-6, 1e-12] {
        let out = pcg(&system.matrix, &system.rhs, Some(&pre), &PcgParams { rtol, ..PcgParams::default() })?;
        let field = system.field_from_dofs(&space, &out.x);
        let flux = recover_flux(&space, &problem, &field, &params);
        let report = conservation_report(&mesh, &flux, &system.element_source);
        let interface_max = space
            .interface_elements()
            .map(|t| report.residuals[t])
            .fold(0.0, f64::max);
        println!(
            "rtol {rtol:.0e}: {} iterations, max residual {:.3e} (interface elements {:.3e}), global {:.3e}",
            out.iterations, report.max, interface_max, report.global
        );
    }

    // the divergence of the recovered flux is the element mean of f
    let t = space.interface_elements().next().unwrap_or(0);
    let out = pcg(&system.matrix, &system.rhs, Some(&pre), &PcgParams { rtol: 1e-12, ..PcgParams::default() })?;
    let field = system.field_from_dofs(&space, &out.x);
    let flux = recover_flux(&space, &problem, &field, &params);
    println!(
        "element {t}: div u_h = {:.6}, mean f = {:.6}",
        flux.divergence(&mesh, t),
        system.element_source[t] / mesh.area(t)
    );
    Ok(())
}
