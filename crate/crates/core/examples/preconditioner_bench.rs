//! PCG iteration counts with and without Gauss–Seidel smoothing in the
//! auxiliary-space preconditioner.
//!
//! `cargo run --release --example preconditioner_bench -- 1000`

use std::time::Instant;

use eifem::prelude::*;

fn main() -> Result<()> {
    let beta_plus: f64 = std::env::args()
        .nth(1)
        .map_or(Ok(1000.0), |s| s.parse())
        .map_err(|e| Error::Parse(format!("{e}")))?;
    let problem = circle_benchmark(1.0, beta_plus)?;
    println!("(beta-, beta+) = (1, {beta_plus}), 5 AMG cycles per block, rtol 1e-7");
    println!("{:>5} {:>9} {:>7} {:>7} {:>9}", "N", "dofs", "N_GS=1", "N_GS=0", "time (s)");
    for n in [32, 64, 128, 256] {
        let mesh = StructuredMesh::new(n, Rect::default())?;
        let space = EnrichedSpace::new(&mesh, problem.level_set.clone(), problem.beta)?;
        let system = assemble(&space, &problem, &AssemblyParams::default())?;
        let mut its = Vec::new();
        let start = Instant::now();
        for ngs in [1, 0] {
            let pre = AuxPreconditioner::new(&system, &AuxParams { smoothing_steps: ngs, ..AuxParams::default() })?;
            its.push(pcg(&system.matrix, &system.rhs, Some(&pre), &PcgParams::default())?.iterations);
        }
        println!("{n:>5} {:>9} {:>7} {:>7} {:>9.3}", system.n_dofs(), its[0], its[1], start.elapsed().as_secs_f64());
    }
    Ok(())
}
