//! Verifies the circle benchmark's exact solution: the PDE residual, value
//! and flux continuity on the interface and the Dirichlet data.

use eifem::prelude::*;
use eifem::problems::{verify_manufactured, MANUFACTURED_TOLERANCE};

fn main() -> Result<()> {
    for (m, p) in [(1.0, 1.0), (10.0, 1.0), (1.0, 1000.0)] {
        let problem = circle_benchmark(m, p)?;
        let d = verify_manufactured(&problem, 64)?;
        println!("({m}, {p}): largest defect {:.2e} (tolerance {MANUFACTURED_TOLERANCE:.0e})", d.max());
    }
    Ok(())
}
