//! Gauss–Seidel smoothing, smoothed-aggregation multigrid, the
//! auxiliary-space preconditioner and preconditioned conjugate gradients.

mod amg;
mod auxiliary;
mod gauss_seidel;
mod pcg;

pub use amg::{amg_setup, amg_vcycle, AmgHierarchy, AmgLevel, AmgParams};
pub use auxiliary::{AuxParams, AuxPreconditioner};
pub use gauss_seidel::{gauss_seidel, Direction};
pub use pcg::{pcg, pcg_detailed, CgVariant, PcgOutcome, PcgParams};

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseSolver, SparseMatrix};

/// A linear operator approximating `A⁻¹`.
pub trait Preconditioner {
    fn dim(&self) -> usize;

    fn apply(&self, r: &[f64]) -> Result<Vec<f64>>;
}

/// `V`-cycles of a single hierarchy used as a preconditioner.
#[derive(Clone, Debug)]
pub struct AmgPreconditioner {
    pub hierarchy: AmgHierarchy,
    pub cycles: usize,
}

impl Preconditioner for AmgPreconditioner {
    fn dim(&self) -> usize {
        self.hierarchy.dim()
    }

    fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        amg_vcycle(&self.hierarchy, r, self.cycles)
    }
}

/// Exact solve by dense LU (small systems only).
#[derive(Clone, Debug)]
pub struct DensePreconditioner {
    lu: DenseSolver,
}

impl DensePreconditioner {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.nrows();
        let mut m = DenseMatrix::zeros(n, a.ncols());
        for (i, j, v) in a.triplets() {
            m.set(i, j, v);
        }
        Ok(Self { lu: DenseSolver::factor(&m)? })
    }
}

impl Preconditioner for DensePreconditioner {
    fn dim(&self) -> usize {
        self.lu.dim()
    }

    fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.lu.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.lu.dim(),
                found: r.len(),
            });
        }
        Ok(self.lu.solve(r))
    }
}
