use crate::assembly::BlockSparseSystem;
use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

use super::amg::{amg_setup, amg_vcycle, AmgHierarchy, AmgParams};
use super::gauss_seidel::{sweep_with, Direction};
use super::Preconditioner;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxParams {
    /// Gauss–Seidel sweeps before and after the block corrections.
    pub smoothing_steps: usize,
    /// Fixed number of V-cycles per diagonal block.
    pub amg_cycles: usize,
    pub amg: AmgParams,
}

impl Default for AuxParams {
    fn default() -> Self {
        Self {
            smoothing_steps: 1,
            amg_cycles: 5,
            amg: AmgParams::default(),
        }
    }
}

/// Gauss–Seidel smoothing on the full matrix plus multigrid corrections on
/// the nodal block `A₁₁` and the element-constant block `A₂₂`.
#[derive(Clone, Debug)]
pub struct AuxPreconditioner<'a> {
    a: &'a SparseMatrix,
    diag: Vec<f64>,
    n_nodal: usize,
    nodal: AmgHierarchy,
    constant: AmgHierarchy,
    params: AuxParams,
}

impl<'a> AuxPreconditioner<'a> {
    pub fn new(system: &'a BlockSparseSystem, params: &AuxParams) -> Result<Self> {
        Self::from_parts(&system.matrix, system.n_nodal, params)
    }

    /// Builds from a matrix whose first `n_nodal` unknowns form the first block.
    pub fn from_parts(a: &'a SparseMatrix, n_nodal: usize, params: &AuxParams) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || n_nodal > n {
            return Err(Error::DimensionMismatch { expected: n, found: a.ncols() });
        }
        let diag = a.diagonal();
        if let Some(row) = diag.iter().position(|&d| d == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        let w1: Vec<usize> = (0..n_nodal).collect();
        let w2: Vec<usize> = (n_nodal..n).collect();
        let nodal = amg_setup(&a.extract_block(&w1, &w1)?, &params.amg)?;
        let constant = amg_setup(&a.extract_block(&w2, &w2)?, &params.amg)?;
        Ok(Self {
            a,
            diag,
            n_nodal,
            nodal,
            constant,
            params: *params,
        })
    }

    pub fn params(&self) -> &AuxParams {
        &self.params
    }

    pub fn nodal_hierarchy(&self) -> &AmgHierarchy {
        &self.nodal
    }

    pub fn constant_hierarchy(&self) -> &AmgHierarchy {
        &self.constant
    }
}

impl Preconditioner for AuxPreconditioner<'_> {
    fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let n = self.a.nrows();
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
        let steps = self.params.smoothing_steps;
        let mut x = vec![0.0; n];
        sweep_with(self.a, &self.diag, &mut x, r, Direction::Forward, steps);
        let res = if steps == 0 { r.to_vec() } else { self.a.residual(&x, r)? };
        let (r1, r2) = res.split_at(self.n_nodal);
        let z1 = amg_vcycle(&self.nodal, r1, self.params.amg_cycles)?;
        let z2 = amg_vcycle(&self.constant, r2, self.params.amg_cycles)?;
        for (xi, zi) in x.iter_mut().zip(z1.iter().chain(&z2)) {
            *xi += zi;
        }
        sweep_with(self.a, &self.diag, &mut x, r, Direction::Backward, steps);
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CooBuilder;

    #[test]
    fn zero_maps_to_zero() {
        let a = SparseMatrix::from_dense(&[vec![4.0, -1.0, 0.5], vec![-1.0, 3.0, 0.0], vec![0.5, 0.0, 2.0]]);
        let p = AuxPreconditioner::from_parts(&a, 2, &AuxParams::default()).unwrap();
        assert_eq!(p.apply(&[0.0; 3]).unwrap(), vec![0.0; 3]);
        assert!(matches!(p.apply(&[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn block_diagonal_without_smoothing_is_exact() {
        let mut coo = CooBuilder::new(6, 6);
        for (i, j, v) in [(0, 0, 4.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 4.0), (2, 2, 2.0), (3, 3, 5.0), (3, 4, 1.0), (4, 3, 1.0), (4, 4, 3.0), (5, 5, 1.5)] {
            coo.push(i, j, v);
        }
        let a = coo.build();
        let params = AuxParams {
            smoothing_steps: 0,
            amg_cycles: 1,
            ..Default::default()
        };
        let p = AuxPreconditioner::from_parts(&a, 3, &params).unwrap();
        let r = [1.0, 2.0, 3.0, -1.0, 0.5, 3.0];
        let z = p.apply(&r).unwrap();
        let back = a.spmv(&z).unwrap();
        for (x, y) in back.iter().zip(&r) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
