use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm2, SparseMatrix};

use super::Preconditioner;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CgVariant {
    /// Fletcher–Reeves update; needs a fixed linear preconditioner.
    #[default]
    Standard,
    /// Polak–Ribière update, tolerant of preconditioners that vary between
    /// iterations.
    Flexible,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PcgParams {
    /// Stop when `‖b - A x‖ / ‖b‖ ≤ rtol`.
    pub rtol: f64,
    pub maxit: usize,
    pub variant: CgVariant,
}

impl Default for PcgParams {
    fn default() -> Self {
        Self {
            rtol: 1e-7,
            maxit: 1000,
            variant: CgVariant::Standard,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual norms, starting with the initial one.
    pub history: Vec<f64>,
    pub converged: bool,
    /// Step lengths and update coefficients, for Ritz value estimates.
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl PcgOutcome {
    pub fn final_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(0.0)
    }

    /// Extreme eigenvalues of the Lanczos matrix implied by the CG
    /// coefficients (estimates for the preconditioned operator).
    pub fn ritz_extremes(&self) -> Option<(f64, f64)> {
        let k = self.alphas.len();
        if k == 0 {
            return None;
        }
        let mut diag = vec![0.0; k];
        let mut off = vec![0.0; k.saturating_sub(1)];
        for j in 0..k {
            diag[j] = 1.0 / self.alphas[j];
            if j > 0 {
                diag[j] += self.betas[j - 1] / self.alphas[j - 1];
            }
            if j + 1 < k {
                off[j] = self.betas[j].sqrt() / self.alphas[j];
            }
        }
        Some((tridiagonal_eigen(&diag, &off, 0), tridiagonal_eigen(&diag, &off, k - 1)))
    }
}

/// `k`-th smallest eigenvalue of a symmetric tridiagonal matrix by Sturm
/// bisection.
fn tridiagonal_eigen(diag: &[f64], off: &[f64], k: usize) -> f64 {
    let n = diag.len();
    let radius = (0..n)
        .map(|i| {
            let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let r = if i + 1 < n { off[i].abs() } else { 0.0 };
            (diag[i] - l - r, diag[i] + l + r)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (lo, hi)| (acc.0.min(lo), acc.1.max(hi)));
    let count_below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let o = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            d = diag[i] - x - if i > 0 { o / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = radius;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * (lo.abs() + hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Preconditioned conjugate gradients from a zero initial guess.
/// Returns `NotConverged` when `maxit` is reached.
pub fn pcg(a: &SparseMatrix, b: &[f64], pre: Option<&dyn Preconditioner>, params: &PcgParams) -> Result<PcgOutcome> {
    let out = pcg_detailed(a, b, pre, params)?;
    if out.converged {
        Ok(out)
    } else {
        Err(Error::NotConverged {
            iterations: out.iterations,
            residual: out.final_residual(),
            history: out.history,
        })
    }
}

/// Like [`pcg`], but an unconverged run is reported through
/// `PcgOutcome::converged` instead of an error.
pub fn pcg_detailed(a: &SparseMatrix, b: &[f64], pre: Option<&dyn Preconditioner>, params: &PcgParams) -> Result<PcgOutcome> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    if let Some(p) = pre {
        if p.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
    }
    let apply = |r: &[f64]| -> Result<Vec<f64>> {
        match pre {
            Some(p) => p.apply(r),
            None => Ok(r.to_vec()),
        }
    };

    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    let mut out = PcgOutcome {
        x: Vec::new(),
        iterations: 0,
        history: vec![if bnorm == 0.0 { 0.0 } else { 1.0 }],
        converged: true,
        alphas: Vec::new(),
        betas: Vec::new(),
    };
    if bnorm == 0.0 {
        out.x = x;
        return Ok(out);
    }

    let mut r = b.to_vec();
    let mut z = apply(&r)?;
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(Error::IndefinitePreconditioner(rz));
    }
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut r_old = Vec::new();
    out.converged = false;
    for k in 1..=params.maxit {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::IndefiniteMatrix(pap));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        if params.variant == CgVariant::Flexible {
            r_old.clone_from(&r);
        }
        axpy(-alpha, &ap, &mut r);
        out.alphas.push(alpha);
        out.iterations = k;
        let mut rel = norm2(&r) / bnorm;
        if rel <= params.rtol {
            // confirm against the true residual before stopping
            r = a.residual(&x, b)?;
            rel = norm2(&r) / bnorm;
            if rel <= params.rtol {
                out.history.push(rel);
                out.converged = true;
                break;
            }
        }
        out.history.push(rel);
        if k == params.maxit {
            break;
        }
        z = apply(&r)?;
        let rz_new = dot(&r, &z);
        if !(rz_new > 0.0) {
            return Err(Error::IndefinitePreconditioner(rz_new));
        }
        let beta = match params.variant {
            CgVariant::Standard => rz_new / rz,
            CgVariant::Flexible => {
                let diff: f64 = z.iter().zip(r.iter().zip(&r_old)).map(|(zi, (ri, oi))| zi * (ri - oi)).sum();
                (diff / rz).max(0.0)
            }
        };
        out.betas.push(beta);
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    out.x = x;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::DensePreconditioner;

    #[test]
    fn identity_in_one_iteration() {
        let a = SparseMatrix::identity(5);
        let b = [1.0, 2.0, 3.0, 4.0, 5.0];
        let out = pcg(&a, &b, None, &PcgParams::default()).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, b);
    }

    #[test]
    fn two_by_two() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let params = PcgParams {
            rtol: 1e-14,
            ..Default::default()
        };
        let out = pcg(&a, &[1.0, 0.0], None, &params).unwrap();
        assert!(out.iterations <= 2);
        assert!((out.x[0] - 2.0 / 3.0).abs() < 1e-14 && (out.x[1] + 1.0 / 3.0).abs() < 1e-14);
        let (lo, hi) = out.ritz_extremes().unwrap();
        assert!((lo - 1.0).abs() < 1e-10 && (hi - 3.0).abs() < 1e-10, "{lo} {hi}");
    }

    #[test]
    fn zero_rhs() {
        let a = SparseMatrix::identity(3);
        let out = pcg(&a, &[0.0; 3], None, &PcgParams::default()).unwrap();
        assert_eq!(out.iterations, 0);
        assert_eq!(out.x, vec![0.0; 3]);
    }

    fn laplacian(n: usize) -> SparseMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        SparseMatrix::from_dense(&rows)
    }

    #[test]
    fn max_iterations_reports_history() {
        let a = laplacian(50);
        let b = vec![1.0; 50];
        let params = PcgParams {
            maxit: 5,
            ..Default::default()
        };
        match pcg(&a, &b, None, &params) {
            Err(Error::NotConverged { iterations, history, residual }) => {
                assert_eq!(iterations, 5);
                assert_eq!(history.len(), 6);
                assert_eq!(residual, *history.last().unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn exact_preconditioner_converges_immediately() {
        let a = laplacian(30);
        let pre = DensePreconditioner::new(&a).unwrap();
        let b: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
        let out = pcg(&a, &b, Some(&pre), &PcgParams::default()).unwrap();
        assert!(out.iterations <= 2);
    }

    #[test]
    fn indefinite_preconditioner_detected() {
        struct Negate;
        impl Preconditioner for Negate {
            fn dim(&self) -> usize {
                3
            }
            fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
                Ok(r.iter().map(|v| -v).collect())
            }
        }
        let a = SparseMatrix::identity(3);
        assert!(matches!(
            pcg(&a, &[1.0, 0.0, 0.0], Some(&Negate), &PcgParams::default()),
            Err(Error::IndefinitePreconditioner(_))
        ));
    }

    #[test]
    fn flexible_matches_standard_for_fixed_preconditioner() {
        let a = laplacian(40);
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let std = pcg(&a, &b, None, &PcgParams::default()).unwrap();
        let flex = pcg(
            &a,
            &b,
            None,
            &PcgParams {
                variant: CgVariant::Flexible,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(flex.iterations.abs_diff(std.iterations) <= 1);
    }
}
