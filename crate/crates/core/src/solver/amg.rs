use crate::error::{Error, Result};
use crate::linalg::{CooBuilder, DenseMatrix, DenseSolver, SparseMatrix};

use super::gauss_seidel::{sweep_with, Direction};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmgParams {
    /// `|a_ij| ≥ strength · √(a_ii a_jj)` marks a strong connection on the
    /// finest level. A positive coupling strong at this threshold keeps its
    /// node out of larger aggregates on every level.
    pub strength: f64,
    /// Factor applied to the threshold on each coarser level.
    pub strength_decay: f64,
    pub max_levels: usize,
    /// Coarsening stops once a level has at most this many unknowns.
    pub coarse_size: usize,
    /// Weight of the Jacobi step that smooths the tentative prolongation.
    pub omega: f64,
    /// Largest coarsest level solved by dense LU; bigger ones (only when
    /// coarsening stalls) fall back to symmetric Gauss–Seidel.
    pub max_dense: usize,
}

impl Default for AmgParams {
    fn default() -> Self {
        Self {
            strength: 0.25,
            strength_decay: 0.5,
            max_levels: 20,
            coarse_size: 64,
            omega: 2.0 / 3.0,
            max_dense: 4000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AmgLevel {
    pub a: SparseMatrix,
    pub p: SparseMatrix,
    pub r: SparseMatrix,
    diag: Vec<f64>,
}

#[derive(Clone, Debug)]
enum CoarseSolve {
    Dense(DenseSolver),
    Smoother { diag: Vec<f64>, sweeps: usize },
    Empty,
}

/// Smoothed-aggregation multigrid hierarchy.
#[derive(Clone, Debug)]
pub struct AmgHierarchy {
    levels: Vec<AmgLevel>,
    coarse: SparseMatrix,
    coarse_solve: CoarseSolve,
    params: AmgParams,
}

impl AmgHierarchy {
    /// Number of levels including the coarsest.
    pub fn num_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn levels(&self) -> &[AmgLevel] {
        &self.levels
    }

    pub fn coarse_matrix(&self) -> &SparseMatrix {
        &self.coarse
    }

    pub fn params(&self) -> &AmgParams {
        &self.params
    }

    /// Level operator sizes from fine to coarse.
    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows()).chain(std::iter::once(self.coarse.nrows())).collect()
    }

    /// Total nonzeros over all levels divided by the fine-level nonzeros.
    pub fn operator_complexity(&self) -> f64 {
        let fine = self.levels.first().map_or(self.coarse.nnz(), |l| l.a.nnz()).max(1);
        let total: usize = self.levels.iter().map(|l| l.a.nnz()).sum::<usize>() + self.coarse.nnz();
        total as f64 / fine as f64
    }

    pub fn dim(&self) -> usize {
        self.levels.first().map_or(self.coarse.nrows(), |l| l.a.nrows())
    }

    pub fn fine_matrix(&self) -> &SparseMatrix {
        self.levels.first().map_or(&self.coarse, |l| &l.a)
    }

    fn level_matrix(&self, l: usize) -> &SparseMatrix {
        self.levels.get(l).map_or(&self.coarse, |lev| &lev.a)
    }

    fn cycle(&self, l: usize, b: &[f64]) -> Vec<f64> {
        if l == self.levels.len() {
            return self.coarse_solve(b);
        }
        let lev = &self.levels[l];
        let mut x = vec![0.0; b.len()];
        sweep_with(&lev.a, &lev.diag, &mut x, b, Direction::Forward, 1);
        let r = residual(&lev.a, &x, b);
        let rc = lev.r.spmv(&r).expect("restriction matches level size");
        let xc = self.cycle(l + 1, &rc);
        let correction = lev.p.spmv(&xc).expect("prolongation matches coarse size");
        for (xi, ci) in x.iter_mut().zip(&correction) {
            *xi += ci;
        }
        sweep_with(&lev.a, &lev.diag, &mut x, b, Direction::Backward, 1);
        x
    }

    fn coarse_solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.coarse_solve {
            CoarseSolve::Dense(lu) => lu.solve(b),
            CoarseSolve::Smoother { diag, sweeps } => {
                let mut x = vec![0.0; b.len()];
                for _ in 0..*sweeps {
                    sweep_with(&self.coarse, diag, &mut x, b, Direction::Forward, 1);
                    sweep_with(&self.coarse, diag, &mut x, b, Direction::Backward, 1);
                }
                x
            }
            CoarseSolve::Empty => Vec::new(),
        }
    }
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.residual(x, b).expect("operator and vectors share a size")
}

/// Builds the hierarchy for a symmetric matrix with positive diagonal.
pub fn amg_setup(a: &SparseMatrix, params: &AmgParams) -> Result<AmgHierarchy> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::SetupFailure("non-finite matrix entry".into()));
    }
    let mut levels = Vec::new();
    let mut current = a.clone();
    while levels.len() + 1 < params.max_levels && current.nrows() > params.coarse_size {
        let diag = current.diagonal();
        if let Some(row) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::SetupFailure(format!("nonpositive diagonal in row {row} on level {}", levels.len())));
        }
        let theta = params.strength * params.strength_decay.powi(levels.len() as i32);
        let (aggregates, count) = aggregate(&current, &diag, theta, params.strength);
        if count == 0 || count as f64 > MIN_REDUCTION * current.nrows() as f64 {
            break;
        }
        let p = smoothed_prolongation(&current, &diag, &aggregates, count, params.omega);
        let r = p.transpose();
        let coarse = r.matmul(&current)?.matmul(&p)?;
        if coarse.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::SetupFailure("non-finite coarse operator".into()));
        }
        levels.push(AmgLevel { a: current, p, r, diag });
        current = coarse;
    }
    let n = current.nrows();
    let coarse_solve = if n == 0 {
        CoarseSolve::Empty
    } else if n <= params.max_dense {
        let mut m = DenseMatrix::zeros(n, n);
        for (i, j, v) in current.triplets() {
            m.set(i, j, v);
        }
        CoarseSolve::Dense(DenseSolver::factor(&m).map_err(|e| Error::SetupFailure(format!("coarse factorization: {e}")))?)
    } else {
        let diag = current.diagonal();
        if let Some(row) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::SetupFailure(format!("nonpositive diagonal in coarse row {row}")));
        }
        CoarseSolve::Smoother { diag, sweeps: 10 }
    };
    Ok(AmgHierarchy {
        levels,
        coarse: current,
        coarse_solve,
        params: *params,
    })
}

/// Applies `cycles` V-cycles to `A x = r` starting from zero.
pub fn amg_vcycle(h: &AmgHierarchy, r: &[f64], cycles: usize) -> Result<Vec<f64>> {
    let n = h.dim();
    if r.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: r.len() });
    }
    let mut x = vec![0.0; n];
    for c in 0..cycles {
        let res = if c == 0 { r.to_vec() } else { residual(h.level_matrix(0), &x, r) };
        let dx = h.cycle(0, &res);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    Ok(x)
}

const UNAGGREGATED: usize = usize::MAX;

/// Coarsening stops when a level would keep more than this fraction of its
/// unknowns.
const MIN_REDUCTION: f64 = 0.9;

/// Greedy aggregation on the strength graph. Nodes with a positive coupling
/// that is strong at `positive_theta` become singleton aggregates (immersed
/// bases near a high-contrast interface produce such rows, and their
/// algebraically smooth error is not locally constant). Nodes without strong
/// connections stay unaggregated.
fn aggregate(a: &SparseMatrix, diag: &[f64], theta: f64, positive_theta: f64) -> (Vec<usize>, usize) {
    let n = a.nrows();
    let strong: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            let (cols, vals) = a.row(i);
            cols.iter()
                .zip(vals)
                .filter(|(&j, &v)| j != i && is_strong(v, diag[i], diag[j], theta))
                .map(|(&j, &v)| (j, v.abs() / (diag[i] * diag[j]).sqrt()))
                .collect()
        })
        .collect();
    let mut agg = vec![UNAGGREGATED; n];
    let mut count = 0;

    // pass 0: nodes with strong positive couplings keep their own coarse unknown
    let mut special = vec![false; n];
    for i in 0..n {
        let (cols, vals) = a.row(i);
        if cols.iter().zip(vals).any(|(&j, &v)| j != i && v > 0.0 && is_strong(v, diag[i], diag[j], positive_theta)) {
            special[i] = true;
            agg[i] = count;
            count += 1;
        }
    }

    // pass 1: seeds whose whole neighborhood is free
    for i in 0..n {
        if agg[i] != UNAGGREGATED || strong[i].is_empty() || strong[i].iter().any(|&(j, _)| agg[j] != UNAGGREGATED) {
            continue;
        }
        agg[i] = count;
        for &(j, _) in &strong[i] {
            agg[j] = count;
        }
        count += 1;
    }

    // pass 2: attach leftovers to the most strongly connected aggregate
    let snapshot = agg.clone();
    for i in 0..n {
        if agg[i] != UNAGGREGATED {
            continue;
        }
        let best = strong[i]
            .iter()
            .filter(|&&(j, _)| snapshot[j] != UNAGGREGATED && !special[j])
            .max_by(|x, y| x.1.total_cmp(&y.1));
        if let Some(&(j, _)) = best {
            agg[i] = snapshot[j];
        }
    }

    // pass 3: new aggregates from what is still free
    for i in 0..n {
        if agg[i] != UNAGGREGATED || strong[i].is_empty() {
            continue;
        }
        agg[i] = count;
        for &(j, _) in &strong[i] {
            if agg[j] == UNAGGREGATED {
                agg[j] = count;
            }
        }
        count += 1;
    }
    (agg, count)
}

/// `P = (I - ω D⁻¹ A) T` with `T` the normalized piecewise-constant
/// aggregate indicator.
fn smoothed_prolongation(a: &SparseMatrix, diag: &[f64], agg: &[usize], count: usize, omega: f64) -> SparseMatrix {
    let mut sizes = vec![0usize; count];
    for &g in agg {
        if g != UNAGGREGATED {
            sizes[g] += 1;
        }
    }
    let weight: Vec<f64> = sizes.iter().map(|&s| 1.0 / (s as f64).sqrt()).collect();
    let mut coo = CooBuilder::new(a.nrows(), count);
    for i in 0..a.nrows() {
        if agg[i] != UNAGGREGATED {
            coo.push(i, agg[i], weight[agg[i]]);
        }
        let (cols, vals) = a.row(i);
        let scale = omega / diag[i];
        for (&j, &v) in cols.iter().zip(vals) {
            let g = agg[j];
            if g != UNAGGREGATED {
                coo.push(i, g, -scale * v * weight[g]);
            }
        }
    }
    coo.build()
}

fn is_strong(v: f64, di: f64, dj: f64, theta: f64) -> bool {
    v.abs() >= theta * (di * dj).sqrt()
}
