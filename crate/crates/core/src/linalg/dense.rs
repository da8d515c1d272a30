use crate::error::{Error, Result};

/// Pivots smaller than this are treated as exact zeros.
pub const MIN_PIVOT: f64 = 1e-300;

/// Small dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            data: vec![0.0; n * m],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut d = Self::zeros(n, m);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), m, "ragged rows");
            d.data[i * m..(i + 1) * m].copy_from_slice(r);
        }
        d
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.m + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.m + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.m).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.m)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct DenseSolver {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    condition: f64,
}

impl DenseSolver {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.n != a.m {
            return Err(Error::DimensionMismatch {
                expected: a.n,
                found: a.m,
            });
        }
        let n = a.n;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if !(pmax >= MIN_PIVOT) {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        let mut solver = Self {
            n,
            lu,
            perm,
            condition: f64::INFINITY,
        };
        solver.condition = solver.estimate_condition(a);
        Ok(solver)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// 1-norm condition number, from the explicit inverse for small systems
    /// and a Hager-style estimate otherwise.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    fn estimate_condition(&self, a: &DenseMatrix) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let inv_norm = if n <= 16 {
            let mut worst: f64 = 0.0;
            let mut e = vec![0.0; n];
            for j in 0..n {
                e.iter_mut().for_each(|v| *v = 0.0);
                e[j] = 1.0;
                let col = self.solve(&e);
                worst = worst.max(col.iter().map(|v| v.abs()).sum());
            }
            worst
        } else {
            self.hager_inverse_norm1()
        };
        a.norm1() * inv_norm
    }

    fn hager_inverse_norm1(&self) -> f64 {
        let n = self.n;
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|v| v.abs()).sum();
            let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .fold((0, -1.0), |b, (j, v)| if v.abs() > b.1 { (j, v.abs()) } else { b });
            if new_est <= est || zmax <= crate::linalg::sparse::dot(&z, &x) {
                est = est.max(new_est);
                break;
            }
            est = new_est;
            x.iter_mut().for_each(|v| *v = 0.0);
            x[jmax] = 1.0;
        }
        est
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }
}

/// One-shot `M x = b`.
pub fn dense_solve(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != m.nrows() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: b.len(),
        });
    }
    Ok(DenseSolver::factor(m)?.solve(b))
}
