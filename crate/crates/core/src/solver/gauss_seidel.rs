use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Lexicographic Gauss–Seidel sweeps on `A x = b`, in place.
pub fn gauss_seidel(a: &SparseMatrix, x: &mut [f64], b: &[f64], direction: Direction, sweeps: usize) -> Result<()> {
    let n = a.nrows();
    if a.ncols() != n || x.len() != n || b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if x.len() != n { x.len() } else { b.len() },
        });
    }
    let diag = a.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDiagonal { row });
    }
    sweep_with(a, &diag, x, b, direction, sweeps);
    Ok(())
}

/// Sweeps with a precomputed, nonzero diagonal.
pub(crate) fn sweep_with(a: &SparseMatrix, diag: &[f64], x: &mut [f64], b: &[f64], direction: Direction, sweeps: usize) {
    let n = a.nrows();
    for _ in 0..sweeps {
        let mut relax = |i: usize| {
            let (cols, vals) = a.row(i);
            let mut s = b[i];
            for (&j, &v) in cols.iter().zip(vals) {
                if j != i {
                    s -= v * x[j];
                }
            }
            x[i] = s / diag[i];
        };
        match direction {
            Direction::Forward => (0..n).for_each(&mut relax),
            Direction::Backward => (0..n).rev().for_each(&mut relax),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::norm2;

    #[test]
    fn identity_in_one_sweep() {
        let a = SparseMatrix::identity(4);
        let b = [1.0, -2.0, 3.5, 0.25];
        let mut x = [0.0; 4];
        gauss_seidel(&a, &mut x, &b, Direction::Forward, 1).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two_hand_iteration() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut x = [0.0; 2];
        gauss_seidel(&a, &mut x, &[1.0, 1.0], Direction::Forward, 1).unwrap();
        assert_eq!(x, [0.5, 0.25]);
        let mut y = [0.0; 2];
        gauss_seidel(&a, &mut y, &[1.0, 1.0], Direction::Backward, 1).unwrap();
        assert_eq!(y, [0.25, 0.5]);
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let a = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 2.0]]);
        let mut x = [0.0; 2];
        assert!(matches!(
            gauss_seidel(&a, &mut x, &[1.0, 1.0], Direction::Forward, 1),
            Err(Error::ZeroDiagonal { row: 0 })
        ));
    }

    #[test]
    fn residual_decreases_on_laplacian() {
        let n: usize = 30;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 2.0 } else if i.abs_diff(j) == 1 { -1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        let a = SparseMatrix::from_dense(&rows);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let mut last = norm2(&b);
        for _ in 0..10 {
            gauss_seidel(&a, &mut x, &b, Direction::Forward, 1).unwrap();
            let r = norm2(&a.residual(&x, &b).unwrap());
            assert!(r <= last * (1.0 + 1e-12));
            last = r;
        }
    }
}
