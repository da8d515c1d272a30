use crate::error::{Error, Result};

/// Entries with magnitude below this are dropped at finalization.
pub const DROP_TOLERANCE: f64 = 1e-300;

/// Compressed sparse row matrix with sorted, deduplicated column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays. Columns within each row must be
    /// strictly increasing.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 {
            return Err(Error::DimensionMismatch {
                expected: nrows + 1,
                found: row_ptr.len(),
            });
        }
        if col_idx.len() != values.len() || row_ptr[nrows] != col_idx.len() {
            return Err(Error::DimensionMismatch {
                expected: row_ptr[nrows],
                found: col_idx.len(),
            });
        }
        for i in 0..nrows {
            let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::Parse(format!("row {i} columns not strictly increasing")));
                }
            }
            if let Some(&c) = row.last() {
                if c >= ncols {
                    return Err(Error::IndexOutOfRange { index: c, dim: ncols });
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds from a dense row-major array, dropping exact zeros.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut b = CooBuilder::new(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: x.len(),
            });
        }
        if y.len() != self.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.nrows,
                found: y.len(),
            });
        }
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum();
        }
        Ok(())
    }

    /// `r = b - A x`
    pub fn residual(&self, x: &[f64], b: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.spmv(x)?;
        if b.len() != r.len() {
            return Err(Error::DimensionMismatch {
                expected: r.len(),
                found: b.len(),
            });
        }
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(r)
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let k = next[c];
                col_idx[k] = i;
                values[k] = v;
                next[c] += 1;
            }
        }
        Self {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse product `self * other` (row-wise accumulation).
    pub fn matmul(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != other.nrows {
            return Err(Error::DimensionMismatch {
                expected: self.ncols,
                found: other.nrows,
            });
        }
        let n = other.ncols;
        let mut acc = vec![0.0; n];
        let mut marker = vec![usize::MAX; n];
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut pattern: Vec<usize> = Vec::new();
        for i in 0..self.nrows {
            pattern.clear();
            let (acols, avals) = self.row(i);
            for (&k, &a) in acols.iter().zip(avals) {
                let (bcols, bvals) = other.row(k);
                for (&j, &b) in bcols.iter().zip(bvals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        pattern.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            pattern.sort_unstable();
            for &j in &pattern {
                if acc[j].abs() >= DROP_TOLERANCE {
                    col_idx.push(j);
                    values.push(acc[j]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Exact submatrix on the given (ordered) row and column index sets.
    pub fn extract_block(&self, rows: &[usize], cols: &[usize]) -> Result<SparseMatrix> {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (new, &c) in cols.iter().enumerate() {
            if c >= self.ncols {
                return Err(Error::IndexOutOfRange { index: c, dim: self.ncols });
            }
            col_map[c] = new;
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for &r in rows {
            if r >= self.nrows {
                return Err(Error::IndexOutOfRange { index: r, dim: self.nrows });
            }
            scratch.clear();
            let (rc, rv) = self.row(r);
            for (&c, &v) in rc.iter().zip(rv) {
                let m = col_map[c];
                if m != usize::MAX {
                    scratch.push((m, v));
                }
            }
            scratch.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &scratch {
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix {
            nrows: rows.len(),
            ncols: cols.len(),
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A - A^T|` over all entries.
    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Relative symmetry check `max|A - A^T| <= tol * max|A|`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.asymmetry() <= tol * self.max_abs()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                row[c] = v;
            }
        }
        d
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }
}

/// Coordinate-format accumulator. Duplicates are summed at finalization;
/// the buffer compacts itself once it grows past a threshold so memory stays
/// proportional to the number of distinct entries.
#[derive(Debug, Clone)]
pub struct CooBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(u32, u32, f64)>,
    compacted: usize,
}

const COMPACT_THRESHOLD: usize = 1 << 22;

impl CooBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        assert!(nrows < u32::MAX as usize && ncols < u32::MAX as usize);
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
            compacted: 0,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    #[inline]
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i as u32, j as u32, v));
        if self.entries.len() >= self.compacted.max(COMPACT_THRESHOLD / 2) * 2 {
            self.compact();
        }
    }

    fn compact(&mut self) {
        self.entries.sort_unstable_by_key(|e| (e.0, e.1));
        let mut out = 0;
        for k in 0..self.entries.len() {
            if out > 0 && self.entries[out - 1].0 == self.entries[k].0 && self.entries[out - 1].1 == self.entries[k].1
            {
                self.entries[out - 1].2 += self.entries[k].2;
            } else {
                self.entries[out] = self.entries[k];
                out += 1;
            }
        }
        self.entries.truncate(out);
        self.compacted = out;
    }

    pub fn build(mut self) -> SparseMatrix {
        self.compact();
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            if v.abs() < DROP_TOLERANCE {
                continue;
            }
            row_ptr[i as usize + 1] += 1;
            col_idx.push(j as usize);
            values.push(v);
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut b = CooBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.0);
            if i > 0 {
                b.push(i, i - 1, -1.0);
            }
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
            }
        }
        b.build()
    }

    #[test]
    fn identity_spmv() {
        let x = vec![1.0, -2.0, 3.5];
        assert_eq!(SparseMatrix::identity(3).spmv(&x).unwrap(), x);
    }

    #[test]
    fn tridiagonal_times_ones() {
        let y = tridiag(6).spmv(&[1.0; 6]).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn spmv_dimension_mismatch() {
        assert!(matches!(
            tridiag(4).spmv(&[1.0; 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let mut b = CooBuilder::new(2, 2);
        b.push(0, 1, 1.5);
        b.push(0, 1, 2.5);
        b.push(1, 0, 1.0);
        b.push(1, 0, -1.0);
        let m = b.build();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), 4.0);
    }

    #[test]
    fn extract_full_and_empty() {
        let a = tridiag(5);
        let all: Vec<usize> = (0..5).collect();
        assert_eq!(a.extract_block(&all, &all).unwrap(), a);
        let e = a.extract_block(&[], &[]).unwrap();
        assert_eq!((e.nrows(), e.ncols()), (0, 0));
        assert!(matches!(a.extract_block(&[7], &all), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn block_reembedding_recovers_diagonal_blocks() {
        let a = tridiag(7);
        let w1 = [0, 1, 2];
        let w2 = [3, 4, 5, 6];
        let a11 = a.extract_block(&w1, &w1).unwrap();
        let a22 = a.extract_block(&w2, &w2).unwrap();
        let mut b = CooBuilder::new(7, 7);
        for (i, j, v) in a11.triplets() {
            b.push(w1[i], w1[j], v);
        }
        for (i, j, v) in a22.triplets() {
            b.push(w2[i], w2[j], v);
        }
        let re = b.build();
        for i in 0..7 {
            for j in 0..7 {
                let same_block = (i < 3) == (j < 3);
                let expect = if same_block { a.get(i, j) } else { 0.0 };
                assert_eq!(re.get(i, j), expect);
            }
        }
    }

    #[test]
    fn transpose_and_matmul() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let at = a.transpose();
        assert_eq!(at.to_dense(), vec![vec![1.0, 0.0], vec![2.0, 0.0], vec![0.0, 3.0]]);
        let p = a.matmul(&at).unwrap();
        assert_eq!(p.to_dense(), vec![vec![5.0, 0.0], vec![0.0, 9.0]]);
    }

    proptest! {
        #[test]
        fn spmv_matches_triplet_reference(
            entries in proptest::collection::vec((0usize..12, 0usize..9, -10.0f64..10.0), 0..80),
            x in proptest::collection::vec(-5.0f64..5.0, 9),
        ) {
            let mut b = CooBuilder::new(12, 9);
            let mut reference = vec![0.0; 12];
            for &(i, j, v) in &entries {
                b.push(i, j, v);
                reference[i] += v * x[j];
            }
            let y = b.build().spmv(&x).unwrap();
            for (a, r) in y.iter().zip(&reference) {
                let scale = 1.0 + r.abs();
                prop_assert!((a - r).abs() <= 1e-12 * scale * 10.0);
            }
        }
    }
}
