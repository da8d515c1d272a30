//! Matrix Market coordinate files and plain-text vectors.

use std::io::{BufRead, BufReader, Read, Write};

use super::sparse::{CooBuilder, SparseMatrix};
use crate::error::{Error, Result};

pub fn write_matrix_market<W: Write>(a: &SparseMatrix, mut out: W) -> Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {:.17e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads `coordinate real` matrices, `general` or `symmetric`.
pub fn read_matrix_market<R: Read>(input: R) -> Result<SparseMatrix> {
    let mut lines = BufReader::new(input).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let h = header.to_ascii_lowercase();
    let fields: Vec<&str> = h.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(Error::Parse(format!("unsupported header: {header}")));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(Error::Parse(format!("unsupported field type {}", fields[3])));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(Error::Parse(format!("unsupported symmetry {other}"))),
    };

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        size_line = Some(t.to_string());
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad size line: {size_line}"))))
        .collect::<Result<_>>()?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(Error::Parse(format!("bad size line: {size_line}")));
    };

    let mut b = CooBuilder::new(nrows, ncols);
    let mut seen = 0;
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut it = t.split_whitespace();
        let parse_idx = |s: Option<&str>, dim: usize| -> Result<usize> {
            let v: usize = s
                .ok_or_else(|| Error::Parse(format!("short entry line: {t}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad index in: {t}")))?;
            if v == 0 || v > dim {
                return Err(Error::IndexOutOfRange { index: v, dim });
            }
            Ok(v - 1)
        };
        let i = parse_idx(it.next(), nrows)?;
        let j = parse_idx(it.next(), ncols)?;
        let v: f64 = it
            .next()
            .ok_or_else(|| Error::Parse(format!("missing value: {t}")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad value in: {t}")))?;
        b.push(i, j, v);
        if symmetric && i != j {
            b.push(j, i, v);
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(Error::Parse(format!("expected {nnz} entries, found {seen}")));
    }
    Ok(b.build())
}

/// One value per line.
pub fn write_vector<W: Write>(v: &[f64], mut out: W) -> Result<()> {
    for x in v {
        writeln!(out, "{x:.17e}")?;
    }
    Ok(())
}

pub fn read_vector<R: Read>(input: R) -> Result<Vec<f64>> {
    BufReader::new(input)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()))
        .map(|l| {
            let l = l?;
            l.trim().parse().map_err(|_| Error::Parse(format!("bad vector entry: {l}")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matrix_market_round_trip(
            entries in proptest::collection::vec((0usize..7, 0usize..5, -1e3f64..1e3), 0..40),
        ) {
            let mut b = CooBuilder::new(7, 5);
            for &(i, j, v) in &entries {
                b.push(i, j, v);
            }
            let a = b.build();
            let mut buf = Vec::new();
            write_matrix_market(&a, &mut buf).unwrap();
            let back = read_matrix_market(buf.as_slice()).unwrap();
            prop_assert_eq!(back, a);
        }
    }

    #[test]
    fn symmetric_storage_is_expanded() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 2.0\n2 1 -1.0\n";
        let a = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(a.to_dense(), vec![vec![2.0, -1.0], vec![-1.0, 0.0]]);
    }

    #[test]
    fn vector_round_trip() {
        let v = vec![1.0, -2.5e-13, 3.0];
        let mut buf = Vec::new();
        write_vector(&v, &mut buf).unwrap();
        assert_eq!(read_vector(buf.as_slice()).unwrap(), v);
    }

    #[test]
    fn rejects_out_of_range_index() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n";
        assert!(matches!(read_matrix_market(text.as_bytes()), Err(Error::IndexOutOfRange { .. })));
    }
}
