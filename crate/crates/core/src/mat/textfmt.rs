//! Shared matrix text format.
//!
//! First line: `dims: d1 d2 ... dn`. Each subsequent line is one matrix row
//! as whitespace-separated `re im` pairs. Decimals carry 17 significant
//! digits so a write/read cycle is bit exact.

use super::{ComplexMatrix, DimList};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::path::Path;

/// Serializes a square operator with its tensor-factor dimensions.
pub fn write_matrix_text(m: &ComplexMatrix, dims: &DimList) -> Result<String> {
    dims.check_matches(m.rows())?;
    let mut out = String::new();
    out.push_str("dims:");
    for d in dims.dims() {
        out.push_str(&format!(" {}", d));
    }
    out.push('\n');
    for r in 0..m.rows() {
        let mut line = String::new();
        for c in 0..m.cols() {
            if c > 0 {
                line.push(' ');
            }
            let z = m[(r, c)];
            line.push_str(&format!("{:.16e} {:.16e}", z.re, z.im));
        }
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

/// Parses the text format back into (matrix, dims).
pub fn parse_matrix_text(text: &str) -> Result<(ComplexMatrix, DimList)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix text".into()))?;
    let header = header.trim();
    let rest = header
        .strip_prefix("dims:")
        .ok_or_else(|| Error::Parse(format!("expected 'dims:' header, got '{}'", header)))?;
    let dims: Vec<usize> = rest
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|e| Error::Parse(format!("bad dimension '{}': {}", tok, e)))
        })
        .collect::<Result<_>>()?;
    let dims = DimList::new(dims)?;
    let n = dims.total();

    let mut data: Vec<Complex64> = Vec::with_capacity(n * n);
    let mut row_count = 0usize;
    for line in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 * n {
            return Err(Error::Parse(format!(
                "row {} has {} numbers, expected {}",
                row_count,
                toks.len(),
                2 * n
            )));
        }
        for pair in toks.chunks(2) {
            let re: f64 = pair[0]
                .parse()
                .map_err(|e| Error::Parse(format!("bad float '{}': {}", pair[0], e)))?;
            let im: f64 = pair[1]
                .parse()
                .map_err(|e| Error::Parse(format!("bad float '{}': {}", pair[1], e)))?;
            data.push(Complex64::new(re, im));
        }
        row_count += 1;
    }
    if row_count != n {
        return Err(Error::Parse(format!(
            "expected {} rows, found {}",
            n, row_count
        )));
    }
    Ok((ComplexMatrix::from_rows(n, n, &data), dims))
}

/// Reads the text format from a file.
pub fn read_matrix_text(path: &Path) -> Result<(ComplexMatrix, DimList)> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, rng_from_seed};

    #[test]
    fn roundtrip_is_bit_exact() {
        let mut rng = rng_from_seed(17);
        for dims in [vec![2usize, 3], vec![2, 2], vec![4]] {
            let dl = DimList::new(dims).unwrap();
            let n = dl.total();
            let m = ComplexMatrix::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
            let text = write_matrix_text(&m, &dl).unwrap();
            let (back, dims_back) = parse_matrix_text(&text).unwrap();
            assert_eq!(dims_back, dl);
            assert_eq!(back.data(), m.data(), "roundtrip must be bit exact");
        }
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_matrix_text("").is_err());
        assert!(parse_matrix_text("dims: 2\n1 0\n").is_err());
        assert!(parse_matrix_text("nope: 2\n").is_err());
    }
}
