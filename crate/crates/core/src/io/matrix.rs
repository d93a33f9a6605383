use std::fmt::Write as _;
use std::path::Path;

use super::{content, parse_err, parse_real, source_name};
use crate::error::Result;
use crate::linalg::{c, CMatrix};

/// Dense complex matrix: one row per line, entries `re,im` separated by whitespace.
pub fn parse_matrix(text: &str, source: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<num_complex::Complex64>> = Vec::new();
    let mut last = 0;
    for (n, raw) in text.lines().enumerate() {
        let ln = n + 1;
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        last = ln;
        let mut row = Vec::new();
        for tok in line.split_whitespace() {
            let (re, im) = tok
                .split_once(',')
                .ok_or_else(|| parse_err(source, ln, format!("entry `{tok}` is not a `re,im` pair")))?;
            row.push(c(parse_real(source, ln, re, "real part")?, parse_real(source, ln, im, "imaginary part")?));
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(source, ln, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(source, 1, "empty matrix"));
    }
    if rows[0].len() != n {
        return Err(parse_err(source, last, format!("matrix is {n}x{}, not square", rows[0].len())));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<CMatrix> {
    let path = path.as_ref();
    parse_matrix(&std::fs::read_to_string(path)?, &source_name(path))
}

/// Writes entries with 17 significant digits so that reading back is exact.
pub fn write_matrix(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:.16e},{:.16e}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let m = parse_matrix("0,0 1,0\n1,0 0,0\n", "t").unwrap();
        assert_eq!(m[(0, 1)], c(1.0, 0.0));
        assert!(parse_matrix("0,0 1,0\n1,0\n", "t").is_err());
        assert!(parse_matrix("0 1\n1 0\n", "t").is_err());
        assert!(parse_matrix("1,0 0,0\n", "t").is_err());
    }
}
