//! Concrete set-function models.

pub mod cholesky;
mod dpp;
mod ising;
mod modular;

pub use dpp::{DppModel, IncrementalDpp};
pub use ising::IsingChainModel;
pub use modular::ModularModel;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Parses a kernel file: one row per line, whitespace-separated decimal
/// floats, as many rows as columns. Blank lines are skipped.
pub fn parse_kernel(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("line {}: cannot parse {tok:?} as a number", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidInput("kernel file is empty".into()));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::InvalidInput(format!(
                "kernel row {} has {} columns but there are {n} rows",
                i + 1,
                r.len()
            )));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Writes a kernel in the format read by [`parse_kernel`], using the
/// shortest round-trip representation of each entry.
pub fn format_kernel(kernel: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for i in 0..kernel.nrows() {
        let row: Vec<String> = (0..kernel.ncols()).map(|j| format!("{}", kernel[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_text_roundtrip() {
        let m = DppModel::from_spectrum(&[3.0, 1.0, 0.25, 7.5], 4, 1.0).unwrap();
        let parsed = parse_kernel(&format_kernel(m.kernel())).unwrap();
        assert_eq!(parsed.as_slice(), m.kernel().as_slice());
    }

    #[test]
    fn kernel_parse_errors() {
        assert!(parse_kernel("").is_err());
        assert!(parse_kernel("1 0\n0\n").is_err());
        assert!(parse_kernel("1 x\n0 1\n").is_err());
        assert_eq!(parse_kernel("2 0\n\n0 3\n").unwrap()[(1, 1)], 3.0);
    }
}
