use std::path::Path;

use super::KernelMatrix;
use crate::error::{Error, Result};
use crate::scalar::{format_round_trip, Scalar};

const LABELS_PREFIX: &str = "# labels:";

/// Cell separator used by a matrix text file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixFormat {
    /// Comma if the first data row contains one, whitespace otherwise.
    #[default]
    Auto,
    Csv,
    Whitespace,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Self::Auto),
            "csv" => Ok(Self::Csv),
            "whitespace" | "ws" => Ok(Self::Whitespace),
            other => Err(Error::invalid(format!("unknown matrix format {other:?}"))),
        }
    }
}

pub fn load_kernel<T: Scalar>(path: impl AsRef<Path>, format: MatrixFormat) -> Result<KernelMatrix<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kernel(&text, format)
}

/// Parses one row per line. An optional `# labels: a,b,c` line may precede
/// the data; other `#` lines and blank lines are skipped.
pub fn parse_kernel<T: Scalar>(text: &str, format: MatrixFormat) -> Result<KernelMatrix<T>> {
    let mut labels = None;
    let mut rows: Vec<Vec<T>> = Vec::new();
    let mut format = format;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix(LABELS_PREFIX) {
            if rows.is_empty() && labels.is_none() {
                labels = Some(rest.split(',').map(|s| s.trim().to_string()).collect::<Vec<_>>());
            }
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if format == MatrixFormat::Auto {
            format = if line.contains(',') {
                MatrixFormat::Csv
            } else {
                MatrixFormat::Whitespace
            };
        }
        let cells: Vec<&str> = match format {
            MatrixFormat::Csv => line.split(',').map(str::trim).collect(),
            _ => line.split_whitespace().collect(),
        };
        let row = cells
            .into_iter()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        token: tok.to_string(),
                    })
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    let kernel = KernelMatrix::from_rows(rows)?;
    match labels {
        Some(l) => kernel.with_labels(l),
        None => Ok(kernel),
    }
}

/// Comma-separated rows with round-trip precision (17 significant digits for `f64`).
pub fn write_kernel<T: Scalar>(kernel: &KernelMatrix<T>) -> String {
    let mut out = String::new();
    if let Some(labels) = kernel.labels() {
        out.push_str(LABELS_PREFIX);
        out.push(' ');
        out.push_str(&labels.join(","));
        out.push('\n');
    }
    for i in 0..kernel.dim() {
        let row: Vec<String> = kernel.row(i).iter().map(|&x| format_round_trip(x)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_csv() {
        let k: KernelMatrix<f64> = parse_kernel("1,0\n0,1\n", MatrixFormat::Auto).unwrap();
        assert_eq!(k.dim(), 2);
        assert_eq!(k.entries(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn whitespace_with_labels() {
        let text = "# labels: a,b,c\n2 1 0\n1 2 1\n\n0 1 2\n";
        let k: KernelMatrix<f64> = parse_kernel(text, MatrixFormat::Whitespace).unwrap();
        assert_eq!(k.dim(), 3);
        assert_eq!(k.labels().unwrap(), &["a", "b", "c"]);
        assert_eq!(k.get(2, 1), 1.0);
    }

    #[test]
    fn ragged_rows_are_non_square() {
        let err = parse_kernel::<f64>("1,0\n0\n", MatrixFormat::Auto).unwrap_err();
        assert!(matches!(err, Error::NonSquare { .. }), "{err}");
        assert!(err.to_string().contains("non-square"));
    }

    #[test]
    fn bad_cell_and_empty() {
        let err = parse_kernel::<f64>("1,x\n0,1\n", MatrixFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(matches!(
            parse_kernel::<f64>("# nothing\n", MatrixFormat::Auto),
            Err(Error::EmptyMatrix)
        ));
    }

    proptest! {
        #[test]
        fn text_round_trip_is_lossless(diag in prop::collection::vec(0.1f64..10.0, 1..6), off in -1.0f64..1.0) {
            let n = diag.len();
            let mut e = vec![0.0; n * n];
            for i in 0..n {
                e[i * n + i] = diag[i] + n as f64;
                for j in 0..n {
                    if i != j {
                        e[i * n + j] = off / (1.0 + (i + j) as f64);
                    }
                }
            }
            let k = KernelMatrix::from_row_major(n, e).unwrap();
            let back: KernelMatrix<f64> = parse_kernel(&write_kernel(&k), MatrixFormat::Auto).unwrap();
            prop_assert_eq!(back, k);
        }
    }
}
