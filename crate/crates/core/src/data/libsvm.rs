use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Dataset, Orientation};
use crate::error::{Error, Result};
use crate::linalg::SparseColumnMatrix;

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Reject files without any datapoint.
    pub strict: bool,
    /// Fix the feature count instead of inferring it from the largest index.
    pub n_features: Option<usize>,
}

/// Reads a LIBSVM text file with one column per datapoint.
pub fn load_libsvm(path: &Path, opts: LoadOptions) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_libsvm(&text, opts)
}

pub fn parse_libsvm(text: &str, opts: LoadOptions) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut columns: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut max_index = 0usize;

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let mut tokens = line.split_ascii_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| err(format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("non-finite label {label_tok:?}")));
        }

        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| err(format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(err("indices are 1-based; found 0".into()));
            }
            if idx <= prev {
                return Err(err(format!(
                    "index {idx} not strictly increasing after {prev}"
                )));
            }
            if let Some(nf) = opts.n_features {
                if idx > nf {
                    return Err(err(format!(
                        "index {idx} exceeds configured feature count {nf}"
                    )));
                }
            }
            let val: f64 = val.parse().map_err(|_| err(format!("bad value {val:?}")))?;
            if !val.is_finite() {
                return Err(err(format!("non-finite value at index {idx}")));
            }
            prev = idx;
            if val != 0.0 {
                entries.push((idx - 1, val));
            }
        }
        max_index = max_index.max(prev);
        labels.push(label);
        columns.push(entries);
    }

    if opts.strict && labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = opts.n_features.unwrap_or(max_index);
    let matrix = SparseColumnMatrix::from_columns(d, columns)?;
    Dataset::new(matrix, labels, Orientation::DatapointsAsColumns)
}

/// Writes a datapoints-as-columns dataset in LIBSVM format with round-trip float text.
pub fn write_libsvm(ds: &Dataset, path: &Path) -> Result<()> {
    if ds.orientation != Orientation::DatapointsAsColumns {
        return Err(Error::Orientation {
            expected: Orientation::DatapointsAsColumns.name(),
            found: ds.orientation.name(),
        });
    }
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(io_err)?);
    for (i, col) in ds.matrix.columns().enumerate() {
        let mut line = format!("{}", ds.targets[i]);
        for (r, v) in col.iter() {
            line.push_str(&format!(" {}:{}", r + 1, v));
        }
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}
