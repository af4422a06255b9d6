use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("column {0} is all zero")]
    ZeroColumn(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dataset orientation mismatch: expected {expected}, found {found}")]
    Orientation {
        expected: &'static str,
        found: &'static str,
    },

    #[error("invalid labels: {0}")]
    Labels(String),

    #[error("sampling distribution has no positive weight")]
    NoSamplingMass,

    #[error("uniform variate {0} outside [0, 1)")]
    VariateOutOfRange(f64),

    #[error(
        "distribution is not coherent: coordinate {0} has a nonzero residual but zero probability"
    )]
    Incoherent(usize),

    #[error("non-finite objective at iteration {iteration}: {detail}")]
    NonFinite { iteration: u64, detail: String },

    #[error("invariant violated: {0}")]
    Invariant(String),
}
