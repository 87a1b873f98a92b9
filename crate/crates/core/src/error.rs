use std::path::PathBuf;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("degenerate cell: side lengths {h_minus} (min) and {h_plus} (max)")]
    DegenerateCell { h_minus: f64, h_plus: f64 },

    #[error("degenerate set: volume {0} must be positive")]
    DegenerateSet(f64),

    #[error("empty cell: the bound needs at least one sample point in the cell")]
    EmptyCell,

    #[error("empty child: split leaves no sample point on one side")]
    EmptyChild,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0:?} lies outside the unit cube")]
    OutOfDomain(Vec<f64>),

    #[error("duplicate points are not allowed")]
    DuplicatePoints,

    #[error("n >= 1 required")]
    EmptyDataset,

    #[error("malformed data at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
