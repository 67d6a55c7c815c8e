use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Why a single input record was rejected.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordRejection {
    #[error("expected {expected} fields, found {found}")]
    FieldCount { expected: usize, found: usize },
    #[error("column {column}: cannot parse {text:?} as a number")]
    Unparseable { column: usize, text: String },
    #[error("column {column}: non-finite value")]
    NonFinite { column: usize },
    #[error("record is not valid UTF-8")]
    Encoding,
}

impl RecordRejection {
    /// Column index of the offending field, when one is known.
    pub fn column(&self) -> Option<usize> {
        match self {
            RecordRejection::Unparseable { column, .. } | RecordRejection::NonFinite { column } => {
                Some(*column)
            }
            _ => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rejected record: {0}")]
    Rejected(#[from] RecordRejection),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("rejected {rejected} of {total} records, above the cap of {cap}")]
    RejectionCapExceeded { rejected: u64, total: u64, cap: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: need at least {needed} samples, have {got}")]
    InsufficientData { needed: u64, got: u64 },

    #[error("every feature column is degenerate")]
    EmptyModel,

    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),

    #[error("pure ridge has no finite lambda that zeroes the coefficients")]
    NoLambdaMax,

    #[error("solver fault at lambda {lambda}: {reason}")]
    SolverFault { lambda: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
