use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum NpmcError {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("label column `{0}` not found in header")]
    MissingLabelColumn(String),
    #[error("non-numeric value {value:?} at row {row}, column `{column}`")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("class {class} has no observations")]
    EmptyClass { class: usize },
    #[error("class {class} has {count} observations, need at least {required}")]
    TooFewInClass {
        class: usize,
        count: usize,
        required: usize,
    },
    #[error("dimension mismatch: expected {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("estimator failure: {0}")]
    Estimator(String),
    #[error("objective returned non-finite value {value} at {point:?}")]
    NonFiniteObjective { point: Vec<f64>, value: f64 },
    #[error("unsupported classifier document version {0}")]
    UnsupportedVersion(u32),
}

pub type Result<T> = std::result::Result<T, NpmcError>;
