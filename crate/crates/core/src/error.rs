use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cost vector length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("invalid cost component {value} at index {index}: must be finite and >= 0")]
    InvalidCost { index: usize, value: f64 },

    #[error("invalid cost spec: {0}")]
    InvalidCostSpec(String),

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("column `{0}` has zero variance and cannot be standardized")]
    ZeroVariance(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degenerate bandwidth: {0}")]
    DegenerateBandwidth(String),

    #[error("kernel density needs at least 2 rows, got {0}")]
    TooFewRows(usize),

    #[error("missing auxiliary scores for criterion `{0}`")]
    MissingScores(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("instance too large for brute-force enumeration: {0}")]
    TooLarge(String),

    #[error("target `{0}` is unreachable within the hop bound")]
    Unreachable(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
