use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by set descriptors and projections.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("box bounds must satisfy lower < upper (got [{lower}, {upper}])")]
    InvalidBox { lower: f64, upper: f64 },
    #[error("lp-ball requires p >= 1 and radius > 0 (got p = {p}, radius = {radius})")]
    InvalidBall { p: f64, radius: f64 },
    #[error("restriction of the set to {support} of {n} coordinates is empty")]
    InfeasibleRestriction { support: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("sparsity level {s} out of range for dimension {n}")]
    Sparsity { s: usize, n: usize },
    #[error("point has {nnz} nonzeros but the sparsity level is {s}")]
    TooDense { nnz: usize, s: usize },
    #[error("enumeration oracle is limited to n <= {max} (got {n})")]
    OracleTooLarge { n: usize, max: usize },
    #[error("point is not feasible for the set")]
    Infeasible,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: cannot parse value `{value}` for `{key}`")]
    Value { line: usize, key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset is empty")]
    Empty,
    #[error("row {row}, column {column}: cannot parse `{value}` as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("row {row}: expected {expected} columns, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("download failed: {0}")]
    Fetch(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("invalid problem: {0}")]
    Problem(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
