use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Numeric,
    Io,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix of size {n} is not positive definite even with jitter {max_jitter:e}")]
    NotPositiveDefinite { n: usize, max_jitter: f64 },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("objective returned a non-finite value at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("need at least {needed} points, found {found}")]
    InsufficientData { needed: usize, found: usize },

    #[error("sample {index}: concentration {value} must be positive for a log-linear fit")]
    NonPositiveConcentration { index: usize, value: f64 },

    #[error("sample {index}: inconsistent sample: {detail}")]
    InconsistentSample { index: usize, detail: String },

    #[error("sample {index}: time {t} min must exceed 1 min for log-time normalization")]
    InvalidTime { index: usize, t: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("validation error at row {row}: {message}")]
    Validation { row: usize, message: String },

    #[error("malformed report: {0}")]
    Report(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Report(_) => ErrorKind::Parse,
            Error::InconsistentSample { .. }
            | Error::InvalidTime { .. }
            | Error::InvalidInput(_)
            | Error::InvalidSpec(_)
            | Error::Validation { .. }
            | Error::NonPositiveConcentration { .. }
            | Error::InsufficientData { .. }
            | Error::DimensionMismatch { .. } => ErrorKind::Validation,
            Error::NotPositiveDefinite { .. }
            | Error::NonFiniteObjective { .. }
            | Error::DegenerateFit(_) => ErrorKind::Numeric,
            Error::Io { .. } => ErrorKind::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
