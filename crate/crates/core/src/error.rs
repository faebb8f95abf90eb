//! Error type shared by all solver modules.

use std::fmt;

/// Errors produced by channel generation, the solvers, and the ELM surrogate.
#[derive(Debug, Clone, PartialEq)]
pub enum HbfError {
    /// An input violated a precondition (non-finite entries, bad counts, ...).
    InvalidInput(String),
    /// Matrix dimensions do not line up for the requested operation.
    DimensionMismatch(String),
    /// A linear system was singular where invertibility is required.
    SingularMatrix(String),
    /// Bisection could not bracket the requested target value.
    NoRoot(String),
    /// The model has no trained output weights yet.
    Untrained,
    /// A serialized model or dataset file is malformed. Carries the byte
    /// offset at which the problem was detected.
    Format { offset: u64, message: String },
    /// Underlying I/O failure.
    Io(String),
}

impl fmt::Display for HbfError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HbfError::InvalidInput(m) => write!(f, "invalid input: {m}"),
            HbfError::DimensionMismatch(m) => write!(f, "dimension mismatch: {m}"),
            HbfError::SingularMatrix(m) => write!(f, "singular matrix: {m}"),
            HbfError::NoRoot(m) => write!(f, "no root: {m}"),
            HbfError::Untrained => write!(f, "model has not been trained"),
            HbfError::Format { offset, message } => {
                write!(f, "format error at byte {offset}: {message}")
            }
            HbfError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for HbfError {}

impl From<std::io::Error> for HbfError {
    fn from(e: std::io::Error) -> Self {
        HbfError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HbfError>;
