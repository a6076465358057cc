use thiserror::Error;

/// Errors raised across the library. Every variant carries a human-readable
/// payload; the CLI maps variants onto exit codes.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("parameter mismatch: {0}")]
    ParamMismatch(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("insufficient precision: {0}")]
    Precision(String),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("gate violation: {0}")]
    Gate(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("search failed: {0}")]
    Search(String),
}

pub type Result<T> = std::result::Result<T, Error>;
