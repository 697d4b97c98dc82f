use thiserror::Error;

/// Errors raised by the toolkit. Verdicts (positive, violated, undecided)
/// are not errors; they are reported through certificates.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("non-finite input")]
    NonFinite,
    #[error("division by a ball containing zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
