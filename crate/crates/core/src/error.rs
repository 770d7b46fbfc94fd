use thiserror::Error;

use crate::scalar::Cutoff;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operands live over different groups, weights or coefficient rings.
    #[error("structural mismatch: {0}")]
    Structural(String),

    #[error("not a unit: {0}")]
    Unit(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("domain error: {0}")]
    Domain(String),

    /// A decision needs information above the cutoff that was tracked.
    #[error("insufficient precision: {what} (known up to weight {known}; raise the cutoff above it)")]
    Precision { what: String, known: Cutoff },

    #[error("chain condition violated: {0}")]
    ChainCondition(String),

    #[error("invalid move: {0}")]
    Move(String),

    #[error("invariance violated at move {index}: {detail}")]
    InvarianceViolation { index: usize, detail: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation error: {0}")]
    Validation(String),
}

impl Error {
    pub(crate) fn precision(what: impl Into<String>, known: Cutoff) -> Self {
        Error::Precision { what: what.into(), known }
    }
}
