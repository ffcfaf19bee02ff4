//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The weight DSL text does not describe a valid weight function.
    #[error("invalid weight spec: {0}")]
    InvalidWeightSpec(String),

    /// A parameter or evaluation left the admissible range.
    #[error("range violation: {0}")]
    RangeViolation(String),

    /// A documented operation precondition does not hold.
    #[error("precondition violation: {0}")]
    PreconditionViolation(String),

    /// A truncated digit stream cannot certify even one output digit.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
