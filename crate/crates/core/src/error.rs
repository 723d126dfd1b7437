use thiserror::Error;

/// Errors raised by the verification kernel.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("pole at q = {0}")]
    Pole(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("polynomial of degree {degree} exceeds the rewrite system bound {bound}")]
    DegreeOverflow { degree: usize, bound: usize },

    #[error("completion aborted: rule count exceeded cap {cap} (degree bound {bound})")]
    RuleExplosion { cap: usize, bound: usize },

    #[error("tensor slot {slot} out of range for width {width}")]
    SlotOutOfRange { slot: usize, width: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix is singular")]
    Singular,

    #[error("operator has non-scalar entries")]
    NotScalar,

    #[error("R-matrix validation failed: {identity} at entry {witness}")]
    Validation { identity: String, witness: String },

    #[error("vanishing idempotent denominator for contents {0} and {1}")]
    DegenerateSpectrum(i64, i64),

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("guard violation: {0}")]
    Guard(String),

    #[error("cache error: {0}")]
    Cache(String),
}

pub type Result<T> = std::result::Result<T, Error>;
