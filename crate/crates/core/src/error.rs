use thiserror::Error;

/// Errors surfaced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid setting: {0}")]
    InvalidSetting(String),
    #[error("monomial is not a d-th power: exponent {0} is not divisible by {1}")]
    NotInSubring(u32, u32),
    #[error("polynomial is not homogeneous for the bidegree grading")]
    NotHomogeneous,
    #[error("polynomial is not homogeneous for the modular grading")]
    NotModularHomogeneous,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("no witness available: {0}")]
    RangeEmpty(String),
    #[error("size limit exceeded: {0} columns (limit {1})")]
    SizeLimitExceeded(u64, u64),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
