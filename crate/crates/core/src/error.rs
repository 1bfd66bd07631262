use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("t = {t} lies beyond the last table knot {last}")]
    BeyondTable { t: f64, last: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: u32, found: u32 },

    #[error("invalid cube: {0}")]
    InvalidCube(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("linear program is {0}")]
    Lp(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
