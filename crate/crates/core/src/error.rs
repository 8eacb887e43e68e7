use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base {0} is not supported (need 2 <= base <= 65536)")]
    InvalidBase(u32),

    #[error("base {0} is not prime")]
    NonPrimeBase(u32),

    #[error("base mismatch: {left} vs {right}")]
    BaseMismatch { left: u32, right: u32 },

    #[error("precision mismatch: {left} vs {right} digits")]
    PrecisionMismatch { left: usize, right: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u32, base: u32 },

    #[error("index {index} is out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error(
        "points {first} and {second} share all {precision} digits of coordinate {coord}; \
         pair statistics need pairwise distinct coordinates"
    )]
    CoincidentCoordinates {
        coord: usize,
        first: usize,
        second: usize,
        precision: usize,
    },

    #[error("precision overflow: {0}")]
    PrecisionOverflow(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
