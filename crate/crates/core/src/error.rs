use thiserror::Error as ThisError;

/// Errors raised by the numeric and analytic routines.
#[derive(Debug, Clone, PartialEq, ThisError)]
pub enum Error {
    #[error("precision of {0} bits is below the 53-bit minimum")]
    PrecisionTooLow(usize),
    #[error("precision of {0} bits is above the 65536-bit maximum")]
    PrecisionTooHigh(usize),
    #[error("pole of the gamma function at {0}")]
    Pole(String),
    #[error("evaluation failed at {point}: {reason}")]
    Evaluation { point: String, reason: String },
    #[error("degenerate lattice node m = {m} at x = {x}")]
    DegenerateNode { m: i64, x: String },
    #[error("degenerate Pochhammer denominator at index {index}")]
    DegenerateDenominator { index: usize },
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),
    #[error("series truncated at index {index}; last term magnitude {last_term:e}")]
    Truncation { index: usize, last_term: f64 },
    #[error("index out of range: {0}")]
    OutOfRange(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("nonconvergent: {0}")]
    NonConvergent(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
}

impl Error {
    /// True for failures the CLI reports as numeric aborts.
    pub fn is_numeric_abort(&self) -> bool {
        matches!(
            self,
            Error::Truncation { .. }
                | Error::DegenerateNode { .. }
                | Error::DegenerateDenominator { .. }
                | Error::NonConvergent(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
