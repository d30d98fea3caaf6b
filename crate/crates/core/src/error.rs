use thiserror::Error;

/// Errors raised by the survey engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurveyError {
    #[error("grid index {index} out of range for {len} grid points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("degenerate grid {rows}x{cols}: {reason}")]
    DegenerateGrid {
        rows: usize,
        cols: usize,
        reason: &'static str,
    },

    #[error("point ({x}, {y}) lies outside the grid")]
    OutOfBounds { x: f64, y: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("covariance factorization failed: {0}")]
    Factorization(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("destination {0} is unreachable")]
    Unreachable(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("planner made no progress after {0} attempts")]
    Stalled(usize),
}

pub type Result<T> = std::result::Result<T, SurveyError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SurveyError {
    SurveyError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
