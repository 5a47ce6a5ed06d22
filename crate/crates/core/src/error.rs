use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("hypothesis index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("length mismatch: expected {expected}, got {got} ({what})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("lambda must lie in (0, 1), got {0}")]
    InvalidLambda(f64),

    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),

    #[error("invalid p-value {value} at position {index}")]
    InvalidPValue { index: usize, value: f64 },

    #[error("hypothesis {0} belongs to no group")]
    Uncovered(usize),

    #[error("invalid group weight {value} for group {group}")]
    InvalidGroupWeight { group: usize, value: f64 },

    #[error("invalid classification: {0}")]
    InvalidClassification(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid simulation plan: {0}")]
    InvalidPlan(String),

    #[error("{method} requires {what}")]
    MissingInput {
        method: &'static str,
        what: &'static str,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
