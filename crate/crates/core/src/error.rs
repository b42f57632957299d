use thiserror::Error;

/// Errors raised across the encoding, decoding and simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("graph construction failed after {attempts} attempts: {reason}")]
    GraphConstruction { attempts: usize, reason: String },

    #[error("degenerate message: product of incoming messages is identically zero")]
    DegenerateMessage,

    #[error("{rounds} BP rounds requested but graph girth is {girth}")]
    RoundsExceedGirth { rounds: usize, girth: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
