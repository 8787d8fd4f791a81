use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum NsasError {
    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid state: {0}")]
    State(String),

    #[error("solution diverged at step {step} (t = {time})")]
    Divergence { step: usize, time: f64 },

    #[error("linear stability violated: {0}")]
    Stability(String),

    #[error("insufficient data: {0}")]
    Data(String),

    #[error("series misaligned: {0}")]
    Alignment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl NsasError {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Self::Parameter(msg.into())
    }

    pub(crate) fn shape(expected: usize, got: usize) -> Self {
        Self::Shape { expected, got }
    }
}

pub type Result<T> = std::result::Result<T, NsasError>;
