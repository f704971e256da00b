use thiserror::Error;

pub type Result<T> = std::result::Result<T, MrfError>;

#[derive(Debug, Error)]
pub enum MrfError {
    /// The model is not well formed (index ranges, tensor shapes, duplicates).
    #[error("malformed model: {0}")]
    Structure(String),

    /// Derived constants need a non-trivial model (gamma > 0).
    #[error("degenerate constants: {0}")]
    DegenerateConstants(String),

    #[error("exact mode supports at most {limit} nodes, model has {n}; use Gibbs sampling instead")]
    ExactLimit { n: usize, limit: usize },

    #[error("amplitude mode supports search spaces of at most {limit} states, got {size}; use accounting mode")]
    AmplitudeLimit { size: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("sample file: {0}")]
    SampleFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(MrfError::InvalidArgument(msg.into()))
}
