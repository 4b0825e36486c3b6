use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("inadmissible word set: {0}")]
    Inadmissible(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Kernel inclusions `ker c_∅ ⊆ ker c_w` fail; such data admit no interpolant.
    #[error("inconsistent data: {0}")]
    DataInconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
