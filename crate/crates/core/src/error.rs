use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the echo, cochlea, dataset, and network modules.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data is malformed or inconsistent with what the operation expects.
    #[error("data error: {0}")]
    Data(String),

    /// Tensor shapes do not line up.
    #[error("shape mismatch: expected {expected:?}, got {actual:?}")]
    Shape { expected: Vec<usize>, actual: Vec<usize> },

    /// Dechirping needs an echo crossing on the reference channel.
    #[error("dechirp failed: {0}")]
    Dechirp(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch} (loss = {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
