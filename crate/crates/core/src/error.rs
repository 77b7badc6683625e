use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input data: {0}")]
    Data(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unsupported schema version {found} (expected {expected})")]
    UnsupportedVersion { found: u32, expected: u32 },
    #[error("digest mismatch: stored {stored}, computed {computed}")]
    Digest { stored: String, computed: String },
    #[error("feature registry mismatch: model uses {expected}, input uses {found}")]
    RegistryMismatch { expected: String, found: String },
}

/// Coarse failure classes, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Internal,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Io { .. }
            | Error::Json(_)
            | Error::Data(_)
            | Error::UnsupportedVersion { .. }
            | Error::Digest { .. }
            | Error::RegistryMismatch { .. } => ErrorKind::Data,
        }
    }
}
