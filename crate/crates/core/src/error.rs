use std::path::PathBuf;

/// Error type shared across the workspace.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration (bad parameter ranges, inconsistent knobs).
    #[error("configuration error: {0}")]
    Config(String),
    /// Invalid runtime input (shape mismatches, insufficient data).
    #[error("input error: {0}")]
    Input(String),
    /// Numeric failure (singular solve, divergence, non-finite values).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// I/O failure with the path that caused it.
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// File contents that do not match the expected format.
    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
