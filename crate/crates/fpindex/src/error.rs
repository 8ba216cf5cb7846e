//! Toolkit error type, wrapping IO, format and pipeline failures.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Structural problems in a binary or text file.
    #[error("{path}: {detail}")]
    Format { path: PathBuf, detail: String },

    /// Line-level parse failures in text formats.
    #[error("{path}:{line}: {detail}")]
    Parse {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("gallery is locked (remove {path} if stale)")]
    Locked { path: PathBuf },

    #[error(transparent)]
    Core(#[from] fpindex_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            detail: detail.into(),
        }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, detail: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            detail: detail.into(),
        }
    }

    /// Exit code class: 2 for data/format problems, 3 for pipeline errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format { .. } | Error::Parse { .. } | Error::Locked { .. } => 2,
            Error::Core(_) => 3,
        }
    }
}
