use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    /// Bad flags, unknown names, invalid option values.
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Core(#[from] twinview_core::Error),
    /// A JSON artifact that cannot be read back: truncated, wrong schema
    /// version, wrong shape.
    #[error("{path}: report format error: {message}")]
    ReportFormat { path: PathBuf, message: String },
    #[error("{path}: model format error: {message}")]
    ModelFormat { path: PathBuf, message: String },
    /// Every dataset of a benchmark failed.
    #[error("benchmark failed on every dataset")]
    AllDatasetsFailed,
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        AppError::Usage(message.into())
    }

    /// 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Core(e) if e.is_numerical() => 3,
            AppError::AllDatasetsFailed => 3,
            _ => 2,
        }
    }
}
