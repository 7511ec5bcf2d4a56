use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] koszul_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    /// Bad flags, recipes or config files; the CLI exits with status 2.
    #[error("{0}")]
    Usage(String),
    #[error("cache file {path} is malformed: {reason}")]
    BadCache { path: PathBuf, reason: String },
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            HarnessError::Usage(_)
                | HarnessError::Json(_)
                | HarnessError::Core(koszul_core::Error::Parse(_) | koszul_core::Error::InvalidCurve(_) | koszul_core::Error::NotPrime(_))
        )
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
