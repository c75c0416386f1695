use std::path::PathBuf;

/// Errors raised by the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at line {line}, column {column}: {message}")]
    Config { line: usize, column: usize, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] inexact_core::Error),
    #[error("trace mismatch at row {row}: {detail}")]
    TraceMismatch { row: usize, detail: String },
    #[error("bad sweep grid: {0}")]
    BadGrid(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown demo `{0}`")]
    UnknownDemo(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.into();
    move |source| HarnessError::Io { path, source }
}
