use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataAccessError {
    #[error("unknown storage backend {0:?}")]
    UnknownBackend(String),
    #[error("invalid data access configuration: {0}")]
    InvalidConfig(String),
    #[error("output path equals input path: {0}")]
    SameInputOutput(String),
    #[error("path {0:?} escapes its root folder")]
    OutsideRoot(String),
    #[error("i/o error at {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("failed to read {path}: {source}")]
    Read { path: String, source: io::Error },
    #[error("failed to write {path}: {source}")]
    Write { path: String, source: io::Error },
}

impl DataAccessError {
    pub(crate) fn io(path: &str, source: io::Error) -> Self {
        DataAccessError::Io { path: path.to_string(), source }
    }
}

#[derive(Debug, Error)]
pub enum TableError {
    #[error("column {0:?} appears more than once")]
    DuplicateColumn(String),
    #[error("column {name:?} has {len} rows, expected {expected}")]
    RowCountMismatch { name: String, len: usize, expected: usize },
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("column {name:?} has type {actual}, expected {expected}")]
    WrongType { name: String, expected: &'static str, actual: &'static str },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("unsupported column {name:?}: {reason}")]
    Unsupported { name: String, reason: String },
    #[error("parquet: {0}")]
    Parquet(#[from] parquet::errors::ParquetError),
    #[error("arrow: {0}")]
    Arrow(#[from] arrow_schema::ArrowError),
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown parameter --{flag}{}", suggestion.as_ref().map(|s| format!(" (did you mean --{s}?)")).unwrap_or_default())]
    UnknownFlag { flag: String, suggestion: Option<String> },
    #[error("missing required parameter --{0}")]
    Missing(String),
    #[error("parameter --{flag}: cannot parse {value:?} as {expected}")]
    TypeMismatch { flag: String, value: String, expected: &'static str },
    #[error("parameter --{flag}: {message}")]
    Invalid { flag: String, message: String },
}

impl ConfigError {
    pub fn invalid(flag: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { flag: flag.into(), message: message.into() }
    }
}

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("missing required column {0:?}")]
    MissingColumn(String),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("transform called after flush")]
    AfterFlush,
    #[error("flush called more than once")]
    DoubleFlush,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("{0}")]
    Failed(String),
}

impl TransformError {
    pub fn failed(message: impl Into<String>) -> Self {
        TransformError::Failed(message.into())
    }
}

#[derive(Debug, Error)]
pub enum RuntimeError {
    #[error("invalid runtime configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown transform {name:?}; available: {}", available.join(", "))]
    UnknownTransform { name: String, available: Vec<String> },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    DataAccess(#[from] DataAccessError),
    #[error("transform failed on {file}: {source}")]
    File { file: String, source: TransformError },
    #[error("transform failed: {0}")]
    Transform(#[from] TransformError),
    #[error("worker {0} panicked")]
    WorkerPanicked(usize),
    #[error("failed to write report: {0}")]
    Report(#[from] serde_json::Error),
}
