use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: empty file")]
    EmptyFile { path: PathBuf },

    #[error("{path}: target column {target:?} not found; available columns: {available:?}")]
    MissingTarget { path: PathBuf, target: String, available: Vec<String> },

    #[error("{path}: column {name:?} not found; available columns: {available:?}")]
    MissingColumn { path: PathBuf, name: String, available: Vec<String> },

    #[error("{path}: cell {value:?} at data row {row}, column {column:?} is not a finite number")]
    NonNumericCell { path: PathBuf, row: usize, column: String, value: String },

    #[error("{path}: data row {row} has {got} fields, expected {expected}")]
    FieldCount { path: PathBuf, row: usize, got: usize, expected: usize },

    #[error("model file has unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("model file is corrupt: {0}")]
    CorruptModel(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn stage(
        stage: &'static str,
        source: impl std::error::Error + Send + Sync + 'static,
    ) -> Self {
        Error::Stage { stage, source: Box::new(source) }
    }
}
