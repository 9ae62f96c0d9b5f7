use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid hyperparameter: {0}")]
    InvalidParam(String),

    #[error("feature shape mismatch: model expects {expected} columns, got {got}")]
    FeatureMismatch { expected: usize, got: usize },

    #[error("unknown column {name:?}; available: {available:?}")]
    UnknownColumn { name: String, available: Vec<String> },

    #[error(transparent)]
    Autodiff(#[from] tensor_autodiff::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
