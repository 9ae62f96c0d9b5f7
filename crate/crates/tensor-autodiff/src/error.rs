use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch in {op}: {details}")]
    ShapeMismatch { op: &'static str, details: String },

    #[error("dropout rate must lie in [0, 1), got {0}")]
    InvalidRate(f64),

    #[error("batch normalization needs at least 2 rows in train mode, got {0}")]
    InvalidBatch(usize),

    #[error("backward requires a 1x1 scalar root, got {rows}x{cols}")]
    NonScalarRoot { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
