use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    ShapeMismatch { left: usize, right: usize },

    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
