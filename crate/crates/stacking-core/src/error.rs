use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid folds: F={folds} must satisfy 2 <= F <= n ({n} rows)")]
    InvalidFolds { folds: usize, n: usize },

    #[error("row misalignment: {0}")]
    RowMisalignment(String),

    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("learner {learner:?} failed on fold {fold}: {source}")]
    LearnerFit {
        fold: usize,
        learner: String,
        source: base_learners::Error,
    },

    #[error(transparent)]
    Base(#[from] base_learners::Error),

    #[error(transparent)]
    Autodiff(#[from] tensor_autodiff::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
