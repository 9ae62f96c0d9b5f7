//! Base regression estimators for model stacking: linear models with L1,
//! L2 or no penalty, CART trees, bagging, random forests and gradient
//! boosting, all behind one fit/predict contract.
//!
//! Fits are deterministic under a fixed seed; fitted models are immutable
//! and safe to share across threads.

pub mod boosting;
pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod linear;
pub mod spec;
pub mod tree;

pub use boosting::{fit_gradient_boosting, BoostParams, BoostingModel};
pub use dataset::Dataset;
pub use ensemble::{fit_ensemble, EnsembleKind, EnsembleModel, EnsembleParams};
pub use error::{Error, Result};
pub use linear::{fit_lasso, fit_linear, lasso_lambda_max, LinearModel, LinearPenalty};
pub use spec::{FittedLearner, FittedModel, Learner, LearnerKind, LearnerSpec, Predictor};
pub use tree::{fit_tree, TreeModel, TreeParams};
