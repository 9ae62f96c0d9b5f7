//! Feature-dependent linear stacking of regression models.
//!
//! Base estimators are combined by weights that are functions of the
//! input features, produced by a small neural network: either
//! unconstrained (UNNS) or constrained to the probability simplex
//! through a lower-triangular head (CNNS). Constant-weight stacking and
//! the usual neural baselines are included for comparison, along with
//! the out-of-fold prediction machinery that keeps the meta-learner from
//! training on its own base models' training rows.

pub mod error;
pub mod folds;
pub mod head;
pub mod model;
pub mod net;
pub mod oof;
pub mod simplex;
pub mod weights;

pub use error::{Error, Result};
pub use folds::{kfold_partition, FoldPartition};
pub use head::{cnns_head, cnns_head_graph, triangular_index, triangular_len, DEFAULT_EPSILON_PD};
pub use model::{predict_stacked, MetaLearner, StackedModel, StackedPrediction};
pub use net::{
    stack_loss_graph, train_baseline_nn, train_cnns, train_unns, BaselineKind, BaselineNet,
    HeadKind, StackNet,
};
pub use oof::{build_oof_matrix, OofMatrix};
pub use simplex::{
    breiman_objective, fit_breiman, simplex_project, solve_simplex_qp, ConstantWeights,
};
pub use weights::closed_form_weights;
