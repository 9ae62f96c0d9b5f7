//! The uniform fit/predict contract every base estimator sits behind.

use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::{rng_from_seed, seed_mix};
use tensor_autodiff::Matrix;

use crate::boosting::{fit_gradient_boosting, BoostParams, BoostingModel};
use crate::dataset::Dataset;
use crate::ensemble::{fit_ensemble, EnsembleKind, EnsembleModel, EnsembleParams};
use crate::error::Result;
use crate::linear::{fit_lasso, fit_linear, LinearModel, LinearPenalty};
use crate::tree::{fit_tree, TreeModel, TreeParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum LearnerKind {
    Ols,
    Ridge { lambda: f64 },
    Lasso { lambda: f64 },
    Tree(TreeParams),
    Bagging(EnsembleParams),
    RandomForest(EnsembleParams),
    GradientBoosting(BoostParams),
}

/// Recipe for one base estimator. `columns` optionally restricts the
/// learner to a named subset of features (both at fit and predict time).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LearnerSpec {
    pub name: String,
    pub kind: LearnerKind,
    pub columns: Option<Vec<String>>,
    pub seed: u64,
}

impl LearnerSpec {
    pub fn new(name: impl Into<String>, kind: LearnerKind, seed: u64) -> Self {
        LearnerSpec { name: name.into(), kind, columns: None, seed }
    }

    pub fn with_columns(mut self, columns: Vec<String>) -> Self {
        self.columns = Some(columns);
        self
    }

    pub fn ols(name: impl Into<String>) -> Self {
        Self::new(name, LearnerKind::Ols, 0)
    }

    pub fn ridge(name: impl Into<String>, lambda: f64) -> Self {
        Self::new(name, LearnerKind::Ridge { lambda }, 0)
    }

    pub fn lasso(name: impl Into<String>, lambda: f64) -> Self {
        Self::new(name, LearnerKind::Lasso { lambda }, 0)
    }

    /// Fits this spec on `data`. The `salt` is mixed into the spec's seed
    /// so refits on different folds draw independent randomness while
    /// staying reproducible.
    pub fn fit(&self, data: &Dataset, salt: u64) -> Result<FittedLearner> {
        let (data, column_indices) = match &self.columns {
            Some(cols) => (data.select_columns(cols)?, Some(data.column_indices(cols)?)),
            None => (data.clone(), None),
        };
        let mut rng = rng_from_seed(seed_mix(self.seed, salt));
        let model = match &self.kind {
            LearnerKind::Ols => FittedModel::Linear(fit_linear(&data, LinearPenalty::None)?),
            LearnerKind::Ridge { lambda } => {
                FittedModel::Linear(fit_linear(&data, LinearPenalty::Ridge(*lambda))?)
            }
            LearnerKind::Lasso { lambda } => FittedModel::Linear(fit_lasso(&data, *lambda)?),
            LearnerKind::Tree(params) => FittedModel::Tree(fit_tree(&data, params, &mut rng)?),
            LearnerKind::Bagging(params) => FittedModel::Ensemble(fit_ensemble(
                &data,
                EnsembleKind::Bagging,
                params,
                &mut rng,
            )?),
            LearnerKind::RandomForest(params) => FittedModel::Ensemble(fit_ensemble(
                &data,
                EnsembleKind::RandomForest,
                params,
                &mut rng,
            )?),
            LearnerKind::GradientBoosting(params) => {
                FittedModel::Boosting(fit_gradient_boosting(&data, params)?)
            }
        };
        Ok(FittedLearner { spec: self.clone(), column_indices, model })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum FittedModel {
    Linear(LinearModel),
    Tree(TreeModel),
    Ensemble(EnsembleModel),
    Boosting(BoostingModel),
}

/// A fitted base estimator. Prediction is pure and deterministic.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FittedLearner {
    pub spec: LearnerSpec,
    /// Feature indices this learner reads, when restricted to a subset.
    column_indices: Option<Vec<usize>>,
    pub model: FittedModel,
}

impl FittedLearner {
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        let projected;
        let input = match &self.column_indices {
            Some(idx) => {
                projected = features.select_cols(idx);
                &projected
            }
            None => features,
        };
        match &self.model {
            FittedModel::Linear(m) => m.predict(input),
            FittedModel::Tree(m) => m.predict(input),
            FittedModel::Ensemble(m) => m.predict(input),
            FittedModel::Boosting(m) => m.predict(input),
        }
    }
}

/// Anything that can be trained on a dataset and hand back a predictor.
/// Exists so the out-of-fold machinery can also run with synthetic
/// learners in tests.
pub trait Learner: Send + Sync {
    fn name(&self) -> String;
    fn fit_boxed(&self, data: &Dataset, salt: u64) -> Result<Box<dyn Predictor>>;
}

pub trait Predictor: Send + Sync {
    fn predict(&self, features: &Matrix) -> Result<Vec<f64>>;
}

impl Learner for LearnerSpec {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn fit_boxed(&self, data: &Dataset, salt: u64) -> Result<Box<dyn Predictor>> {
        Ok(Box::new(self.fit(data, salt)?))
    }
}

impl Predictor for FittedLearner {
    fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        FittedLearner::predict(self, features)
    }
}
