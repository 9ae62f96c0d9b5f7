//! A complete stacked model: the meta-learner plus the base estimators
//! refitted on the full training set.

use serde::{Deserialize, Serialize};
use tensor_autodiff::Matrix;

use base_learners::FittedLearner;

use crate::error::{Error, Result};
use crate::net::{BaselineKind, BaselineNet, StackNet};
use crate::simplex::ConstantWeights;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum MetaLearner {
    Net(StackNet),
    Constant(ConstantWeights),
    Baseline(BaselineNet),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StackedModel {
    pub meta: MetaLearner,
    /// Base models fitted on the whole training set. Empty only for the
    /// direct baseline, which never consults them.
    pub base: Vec<FittedLearner>,
}

impl StackedModel {
    pub fn new(meta: MetaLearner, base: Vec<FittedLearner>) -> Result<Self> {
        let required = match &meta {
            MetaLearner::Net(net) => Some(net.k),
            MetaLearner::Constant(cw) => Some(cw.k()),
            MetaLearner::Baseline(b) => match b.kind {
                BaselineKind::MetaRegression => Some(b.mlp.input_dim()),
                BaselineKind::Direct => None,
            },
        };
        if let Some(k) = required {
            if base.len() != k {
                return Err(Error::InvalidInput(format!(
                    "meta-learner expects {k} base models, got {}",
                    base.len()
                )));
            }
        }
        Ok(StackedModel { meta, base })
    }
}

/// Output of a stacked prediction: the point predictions, the per-row
/// weight matrix when the meta-learner has interpretable weights, and
/// the additive phi column when present.
#[derive(Clone, Debug)]
pub struct StackedPrediction {
    pub predictions: Vec<f64>,
    pub weights: Option<Matrix>,
    pub phi: Option<Vec<f64>>,
}

/// Evaluates the full model on new feature rows: base models first, then
/// the meta-learner in eval mode (dropout off, running batch statistics).
pub fn predict_stacked(model: &StackedModel, features: &Matrix) -> Result<StackedPrediction> {
    let n = features.rows();
    let base_preds = if model.base.is_empty() {
        None
    } else {
        let k = model.base.len();
        let mut p = Matrix::zeros(n, k);
        for (j, learner) in model.base.iter().enumerate() {
            let col = learner.predict(features)?;
            for (i, v) in col.into_iter().enumerate() {
                p.set(i, j, v);
            }
        }
        Some(p)
    };

    match &model.meta {
        MetaLearner::Constant(cw) => {
            let p = base_preds.as_ref().expect("constant weights require base models");
            let predictions = (0..n)
                .map(|i| p.row(i).iter().zip(&cw.theta).map(|(v, t)| v * t).sum())
                .collect();
            let mut weights = Matrix::zeros(n, cw.k());
            for r in 0..n {
                for (c, t) in cw.theta.iter().enumerate() {
                    weights.set(r, c, *t);
                }
            }
            Ok(StackedPrediction { predictions, weights: Some(weights), phi: None })
        }
        MetaLearner::Net(net) => {
            let p = base_preds.as_ref().expect("stacking nets require base models");
            let (weights, phi) = net.weights_and_phi(features)?;
            let predictions = (0..n)
                .map(|i| {
                    let dot: f64 =
                        p.row(i).iter().zip(weights.row(i)).map(|(v, w)| v * w).sum();
                    dot + phi.as_ref().map_or(0.0, |col| col[i])
                })
                .collect();
            Ok(StackedPrediction { predictions, weights: Some(weights), phi })
        }
        MetaLearner::Baseline(baseline) => {
            let inputs = match baseline.kind {
                BaselineKind::MetaRegression => {
                    base_preds.as_ref().expect("meta regression requires base models")
                }
                BaselineKind::Direct => features,
            };
            let predictions = baseline.predict(inputs)?;
            Ok(StackedPrediction { predictions, weights: None, phi: None })
        }
    }
}
