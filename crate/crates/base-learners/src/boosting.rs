//! Gradient boosting with squared-error loss: stagewise trees fit to
//! residuals, shrunk by a learning rate.

use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::rng_from_seed;
use tensor_autodiff::Matrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tree::{fit_tree, TreeModel, TreeParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub n_rounds: usize,
    pub shrinkage: f64,
    pub tree: TreeParams,
}

impl Default for BoostParams {
    fn default() -> Self {
        BoostParams {
            n_rounds: 100,
            shrinkage: 0.1,
            tree: TreeParams { max_depth: Some(3), min_leaf: 1, feature_subset: None },
        }
    }
}

impl BoostParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::InvalidParam("n_rounds must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.shrinkage) {
            return Err(Error::InvalidParam(format!(
                "shrinkage must lie in [0, 1], got {}",
                self.shrinkage
            )));
        }
        self.tree.validate()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoostingModel {
    pub base_value: f64,
    pub shrinkage: f64,
    stages: Vec<TreeModel>,
}

impl BoostingModel {
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        let mut preds = vec![self.base_value; features.rows()];
        for stage in &self.stages {
            for (p, t) in preds.iter_mut().zip(stage.predict(features)?) {
                *p += self.shrinkage * t;
            }
        }
        Ok(preds)
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }
}

/// Stagewise residual fitting: the model starts at `mean(y)` and each
/// round adds `shrinkage * tree(residuals)`.
pub fn fit_gradient_boosting(data: &Dataset, params: &BoostParams) -> Result<BoostingModel> {
    params.validate()?;
    let base_value = data.target_mean();
    let n = data.n_rows();
    let mut current = vec![base_value; n];
    let mut stages = Vec::with_capacity(params.n_rounds);
    // Residual trees use no feature subsampling, so the rng is inert; a
    // fixed stream keeps the signature of fit_tree satisfied.
    let mut rng = rng_from_seed(0);

    for _ in 0..params.n_rounds {
        let residuals: Vec<f64> =
            data.target().iter().zip(&current).map(|(y, f)| y - f).collect();
        let stage_data = Dataset::new(
            data.features().clone(),
            residuals,
            data.column_names().to_vec(),
        )?;
        let tree = fit_tree(&stage_data, &params.tree, &mut rng)?;
        for (c, t) in current.iter_mut().zip(tree.predict(data.features())?) {
            *c += params.shrinkage * t;
        }
        stages.push(tree);
    }
    Ok(BoostingModel { base_value, shrinkage: params.shrinkage, stages })
}
