//! Bagged trees and random forests: trees on bootstrap resamples, with
//! per-split feature subsampling for the forest.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::{rng_from_seed, SeededRng};
use tensor_autodiff::Matrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::tree::{fit_tree, TreeModel, TreeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleKind {
    Bagging,
    RandomForest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    /// Disabling the bootstrap fits every member on the full data; used
    /// to test that a single member reduces to a plain tree.
    pub bootstrap: bool,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        EnsembleParams { n_trees: 100, tree: TreeParams::default(), bootstrap: true }
    }
}

impl EnsembleParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidParam("n_trees must be at least 1".into()));
        }
        self.tree.validate()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub kind: EnsembleKind,
    members: Vec<TreeModel>,
}

impl EnsembleModel {
    /// Prediction is the arithmetic mean of the member predictions.
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        let mut sums = vec![0.0; features.rows()];
        for member in &self.members {
            for (s, p) in sums.iter_mut().zip(member.predict(features)?) {
                *s += p;
            }
        }
        let k = self.members.len() as f64;
        sums.iter_mut().for_each(|s| *s /= k);
        Ok(sums)
    }

    pub fn members(&self) -> &[TreeModel] {
        &self.members
    }
}

/// Fits `n_trees` trees on bootstrap resamples. Random forests subsample
/// `ceil(d/3)` features per split. Member seeds are drawn up front so the
/// parallel fit stays deterministic for any thread count.
pub fn fit_ensemble(
    data: &Dataset,
    kind: EnsembleKind,
    params: &EnsembleParams,
    rng: &mut SeededRng,
) -> Result<EnsembleModel> {
    params.validate()?;
    let mut tree_params = params.tree.clone();
    if kind == EnsembleKind::RandomForest {
        tree_params.feature_subset = Some(data.n_features().div_ceil(3));
    }

    let n = data.n_rows();
    let member_plans: Vec<(u64, Option<Vec<usize>>)> = (0..params.n_trees)
        .map(|_| {
            let seed = rng.gen::<u64>();
            let sample = params
                .bootstrap
                .then(|| (0..n).map(|_| rng.gen_range(0..n)).collect());
            (seed, sample)
        })
        .collect();

    let members: Result<Vec<TreeModel>> = member_plans
        .into_par_iter()
        .map(|(seed, sample)| {
            let mut member_rng = rng_from_seed(seed);
            match sample {
                Some(rows) => fit_tree(&data.subset_rows(&rows), &tree_params, &mut member_rng),
                None => fit_tree(data, &tree_params, &mut member_rng),
            }
        })
        .collect();
    Ok(EnsembleModel { kind, members: members? })
}
