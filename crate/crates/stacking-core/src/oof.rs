//! Out-of-fold prediction matrix: every entry P[i][j] comes from learner
//! j fitted without row i's fold, so the meta-learner never sees a
//! prediction produced by a model that trained on that row.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::seed_mix;
use tensor_autodiff::Matrix;

use base_learners::{Dataset, Learner};

use crate::error::{Error, Result};
use crate::folds::{kfold_partition, FoldPartition};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OofMatrix {
    p: Matrix,
    learner_names: Vec<String>,
    partition: FoldPartition,
}

impl OofMatrix {
    pub fn matrix(&self) -> &Matrix {
        &self.p
    }

    pub fn n_rows(&self) -> usize {
        self.p.rows()
    }

    pub fn n_learners(&self) -> usize {
        self.p.cols()
    }

    pub fn learner_names(&self) -> &[String] {
        &self.learner_names
    }

    pub fn partition(&self) -> &FoldPartition {
        &self.partition
    }

    /// Assembles an OOF matrix directly from columns; used by callers
    /// that synthesize prediction columns (tests, diagnostics).
    pub fn from_parts(
        p: Matrix,
        learner_names: Vec<String>,
        partition: FoldPartition,
    ) -> Result<Self> {
        if p.rows() != partition.n() {
            return Err(Error::RowMisalignment(format!(
                "{} matrix rows vs {} partition rows",
                p.rows(),
                partition.n()
            )));
        }
        if p.cols() != learner_names.len() {
            return Err(Error::RowMisalignment(format!(
                "{} matrix columns vs {} learner names",
                p.cols(),
                learner_names.len()
            )));
        }
        Ok(OofMatrix { p, learner_names, partition })
    }
}

/// Builds the n x k out-of-fold matrix: for each fold o and learner j,
/// learner j is fitted on the data outside o and predicts o's rows into
/// column j. (fold, learner) jobs run in parallel; per-job seeds are
/// derived up front so results do not depend on scheduling.
pub fn build_oof_matrix<L: Learner>(
    learners: &[L],
    data: &Dataset,
    folds: usize,
    seed: u64,
) -> Result<OofMatrix> {
    if learners.is_empty() {
        return Err(Error::InvalidInput("no learners supplied".into()));
    }
    let n = data.n_rows();
    let partition = kfold_partition(n, folds, seed)?;

    let jobs: Vec<(usize, usize)> = (0..folds)
        .flat_map(|fold| (0..learners.len()).map(move |j| (fold, j)))
        .collect();

    let results: Result<Vec<(usize, usize, Vec<usize>, Vec<f64>)>> = jobs
        .into_par_iter()
        .map(|(fold, j)| {
            let train_rows = partition.complement_rows(fold);
            let predict_rows = partition.fold_rows(fold);
            let train = data.subset_rows(&train_rows);
            let salt = seed_mix(seed, fold as u64);
            let model = learners[j]
                .fit_boxed(&train, salt)
                .map_err(|source| Error::LearnerFit {
                    fold,
                    learner: learners[j].name(),
                    source,
                })?;
            let features = data.features().select_rows(&predict_rows);
            let preds = model.predict(&features).map_err(|source| Error::LearnerFit {
                fold,
                learner: learners[j].name(),
                source,
            })?;
            Ok((fold, j, predict_rows, preds))
        })
        .collect();

    let mut p = Matrix::zeros(n, learners.len());
    for (_fold, j, rows, preds) in results? {
        for (row, pred) in rows.into_iter().zip(preds) {
            if !pred.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite out-of-fold prediction at row {row}, learner {j}"
                )));
            }
            p.set(row, j, pred);
        }
    }
    let learner_names = learners.iter().map(Learner::name).collect();
    Ok(OofMatrix { p, learner_names, partition })
}

#[cfg(test)]
mod tests {
    use super::*;
    use base_learners::{Predictor, Result as BaseResult};

    /// Predicts the mean of its training targets everywhere.
    struct MeanLearner;

    struct MeanModel(f64);

    impl Learner for MeanLearner {
        fn name(&self) -> String {
            "mean".into()
        }
        fn fit_boxed(&self, data: &Dataset, _salt: u64) -> BaseResult<Box<dyn Predictor>> {
            Ok(Box::new(MeanModel(data.target_mean())))
        }
    }

    impl Predictor for MeanModel {
        fn predict(&self, features: &Matrix) -> BaseResult<Vec<f64>> {
            Ok(vec![self.0; features.rows()])
        }
    }

    fn four_row_data() -> Dataset {
        let x = Matrix::from_vec(4, 1, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        Dataset::new(x, vec![1.0, 2.0, 3.0, 4.0], vec!["x".into()]).unwrap()
    }

    #[test]
    fn fold_mean_columns_are_cross_predictions() {
        // Oracle: with a training-mean learner, P[i] must equal the mean
        // of the targets outside row i's fold. For the partition
        // {0,1}/{2,3} that is the column (3.5, 3.5, 1.5, 1.5).
        let data = four_row_data();
        for seed in 0..20u64 {
            let oof = build_oof_matrix(&[MeanLearner], &data, 2, seed).unwrap();
            let col = oof.matrix().column(0);
            for row in 0..4 {
                let fold = oof.partition().fold_of(row);
                let others = oof.partition().complement_rows(fold);
                let expected =
                    others.iter().map(|&r| data.target()[r]).sum::<f64>() / others.len() as f64;
                assert_eq!(col[row], expected, "seed {seed}, row {row}");
            }
            if oof.partition().fold_rows(0) == vec![0, 1] {
                assert_eq!(col, vec![3.5, 3.5, 1.5, 1.5]);
            }
        }
    }

    #[test]
    fn identical_specs_give_identical_columns() {
        let data = four_row_data();
        let oof = build_oof_matrix(&[MeanLearner, MeanLearner], &data, 2, 3).unwrap();
        assert_eq!(oof.matrix().column(0), oof.matrix().column(1));
        assert_eq!(oof.learner_names(), &["mean".to_string(), "mean".to_string()]);
    }

    #[test]
    fn rejects_empty_learner_list() {
        let data = four_row_data();
        let none: Vec<MeanLearner> = vec![];
        assert!(build_oof_matrix(&none, &data, 2, 0).is_err());
    }
}
