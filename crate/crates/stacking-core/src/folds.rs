//! Random balanced k-fold partitions.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use tensor_autodiff::rng::rng_from_seed;

use crate::error::{Error, Result};

/// A partition of `n` rows into `folds` disjoint folds whose sizes differ
/// by at most one. `assignment[i]` is the 0-based fold of row `i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FoldPartition {
    n: usize,
    folds: usize,
    assignment: Vec<usize>,
    seed: u64,
}

/// Uniformly shuffled fold assignment, deterministic given the seed.
pub fn kfold_partition(n: usize, folds: usize, seed: u64) -> Result<FoldPartition> {
    if folds < 2 || folds > n {
        return Err(Error::InvalidFolds { folds, n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));

    let base = n / folds;
    let remainder = n % folds;
    let mut assignment = vec![0usize; n];
    let mut cursor = 0;
    for fold in 0..folds {
        let size = base + usize::from(fold < remainder);
        for &row in &order[cursor..cursor + size] {
            assignment[row] = fold;
        }
        cursor += size;
    }
    Ok(FoldPartition { n, folds, assignment, seed })
}

impl FoldPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn fold_of(&self, row: usize) -> usize {
        self.assignment[row]
    }

    /// Rows belonging to `fold`, ascending.
    pub fn fold_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] == fold).collect()
    }

    /// Rows outside `fold`, ascending.
    pub fn complement_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.assignment[i] != fold).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_laws_hold() {
        let p = kfold_partition(4, 2, 0).unwrap();
        let f0 = p.fold_rows(0);
        let f1 = p.fold_rows(1);
        assert_eq!(f0.len(), 2);
        assert_eq!(f1.len(), 2);
        let mut all: Vec<usize> = f0.iter().chain(&f1).copied().collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3]);
    }

    #[test]
    fn fold_sizes_differ_by_at_most_one() {
        let p = kfold_partition(10, 3, 1).unwrap();
        let mut sizes: Vec<usize> = (0..3).map(|f| p.fold_rows(f).len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
    }

    #[test]
    fn same_inputs_same_assignment() {
        let a = kfold_partition(27, 5, 42).unwrap();
        let b = kfold_partition(27, 5, 42).unwrap();
        assert_eq!(a.assignment(), b.assignment());
        let c = kfold_partition(27, 5, 43).unwrap();
        assert_ne!(a.assignment(), c.assignment());
    }

    #[test]
    fn invalid_fold_counts_are_rejected() {
        assert!(matches!(kfold_partition(5, 1, 0), Err(Error::InvalidFolds { .. })));
        assert!(matches!(kfold_partition(5, 6, 0), Err(Error::InvalidFolds { .. })));
        assert!(kfold_partition(5, 5, 0).is_ok());
    }
}
