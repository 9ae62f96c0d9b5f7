//! Pearson correlation of base-learner prediction errors and redundancy
//! flagging of near-duplicate learners.

use serde::{Deserialize, Serialize};
use stacking_core::OofMatrix;

use crate::error::{Error, Result};

/// Symmetric correlation matrix with possibly-undefined entries (a
/// constant error column has no defined correlation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    names: Vec<String>,
    k: usize,
    entries: Vec<Option<f64>>,
}

impl CorrelationMatrix {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i * self.k + j]
    }
}

/// Pearson correlation between the per-learner residual columns
/// `P[., j] - y`. Entries involving a constant residual column are
/// undefined rather than silently 1.
pub fn error_correlation(oof: &OofMatrix, y: &[f64]) -> Result<CorrelationMatrix> {
    let n = oof.n_rows();
    let k = oof.n_learners();
    if y.len() != n {
        return Err(Error::ShapeMismatch { left: n, right: y.len() });
    }
    let p = oof.matrix();
    let residuals: Vec<Vec<f64>> = (0..k)
        .map(|j| (0..n).map(|i| p.get(i, j) - y[i]).collect())
        .collect();
    let centered: Vec<Vec<f64>> = residuals
        .iter()
        .map(|col| {
            let mean = col.iter().sum::<f64>() / n as f64;
            col.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let mut entries = vec![None; k * k];
    for i in 0..k {
        for j in i..k {
            let value = if norms[i] == 0.0 || norms[j] == 0.0 {
                None
            } else {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                Some(dot / (norms[i] * norms[j]))
            };
            entries[i * k + j] = value;
            entries[j * k + i] = value;
        }
    }
    Ok(CorrelationMatrix { names: oof.learner_names().to_vec(), k, entries })
}

/// An unordered learner pair whose error correlation reached the
/// redundancy threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RedundancyPair {
    pub i: usize,
    pub j: usize,
    pub rho: f64,
}

pub const DEFAULT_REDUNDANCY_THRESHOLD: f64 = 0.99;

/// All unordered pairs with `rho >= threshold`, sorted by rho descending
/// (then by index for determinism). Undefined entries are never flagged.
pub fn redundancy_flags(correlation: &CorrelationMatrix, threshold: f64) -> Vec<RedundancyPair> {
    let k = correlation.k();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            if let Some(rho) = correlation.get(i, j) {
                if rho >= threshold {
                    pairs.push(RedundancyPair { i, j, rho });
                }
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.rho
            .partial_cmp(&a.rho)
            .unwrap()
            .then(a.i.cmp(&b.i))
            .then(a.j.cmp(&b.j))
    });
    pairs
}
