//! Per-learner summaries of the fitted weight distributions.

use serde::{Deserialize, Serialize};
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightQuantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

/// Linear-interpolation quantile of a sorted slice.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = p * (n - 1) as f64;
    let lo = h.floor() as usize;
    let frac = h - lo as f64;
    if lo + 1 < n {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[n - 1]
    }
}

/// Five-number summary of each weight column, in column order.
pub fn weight_summary(weights: &Matrix) -> Result<Vec<WeightQuantiles>> {
    if weights.rows() == 0 {
        return Err(Error::TooFewRows(0));
    }
    Ok((0..weights.cols())
        .map(|c| {
            let mut col = weights.column(c);
            col.sort_by(|a, b| a.partial_cmp(b).unwrap());
            WeightQuantiles {
                min: col[0],
                q25: quantile(&col, 0.25),
                median: quantile(&col, 0.5),
                q75: quantile(&col, 0.75),
                max: col[col.len() - 1],
            }
        })
        .collect())
}

/// Fraction of strictly negative entries in a weight matrix.
pub fn negative_fraction(weights: &Matrix) -> f64 {
    let total = weights.rows() * weights.cols();
    if total == 0 {
        return 0.0;
    }
    let negatives = weights.as_slice().iter().filter(|&&w| w < 0.0).count();
    negatives as f64 / total as f64
}
