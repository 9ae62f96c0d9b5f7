//! Accuracy metrics with standard errors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A metric value with the standard error of its per-row losses:
/// `se = sample standard deviation / sqrt(n)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricWithSE {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

fn metric_from_losses(losses: &[f64]) -> MetricWithSE {
    let n = losses.len();
    let n_f = n as f64;
    let value = losses.iter().sum::<f64>() / n_f;
    let ss: f64 = losses.iter().map(|l| (l - value) * (l - value)).sum();
    let sd = (ss / (n_f - 1.0)).sqrt();
    MetricWithSE { value, se: sd / n_f.sqrt(), n }
}

fn check_lengths(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::ShapeMismatch { left: y.len(), right: yhat.len() });
    }
    if y.len() < 2 {
        return Err(Error::TooFewRows(y.len()));
    }
    Ok(())
}

/// Mean squared error; the standard error is that of the squared errors.
pub fn mse_with_se(y: &[f64], yhat: &[f64]) -> Result<MetricWithSE> {
    check_lengths(y, yhat)?;
    let losses: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok(metric_from_losses(&losses))
}

/// Mean absolute error; the standard error is that of the absolute errors.
pub fn mae_with_se(y: &[f64], yhat: &[f64]) -> Result<MetricWithSE> {
    check_lengths(y, yhat)?;
    let losses: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| (a - b).abs()).collect();
    Ok(metric_from_losses(&losses))
}
