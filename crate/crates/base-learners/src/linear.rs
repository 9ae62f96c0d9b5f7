//! Linear regression: ordinary least squares, ridge, and lasso via
//! coordinate descent.

use serde::{Deserialize, Serialize};
use tensor_autodiff::linalg::spd_solve;
use tensor_autodiff::Matrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LinearPenalty {
    None,
    /// Ridge penalty `lambda * ||beta||^2` on the slopes; the intercept is
    /// never penalized.
    Ridge(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>> {
        if features.cols() != self.coefficients.len() {
            return Err(Error::FeatureMismatch {
                expected: self.coefficients.len(),
                got: features.cols(),
            });
        }
        Ok((0..features.rows())
            .map(|r| {
                self.intercept
                    + features
                        .row(r)
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(x, b)| x * b)
                        .sum::<f64>()
            })
            .collect())
    }
}

/// Least squares / ridge via the normal equations with a Cholesky solve.
/// Singular designs fall back to a diagonal jitter of 1e-10, escalated
/// until the factorization succeeds.
pub fn fit_linear(data: &Dataset, penalty: LinearPenalty) -> Result<LinearModel> {
    let lambda = match penalty {
        LinearPenalty::None => 0.0,
        LinearPenalty::Ridge(l) => {
            if l < 0.0 {
                return Err(Error::InvalidParam(format!("ridge lambda must be >= 0, got {l}")));
            }
            l
        }
    };
    let n = data.n_rows();
    let d = data.n_features();
    let x = data.features();
    let y = data.target();

    // Gram system over [1 X]; only slope entries get the ridge term.
    let p = d + 1;
    let mut gram = Matrix::zeros(p, p);
    let mut rhs = vec![0.0; p];
    for r in 0..n {
        let row = x.row(r);
        gram.set(0, 0, gram.get(0, 0) + 1.0);
        for (j, &xj) in row.iter().enumerate() {
            gram.set(0, j + 1, gram.get(0, j + 1) + xj);
            gram.set(j + 1, 0, gram.get(j + 1, 0) + xj);
            for (k, &xk) in row.iter().enumerate() {
                gram.set(j + 1, k + 1, gram.get(j + 1, k + 1) + xj * xk);
            }
        }
        rhs[0] += y[r];
        for (j, &xj) in row.iter().enumerate() {
            rhs[j + 1] += xj * y[r];
        }
    }
    for j in 1..p {
        gram.set(j, j, gram.get(j, j) + lambda);
    }

    let mut jitter = 0.0;
    loop {
        let mut sys = gram.clone();
        if jitter > 0.0 {
            for j in 0..p {
                sys.set(j, j, sys.get(j, j) + jitter);
            }
        }
        if let Some(beta) = spd_solve(&sys, &rhs) {
            if beta.iter().all(|b| b.is_finite()) {
                return Ok(LinearModel { intercept: beta[0], coefficients: beta[1..].to_vec() });
            }
        }
        jitter = if jitter == 0.0 { 1e-10 } else { jitter * 1e3 };
        if jitter > 1.0 {
            return Err(Error::InvalidData(
                "normal equations unsolvable even with jitter".into(),
            ));
        }
    }
}

/// Lasso by cyclic coordinate descent on standardized features with an
/// unpenalized intercept. Coefficients are reported on the original
/// scale. Convergence: max coefficient change below 1e-7 or 1e4 sweeps.
pub fn fit_lasso(data: &Dataset, lambda: f64) -> Result<LinearModel> {
    if lambda < 0.0 {
        return Err(Error::InvalidParam(format!("lasso lambda must be >= 0, got {lambda}")));
    }
    let n = data.n_rows();
    let d = data.n_features();
    let x = data.features();
    let y = data.target();
    let n_f = n as f64;

    let y_mean = data.target_mean();
    let yc: Vec<f64> = y.iter().map(|v| v - y_mean).collect();

    // Standardize columns; constant columns stay zero and keep a zero slope.
    let mut means = vec![0.0; d];
    let mut sds = vec![0.0; d];
    let mut z = vec![0.0; n * d]; // column-major standardized design
    for j in 0..d {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n_f;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_f;
        let sd = var.sqrt();
        means[j] = mean;
        sds[j] = sd;
        if sd > 0.0 {
            for (i, &v) in col.iter().enumerate() {
                z[j * n + i] = (v - mean) / sd;
            }
        }
    }

    let mut beta = vec![0.0; d];
    let mut residual = yc.clone();
    const TOL: f64 = 1e-7;
    const MAX_SWEEPS: usize = 10_000;
    for _ in 0..MAX_SWEEPS {
        let mut max_change = 0.0f64;
        for j in 0..d {
            if sds[j] == 0.0 {
                continue;
            }
            let zj = &z[j * n..(j + 1) * n];
            let old = beta[j];
            // rho = (1/n) z_j' (residual + z_j * beta_j)
            let mut rho = 0.0;
            for i in 0..n {
                rho += zj[i] * residual[i];
            }
            rho = rho / n_f + old; // z_j'z_j / n == 1 for standardized columns
            let new = soft_threshold(rho, lambda);
            if new != old {
                let delta = new - old;
                for i in 0..n {
                    residual[i] -= delta * zj[i];
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if max_change < TOL {
            break;
        }
    }

    // Back to the original scale.
    let mut coefficients = vec![0.0; d];
    let mut intercept = y_mean;
    for j in 0..d {
        if sds[j] > 0.0 {
            coefficients[j] = beta[j] / sds[j];
            intercept -= coefficients[j] * means[j];
        }
    }
    Ok(LinearModel { intercept, coefficients })
}

/// Largest penalty with a non-zero lasso solution on this data:
/// `max_j |z_j' y_c| / n` over standardized columns.
pub fn lasso_lambda_max(data: &Dataset) -> f64 {
    let n = data.n_rows();
    let n_f = n as f64;
    let y_mean = data.target_mean();
    let yc: Vec<f64> = data.target().iter().map(|v| v - y_mean).collect();
    let mut best = 0.0f64;
    for j in 0..data.n_features() {
        let col = data.features().column(j);
        let mean = col.iter().sum::<f64>() / n_f;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n_f;
        let sd = var.sqrt();
        if sd == 0.0 {
            continue;
        }
        let dot: f64 = col
            .iter()
            .zip(&yc)
            .map(|(v, r)| (v - mean) / sd * r)
            .sum();
        best = best.max((dot / n_f).abs());
    }
    best
}

fn soft_threshold(v: f64, lambda: f64) -> f64 {
    if v > lambda {
        v - lambda
    } else if v < -lambda {
        v + lambda
    } else {
        0.0
    }
}
