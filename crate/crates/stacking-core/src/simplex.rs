//! The probability simplex: Euclidean projection, a projected-gradient
//! quadratic-program solver, and constant-weight (Breiman) stacking.

use serde::{Deserialize, Serialize};
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};
use crate::oof::OofMatrix;

/// Euclidean projection onto `{w : w_i >= 0, sum w = 1}` by the
/// sort-and-threshold rule.
pub fn simplex_project(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Minimizes `theta' Q theta + b' theta` over the simplex by projected
/// gradient descent with step 1/L, L estimated by power iteration.
/// Stops after `max_iters` or when the relative objective change drops
/// below `tol`.
pub fn solve_simplex_qp(q: &Matrix, b: &[f64], max_iters: usize, tol: f64) -> Result<Vec<f64>> {
    let k = q.rows();
    if q.cols() != k || b.len() != k {
        return Err(Error::InvalidInput(format!(
            "QP dimensions disagree: Q is {}x{}, b has {}",
            q.rows(),
            q.cols(),
            b.len()
        )));
    }
    let objective = |theta: &[f64]| -> f64 {
        let mut quad = 0.0;
        for i in 0..k {
            for j in 0..k {
                quad += theta[i] * q.get(i, j) * theta[j];
            }
        }
        quad + b.iter().zip(theta).map(|(bi, ti)| bi * ti).sum::<f64>()
    };

    // Gradient Lipschitz constant of theta'Q theta + b'theta is 2*lmax(Q).
    let lmax = spectral_norm(q);
    let step = if lmax > 0.0 { 1.0 / (2.0 * lmax) } else { 1.0 };

    let mut theta = vec![1.0 / k as f64; k];
    let mut last_obj = objective(&theta);
    for _ in 0..max_iters {
        let mut grad = vec![0.0; k];
        for i in 0..k {
            let mut g = b[i];
            for j in 0..k {
                g += 2.0 * q.get(i, j) * theta[j];
            }
            grad[i] = g;
        }
        let candidate: Vec<f64> =
            theta.iter().zip(&grad).map(|(t, g)| t - step * g).collect();
        theta = simplex_project(&candidate);
        let obj = objective(&theta);
        let denom = last_obj.abs().max(1.0);
        if (last_obj - obj).abs() / denom < tol {
            last_obj = obj;
            break;
        }
        last_obj = obj;
    }
    let _ = last_obj;
    Ok(simplex_project(&theta))
}

fn spectral_norm(q: &Matrix) -> f64 {
    let k = q.rows();
    let mut v = vec![1.0 / (k as f64).sqrt(); k];
    let mut norm = 0.0;
    for _ in 0..100 {
        let mut next = vec![0.0; k];
        for i in 0..k {
            for j in 0..k {
                next[i] += q.get(i, j) * v[j];
            }
        }
        norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        next.iter_mut().for_each(|x| *x /= norm);
        v = next;
    }
    norm
}

/// Constant stacking weights on the simplex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstantWeights {
    pub theta: Vec<f64>,
}

impl ConstantWeights {
    pub fn k(&self) -> usize {
        self.theta.len()
    }
}

/// Constant-weight stacking: minimizes `sum_i (y_i - theta' P_i)^2` over
/// the simplex via projected gradient (1e4 iterations, relative
/// objective tolerance 1e-10).
pub fn fit_breiman(oof: &OofMatrix, y: &[f64]) -> Result<ConstantWeights> {
    let n = oof.n_rows();
    let k = oof.n_learners();
    if y.len() != n {
        return Err(Error::RowMisalignment(format!(
            "{n} out-of-fold rows vs {} targets",
            y.len()
        )));
    }
    // ||y - P theta||^2 = theta'(P'P)theta - 2(P'y)'theta + y'y.
    let p = oof.matrix();
    let pt = p.transpose();
    let q = pt.matmul(p)?;
    let py: Vec<f64> = (0..k)
        .map(|j| (0..n).map(|i| p.get(i, j) * y[i]).sum::<f64>())
        .collect();
    let b: Vec<f64> = py.iter().map(|v| -2.0 * v).collect();
    let theta = solve_simplex_qp(&q, &b, 10_000, 1e-10)?;
    Ok(ConstantWeights { theta })
}

/// Residual sum of squares of constant weights on an OOF matrix.
pub fn breiman_objective(oof: &OofMatrix, y: &[f64], theta: &[f64]) -> f64 {
    let p = oof.matrix();
    (0..oof.n_rows())
        .map(|i| {
            let pred: f64 = p.row(i).iter().zip(theta).map(|(pij, t)| pij * t).sum();
            (y[i] - pred) * (y[i] - pred)
        })
        .sum()
}
