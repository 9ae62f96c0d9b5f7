//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Per-parameter first/second moment accumulators plus the step counter.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<Matrix>,
    pub v: Vec<Matrix>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub const DEFAULT_LR: f64 = 1e-3;

    /// Fresh state with zero moments shaped like the given parameters.
    pub fn for_params(params: &[&Matrix], lr: f64) -> Self {
        AdamState {
            step: 0,
            m: params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect(),
            v: params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect(),
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update. Increments `state.step` by exactly one and moves each
/// parameter against its gradient.
pub fn adam_step(params: &mut [&mut Matrix], grads: &[&Matrix], state: &mut AdamState) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::ShapeMismatch {
            op: "adam_step",
            details: format!(
                "{} params, {} grads, {} moment slots",
                params.len(),
                grads.len(),
                state.m.len()
            ),
        });
    }
    for (i, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.shape() != g.shape() || p.shape() != state.m[i].shape() {
            return Err(Error::ShapeMismatch {
                op: "adam_step",
                details: format!(
                    "param {i}: {:?} vs grad {:?} vs moments {:?}",
                    p.shape(),
                    g.shape(),
                    state.m[i].shape()
                ),
            });
        }
    }

    state.step += 1;
    let t = state.step as f64;
    let bc1 = 1.0 - state.beta1.powf(t);
    let bc2 = 1.0 - state.beta2.powf(t);
    for (i, (param, grad)) in params.iter_mut().zip(grads).enumerate() {
        let m = state.m[i].as_mut_slice();
        let v = state.v[i].as_mut_slice();
        let p = param.as_mut_slice();
        for ((m, v), (p, &g)) in m.iter_mut().zip(v).zip(p.iter_mut().zip(grad.as_slice())) {
            *m = state.beta1 * *m + (1.0 - state.beta1) * g;
            *v = state.beta2 * *v + (1.0 - state.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= state.lr * m_hat / (v_hat.sqrt() + state.eps);
        }
    }
    Ok(())
}
