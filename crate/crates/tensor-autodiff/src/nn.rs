//! Network building blocks: initialization, activation, dropout and
//! batch normalization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{elu_scalar, Graph, NodeId};
use crate::matrix::Matrix;
use crate::rng::{standard_normal, SeededRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Gaussian Xavier initialization: entries are i.i.d. normal with mean 0
/// and variance `2 / (fan_in + fan_out)`.
pub fn xavier_init(fan_in: usize, fan_out: usize, rng: &mut SeededRng) -> Result<Matrix> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::InvalidShape(format!(
            "xavier_init requires positive fan dimensions, got {fan_in}x{fan_out}"
        )));
    }
    let sd = (2.0 / (fan_in + fan_out) as f64).sqrt();
    let data = (0..fan_in * fan_out).map(|_| sd * standard_normal(rng)).collect();
    Matrix::from_vec(fan_in, fan_out, data)
}

/// Elementwise ELU with alpha = 1.
pub fn elu(x: &Matrix) -> Matrix {
    x.map(elu_scalar)
}

/// Inverted dropout: in train mode each entry is zeroed with probability
/// `rate` and survivors are scaled by `1/(1-rate)`, so the expectation of
/// every output entry equals its input. Eval mode is the identity.
pub fn dropout(x: &Matrix, rate: f64, mode: Mode, rng: &mut SeededRng) -> Result<Matrix> {
    match mode {
        Mode::Eval => Ok(x.clone()),
        Mode::Train => {
            let mask = dropout_mask(x.rows(), x.cols(), rate, rng)?;
            x.zip_map(&mask, |v, m| v * m)
        }
    }
}

/// The multiplicative mask used by train-mode dropout: entries are 0 with
/// probability `rate`, else `1/(1-rate)`.
pub fn dropout_mask(rows: usize, cols: usize, rate: f64, rng: &mut SeededRng) -> Result<Matrix> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidRate(rate));
    }
    let keep = 1.0 - rate;
    let data = (0..rows * cols)
        .map(|_| {
            if rand::Rng::gen::<f64>(rng) < rate {
                0.0
            } else {
                1.0 / keep
            }
        })
        .collect();
    Matrix::from_vec(rows, cols, data)
}

/// Per-feature batch normalization state: learned scale/shift plus
/// running statistics used in eval mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BatchNormState {
    pub running_mean: Matrix,
    pub running_var: Matrix,
    pub gamma: Matrix,
    pub beta: Matrix,
    pub epsilon: f64,
    pub momentum: f64,
}

impl BatchNormState {
    pub const DEFAULT_EPSILON: f64 = 1e-5;
    pub const DEFAULT_MOMENTUM: f64 = 0.1;

    pub fn new(width: usize) -> Self {
        BatchNormState {
            running_mean: Matrix::zeros(1, width),
            running_var: Matrix::filled(1, width, 1.0),
            gamma: Matrix::filled(1, width, 1.0),
            beta: Matrix::zeros(1, width),
            epsilon: Self::DEFAULT_EPSILON,
            momentum: Self::DEFAULT_MOMENTUM,
        }
    }

    pub fn width(&self) -> usize {
        self.gamma.cols()
    }
}

/// Differentiable batch-norm subgraph. In train mode the batch is
/// normalized by its own column statistics and `state`'s running stats
/// are updated in place; in eval mode the running stats are used and
/// nothing is mutated. `gamma`/`beta` enter the graph as the given nodes
/// so gradients flow to them.
pub fn batch_norm_graph(
    g: &mut Graph,
    x: NodeId,
    gamma: NodeId,
    beta: NodeId,
    state: &mut BatchNormState,
    mode: Mode,
) -> Result<NodeId> {
    let (rows, cols) = g.value(x).shape();
    if cols != state.width() {
        return Err(Error::ShapeMismatch {
            op: "batch_norm",
            details: format!("input width {} vs state width {}", cols, state.width()),
        });
    }
    let normalized = match mode {
        Mode::Train => {
            if rows < 2 {
                return Err(Error::InvalidBatch(rows));
            }
            let mean = g.col_mean(x);
            let centered = g.sub_row(x, mean)?;
            let sq = g.mul(centered, centered)?;
            let var = g.col_mean(sq);
            let std = {
                let guarded = g.add_scalar(var, state.epsilon);
                g.sqrt(guarded)
            };
            // Running statistics track the population batch moments.
            let m = state.momentum;
            let batch_mean = g.value(mean).clone();
            let batch_var = g.value(var).clone();
            state.running_mean = state
                .running_mean
                .zip_map(&batch_mean, |old, new| (1.0 - m) * old + m * new)?;
            state.running_var = state
                .running_var
                .zip_map(&batch_var, |old, new| (1.0 - m) * old + m * new)?;
            g.div_row(centered, std)?
        }
        Mode::Eval => {
            let mean = g.input(state.running_mean.clone());
            let std = state
                .running_var
                .map(|v| (v + state.epsilon).sqrt());
            let std = g.input(std);
            let centered = g.sub_row(x, mean)?;
            g.div_row(centered, std)?
        }
    };
    let scaled = g.mul_row(normalized, gamma)?;
    g.add_row(scaled, beta)
}

/// Standalone batch normalization over a matrix. Train mode updates the
/// running statistics in `state`.
pub fn batch_norm(x: &Matrix, state: &mut BatchNormState, mode: Mode) -> Result<Matrix> {
    let mut g = Graph::new();
    let xid = g.input(x.clone());
    let gamma = g.input(state.gamma.clone());
    let beta = g.input(state.beta.clone());
    let out = batch_norm_graph(&mut g, xid, gamma, beta, state, mode)?;
    Ok(g.value(out).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn xavier_is_deterministic_given_seed() {
        let a = xavier_init(1, 1, &mut rng_from_seed(7)).unwrap();
        let b = xavier_init(1, 1, &mut rng_from_seed(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn xavier_variance_matches_formula() {
        // 50x50 entries should have sample variance near 2/(50+50) = 0.02.
        let m = xavier_init(50, 50, &mut rng_from_seed(1)).unwrap();
        let n = m.as_slice().len() as f64;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        let var = m.as_slice().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!((var - 0.02).abs() < 0.2 * 0.02, "sample variance {var}");
    }

    #[test]
    fn xavier_rejects_zero_fan() {
        assert!(matches!(
            xavier_init(0, 3, &mut rng_from_seed(0)),
            Err(Error::InvalidShape(_))
        ));
    }

    #[test]
    fn elu_matches_definition() {
        let x = Matrix::from_vec(1, 3, vec![0.0, 2.5, -(2.0f64.ln())]).unwrap();
        let y = elu(&x);
        assert_eq!(y.get(0, 0), 0.0);
        assert_eq!(y.get(0, 1), 2.5);
        assert!((y.get(0, 2) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn dropout_trivial_modes() {
        let x = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut rng = rng_from_seed(3);
        assert_eq!(dropout(&x, 0.0, Mode::Train, &mut rng).unwrap(), x);
        assert_eq!(dropout(&x, 0.5, Mode::Eval, &mut rng).unwrap(), x);
        assert!(matches!(
            dropout(&x, 1.0, Mode::Train, &mut rng),
            Err(Error::InvalidRate(_))
        ));
    }

    #[test]
    fn dropout_is_unbiased() {
        // Mean over 1e5 entries of dropout(1.0) at rate 0.5 stays within 2% of 1.
        let x = Matrix::filled(1, 100_000, 1.0);
        let mut rng = rng_from_seed(5);
        let y = dropout(&x, 0.5, Mode::Train, &mut rng).unwrap();
        let mean = y.as_slice().iter().sum::<f64>() / 100_000.0;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn batch_norm_normalizes_columns() {
        // Large-scale data so the epsilon guard is negligible.
        let mut rng = rng_from_seed(9);
        let data: Vec<f64> = (0..200).map(|_| 40.0 * standard_normal(&mut rng) + 7.0).collect();
        let x = Matrix::from_vec(100, 2, data).unwrap();
        let mut state = BatchNormState::new(2);
        let y = batch_norm(&x, &mut state, Mode::Train).unwrap();
        for c in 0..2 {
            let col = y.column(c);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / col.len() as f64;
            assert!(mean.abs() < 1e-10, "pre-scale/shift mean {mean}");
            assert!((var - 1.0).abs() < 1e-6, "pre-scale/shift var {var}");
        }
    }

    #[test]
    fn batch_norm_constant_column_yields_shift() {
        let x = Matrix::filled(4, 1, 5.0);
        let mut state = BatchNormState::new(1);
        state.beta = Matrix::filled(1, 1, 2.5);
        let y = batch_norm(&x, &mut state, Mode::Train).unwrap();
        for r in 0..4 {
            assert!((y.get(r, 0) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn batch_norm_eval_identity_with_unit_stats() {
        let x = Matrix::from_vec(2, 2, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let mut state = BatchNormState::new(2);
        let y = batch_norm(&x, &mut state, Mode::Eval).unwrap();
        for (a, b) in x.as_slice().iter().zip(y.as_slice()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn batch_norm_rejects_single_row_training_batch() {
        let x = Matrix::from_vec(1, 2, vec![1.0, 2.0]).unwrap();
        let mut state = BatchNormState::new(2);
        assert!(matches!(
            batch_norm(&x, &mut state, Mode::Train),
            Err(Error::InvalidBatch(1))
        ));
    }

    #[test]
    fn eval_mode_ignores_rng_state() {
        let x = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut s1 = BatchNormState::new(2);
        let mut s2 = BatchNormState::new(2);
        let a = batch_norm(&x, &mut s1, Mode::Eval).unwrap();
        let b = batch_norm(&x, &mut s2, Mode::Eval).unwrap();
        assert_eq!(a, b);
        assert_eq!(s1.running_mean, s2.running_mean);
    }
}
