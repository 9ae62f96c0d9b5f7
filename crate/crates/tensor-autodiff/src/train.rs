//! Mini-batch training loop with validation-based early stopping,
//! learning-rate reduction and best-epoch restore.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::adam::{adam_step, AdamState};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::layers::Mlp;
use crate::matrix::Matrix;
use crate::rng::rng_from_seed;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainConfig {
    pub hidden_layers: usize,
    pub hidden_size: usize,
    pub batch_size: usize,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub val_fraction: f64,
    pub max_epochs: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub lr_reduce_factor: f64,
    /// Epochs without improvement before the learning rate is reduced.
    /// `None` derives `ceil(patience / 2)`.
    pub lr_reduce_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden_layers: 3,
            hidden_size: 100,
            batch_size: 128,
            patience: 10,
            val_fraction: 0.1,
            max_epochs: 500,
            seed: 0,
            learning_rate: AdamState::DEFAULT_LR,
            lr_reduce_factor: 0.5,
            lr_reduce_patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "val_fraction must lie in (0, 1), got {}",
                self.val_fraction
            )));
        }
        if self.patience == 0 {
            return Err(Error::InvalidConfig("patience must be at least 1".into()));
        }
        if self.hidden_layers > 0 && self.hidden_size == 0 {
            return Err(Error::InvalidConfig("hidden_size must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn lr_reduce_after(&self) -> usize {
        self.lr_reduce_patience.unwrap_or(self.patience.div_ceil(2)).max(1)
    }
}

/// Row-aligned training inputs. `extras` carries side data the loss needs
/// per row (for stacking, the out-of-fold prediction matrix).
pub struct TrainData<'a> {
    pub inputs: &'a Matrix,
    pub extras: Option<&'a Matrix>,
    pub targets: &'a [f64],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpochRecord {
    pub train_loss: f64,
    pub val_loss: f64,
    pub learning_rate: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based index of the epoch whose parameters were restored.
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Builds the scalar loss for one batch. Receives the network output,
/// the extras input node (when extras were supplied) and the targets as
/// an n x 1 input node.
pub trait BatchLoss {
    fn loss(
        &self,
        g: &mut Graph,
        output: NodeId,
        extras: Option<NodeId>,
        targets: NodeId,
    ) -> Result<NodeId>;
}

impl<F> BatchLoss for F
where
    F: Fn(&mut Graph, NodeId, Option<NodeId>, NodeId) -> Result<NodeId>,
{
    fn loss(
        &self,
        g: &mut Graph,
        output: NodeId,
        extras: Option<NodeId>,
        targets: NodeId,
    ) -> Result<NodeId> {
        self(g, output, extras, targets)
    }
}

/// Trains `mlp` on `data`. Splits off `val_fraction` rows for validation,
/// shuffles mini-batches each epoch, reduces the learning rate after
/// `lr_reduce_after()` stale epochs, stops after `patience` stale epochs
/// (or `max_epochs`), and restores the parameters of the best validation
/// epoch. Fully deterministic given `config.seed`.
pub fn train_loop(
    mlp: &mut Mlp,
    data: &TrainData<'_>,
    config: &TrainConfig,
    loss_fn: &dyn BatchLoss,
) -> Result<TrainHistory> {
    config.validate()?;
    let n = data.inputs.rows();
    if n == 0 {
        return Err(Error::InvalidInput("empty training set".into()));
    }
    if data.targets.len() != n {
        return Err(Error::ShapeMismatch {
            op: "train_loop",
            details: format!("{} input rows vs {} targets", n, data.targets.len()),
        });
    }
    if let Some(extras) = data.extras {
        if extras.rows() != n {
            return Err(Error::ShapeMismatch {
                op: "train_loop",
                details: format!("{} input rows vs {} extras rows", n, extras.rows()),
            });
        }
    }

    let mut rng = rng_from_seed(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let n_val = ((n as f64 * config.val_fraction).round() as usize).clamp(1, n.saturating_sub(1));
    let n_train = n - n_val;
    if n_train < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 training rows after the validation split, got {n_train}"
        )));
    }
    let mut train_idx: Vec<usize> = order[..n_train].to_vec();
    let val_idx: Vec<usize> = order[n_train..].to_vec();

    let val_batch = gather(data, &val_idx);
    let mut adam = init_adam(mlp, config.learning_rate);
    let reduce_after = config.lr_reduce_after();

    let mut history = Vec::new();
    let mut best_val = f64::INFINITY;
    let mut best_epoch = 0usize;
    let mut best_state: Option<Mlp> = None;
    let mut stale = 0usize;

    for epoch in 1..=config.max_epochs {
        train_idx.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in batch_chunks(&train_idx, config.batch_size) {
            let batch = gather(data, chunk);
            let mut g = Graph::new();
            let x = g.input(batch.inputs);
            let extras = batch.extras.map(|e| g.input(e));
            let targets = g.input(batch.targets);
            let fp = mlp.forward_train(&mut g, x, &mut rng)?;
            let loss = loss_fn.loss(&mut g, fp.output, extras, targets)?;
            let loss_value = g.scalar_value(loss)?;
            if !loss_value.is_finite() {
                return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
            }
            g.backward(loss)?;
            let grads: Vec<Matrix> = fp
                .params
                .iter()
                .map(|&id| g.gradient(id).expect("backward ran").clone())
                .collect();
            let grad_refs: Vec<&Matrix> = grads.iter().collect();
            adam_step(&mut mlp.params_mut(), &grad_refs, &mut adam)?;
            loss_sum += loss_value * chunk.len() as f64;
        }
        let train_loss = loss_sum / n_train as f64;

        let val_loss = eval_loss(mlp, &val_batch, loss_fn)?;
        if !val_loss.is_finite() {
            return Err(Error::NonFinite(format!("validation loss at epoch {epoch}")));
        }
        history.push(EpochRecord { train_loss, val_loss, learning_rate: adam.lr });

        if val_loss < best_val {
            best_val = val_loss;
            best_epoch = epoch;
            best_state = Some(mlp.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale == reduce_after {
                adam.lr *= config.lr_reduce_factor;
            }
            if stale >= config.patience {
                break;
            }
        }
    }

    if let Some(best) = best_state {
        *mlp = best;
    }
    Ok(TrainHistory { epochs: history, best_epoch, best_val_loss: best_val })
}

/// Loss of the network on the given rows in eval mode.
pub fn eval_loss(mlp: &Mlp, batch: &GatheredBatch, loss_fn: &dyn BatchLoss) -> Result<f64> {
    let mut g = Graph::new();
    let x = g.input(batch.inputs.clone());
    let extras = batch.extras.clone().map(|e| g.input(e));
    let targets = g.input(batch.targets.clone());
    let out = mlp.forward_eval(&mut g, x)?;
    let loss = loss_fn.loss(&mut g, out, extras, targets)?;
    g.scalar_value(loss)
}

pub struct GatheredBatch {
    pub inputs: Matrix,
    pub extras: Option<Matrix>,
    pub targets: Matrix,
}

pub fn gather(data: &TrainData<'_>, idx: &[usize]) -> GatheredBatch {
    let targets: Vec<f64> = idx.iter().map(|&i| data.targets[i]).collect();
    GatheredBatch {
        inputs: data.inputs.select_rows(idx),
        extras: data.extras.map(|e| e.select_rows(idx)),
        targets: Matrix::from_vec(idx.len(), 1, targets).expect("finite targets"),
    }
}

/// Splits `idx` into batches, folding a trailing single row into the
/// previous batch so train-mode batch norm always sees at least 2 rows.
fn batch_chunks(idx: &[usize], batch_size: usize) -> Vec<&[usize]> {
    let mut out: Vec<&[usize]> = Vec::new();
    let mut start = 0;
    while start < idx.len() {
        let mut end = (start + batch_size).min(idx.len());
        if idx.len() - end == 1 {
            end = idx.len();
        }
        out.push(&idx[start..end]);
        start = end;
    }
    out
}


fn init_adam(mlp: &mut Mlp, lr: f64) -> AdamState {
    let params = mlp.params_mut();
    let refs: Vec<&Matrix> = params.iter().map(|p| &**p).collect();
    AdamState::for_params(&refs, lr)
}
