//! The stacking meta-networks: a feed-forward trunk whose head emits
//! either unconstrained per-learner weights (UNNS) or lower-triangular
//! entries mapped onto the simplex (CNNS), optionally with an additive
//! output `phi(x)`, plus the two plain regression baselines.

use serde::{Deserialize, Serialize};
use tensor_autodiff::graph::{Graph, NodeId};
use tensor_autodiff::rng::{rng_from_seed, seed_mix};
use tensor_autodiff::train::{train_loop, TrainData};
use tensor_autodiff::{Matrix, Mlp, TrainConfig, TrainHistory};

use base_learners::Dataset;

use crate::error::{Error, Result};
use crate::head::{cnns_head_graph, triangular_len, DEFAULT_EPSILON_PD};
use crate::oof::OofMatrix;

const INIT_TAG: u64 = 0x5eed_1a7e;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HeadKind {
    Unns,
    Cnns,
}

/// A trained stacking network.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StackNet {
    pub mlp: Mlp,
    pub head: HeadKind,
    pub with_phi: bool,
    pub k: usize,
    pub epsilon_pd: f64,
    /// Clip negative weights and renormalize at prediction time. Off by
    /// default: the head itself only guarantees that weights sum to one.
    pub clip_negative: bool,
    pub config: TrainConfig,
    pub history: TrainHistory,
}

impl StackNet {
    fn head_width(head: HeadKind, k: usize) -> usize {
        match head {
            HeadKind::Unns => k,
            HeadKind::Cnns => triangular_len(k),
        }
    }

    pub fn output_dim(head: HeadKind, k: usize, with_phi: bool) -> usize {
        Self::head_width(head, k) + usize::from(with_phi)
    }

    /// Eval-mode weights (n x k) and optional phi column for the given
    /// feature rows.
    pub fn weights_and_phi(&self, features: &Matrix) -> Result<(Matrix, Option<Vec<f64>>)> {
        let mut g = Graph::new();
        let x = g.input(features.clone());
        let out = self.mlp.forward_eval(&mut g, x)?;
        let theta = head_weights(&mut g, out, self.head, self.k, self.epsilon_pd)?;
        let mut weights = g.value(theta).clone();
        if self.clip_negative {
            weights = clip_and_renormalize(&weights);
        }
        let phi = if self.with_phi {
            let offset = Self::head_width(self.head, self.k);
            let phi = g.slice_cols(out, offset, 1)?;
            Some(g.value(phi).column(0))
        } else {
            None
        };
        Ok((weights, phi))
    }
}

fn head_weights(
    g: &mut Graph,
    net_out: NodeId,
    head: HeadKind,
    k: usize,
    epsilon_pd: f64,
) -> Result<NodeId> {
    match head {
        HeadKind::Unns => Ok(g.slice_cols(net_out, 0, k)?),
        HeadKind::Cnns => {
            let l = g.slice_cols(net_out, 0, triangular_len(k))?;
            cnns_head_graph(g, l, k, epsilon_pd)
        }
    }
}

fn clip_and_renormalize(weights: &Matrix) -> Matrix {
    let mut out = weights.clone();
    let k = weights.cols();
    for r in 0..weights.rows() {
        let clipped: Vec<f64> = weights.row(r).iter().map(|&w| w.max(0.0)).collect();
        let sum: f64 = clipped.iter().sum();
        for c in 0..k {
            out.set(r, c, if sum > 0.0 { clipped[c] / sum } else { 1.0 / k as f64 });
        }
    }
    out
}

/// The stacking loss for one batch: prediction is
/// `sum_j theta_j(x_i) P[i][j] (+ phi(x_i))`, compared to the target
/// under mean squared error. `output` is the raw network output,
/// `extras` the OOF rows for the batch as an input node.
pub fn stack_loss_graph(
    g: &mut Graph,
    output: NodeId,
    extras: Option<NodeId>,
    targets: NodeId,
    head: HeadKind,
    k: usize,
    epsilon_pd: f64,
    with_phi: bool,
) -> tensor_autodiff::Result<NodeId> {
    let p = extras.ok_or_else(|| {
        tensor_autodiff::Error::InvalidInput("stacking loss needs the OOF batch".into())
    })?;
    let theta = head_weights(g, output, head, k, epsilon_pd)
        .map_err(|e| tensor_autodiff::Error::InvalidInput(e.to_string()))?;
    let weighted = g.mul(theta, p)?;
    let mut pred = g.row_sum(weighted);
    if with_phi {
        let offset = StackNet::head_width(head, k);
        let phi = g.slice_cols(output, offset, 1)?;
        pred = g.add(pred, phi)?;
    }
    g.mse_loss(pred, targets)
}

fn train_stacknet(
    oof: &OofMatrix,
    data: &Dataset,
    config: &TrainConfig,
    head: HeadKind,
    with_phi: bool,
    epsilon_pd: f64,
) -> Result<StackNet> {
    if oof.n_rows() != data.n_rows() {
        return Err(Error::RowMisalignment(format!(
            "{} out-of-fold rows vs {} data rows",
            oof.n_rows(),
            data.n_rows()
        )));
    }
    let k = oof.n_learners();
    let out_dim = StackNet::output_dim(head, k, with_phi);
    let mut init_rng = rng_from_seed(seed_mix(config.seed, INIT_TAG));
    let mut mlp = Mlp::new(
        data.n_features(),
        config.hidden_layers,
        config.hidden_size,
        out_dim,
        Mlp::DEFAULT_DROPOUT,
        &mut init_rng,
    )?;
    if head == HeadKind::Cnns {
        // Bias the head toward L = identity: the simplex map has an exact
        // zero gradient at L = 0, so starting the diagonal entries at 1
        // keeps the weights near-uniform without parking on that plateau.
        let bias = mlp.output_bias_mut();
        for row in 0..k {
            bias.set(0, crate::head::triangular_index(row, row), 1.0);
        }
    }
    let train_data = TrainData {
        inputs: data.features(),
        extras: Some(oof.matrix()),
        targets: data.target(),
    };
    let loss = move |g: &mut Graph,
                     output: NodeId,
                     extras: Option<NodeId>,
                     targets: NodeId|
          -> tensor_autodiff::Result<NodeId> {
        stack_loss_graph(g, output, extras, targets, head, k, epsilon_pd, with_phi)
    };
    let history = train_loop(&mut mlp, &train_data, config, &loss)?;
    Ok(StackNet {
        mlp,
        head,
        with_phi,
        k,
        epsilon_pd,
        clip_negative: false,
        config: config.clone(),
        history,
    })
}

/// Unconstrained neural network stacking: the head emits k free
/// coefficients per row (plus phi when enabled).
pub fn train_unns(
    oof: &OofMatrix,
    data: &Dataset,
    config: &TrainConfig,
    with_phi: bool,
) -> Result<StackNet> {
    train_stacknet(oof, data, config, HeadKind::Unns, with_phi, DEFAULT_EPSILON_PD)
}

/// Constrained neural network stacking: the head emits k(k+1)/2
/// lower-triangular entries mapped onto the simplex, so the weights sum
/// to one for every row at every point during training.
pub fn train_cnns(
    oof: &OofMatrix,
    data: &Dataset,
    config: &TrainConfig,
    with_phi: bool,
) -> Result<StackNet> {
    train_stacknet(oof, data, config, HeadKind::Cnns, with_phi, DEFAULT_EPSILON_PD)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    /// Regression network on the base predictions (standard stacking).
    MetaRegression,
    /// Regression network straight from the features to the target.
    Direct,
}

/// Plain regression network used by both baselines.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BaselineNet {
    pub mlp: Mlp,
    pub kind: BaselineKind,
    pub config: TrainConfig,
    pub history: TrainHistory,
}

impl BaselineNet {
    pub fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        Ok(self.mlp.predict(inputs)?.column(0))
    }
}

/// Trains a baseline regression network `inputs -> y` with the mean
/// squared error loss.
pub fn train_baseline_nn(
    inputs: &Matrix,
    y: &[f64],
    config: &TrainConfig,
    kind: BaselineKind,
) -> Result<BaselineNet> {
    let mut init_rng = rng_from_seed(seed_mix(config.seed, INIT_TAG));
    let mut mlp = Mlp::new(
        inputs.cols(),
        config.hidden_layers,
        config.hidden_size,
        1,
        Mlp::DEFAULT_DROPOUT,
        &mut init_rng,
    )?;
    let train_data = TrainData { inputs, extras: None, targets: y };
    let loss = |g: &mut Graph, output: NodeId, _extras: Option<NodeId>, targets: NodeId| {
        g.mse_loss(output, targets)
    };
    let history = train_loop(&mut mlp, &train_data, config, &loss)?;
    Ok(BaselineNet { mlp, kind, config: config.clone(), history })
}
