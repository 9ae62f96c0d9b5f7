//! Feed-forward network built from dense layers with batch norm, ELU and
//! dropout on every hidden layer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::matrix::Matrix;
use crate::nn::{batch_norm_graph, dropout_mask, xavier_init, BatchNormState, Mode};
use crate::rng::SeededRng;

/// Parameters of one dense layer. Hidden layers carry batch-norm state
/// and a dropout rate; the output layer carries neither.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerParams {
    pub weight: Matrix,
    pub bias: Matrix,
    pub batch_norm: Option<BatchNormState>,
    pub dropout_rate: f64,
}

impl LayerParams {
    pub fn new(
        fan_in: usize,
        fan_out: usize,
        batch_norm: bool,
        dropout_rate: f64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::InvalidRate(dropout_rate));
        }
        Ok(LayerParams {
            weight: xavier_init(fan_in, fan_out, rng)?,
            bias: Matrix::zeros(1, fan_out),
            batch_norm: batch_norm.then(|| BatchNormState::new(fan_out)),
            dropout_rate,
        })
    }
}

/// Multilayer perceptron: `hidden_layers` blocks of
/// linear -> batch norm -> ELU -> dropout, then a plain linear output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    input_dim: usize,
    output_dim: usize,
    hidden: Vec<LayerParams>,
    output: LayerParams,
}

/// Node handles produced by one forward construction: the network output
/// plus every parameter node in [`Mlp::param_count`] order.
pub struct ForwardPass {
    pub output: NodeId,
    pub params: Vec<NodeId>,
}

impl Mlp {
    pub const DEFAULT_DROPOUT: f64 = 0.5;

    pub fn new(
        input_dim: usize,
        hidden_layers: usize,
        hidden_size: usize,
        output_dim: usize,
        dropout_rate: f64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidShape("network dimensions must be positive".into()));
        }
        if hidden_layers > 0 && hidden_size == 0 {
            return Err(Error::InvalidShape("hidden_size must be positive".into()));
        }
        let mut hidden = Vec::with_capacity(hidden_layers);
        let mut width = input_dim;
        for _ in 0..hidden_layers {
            hidden.push(LayerParams::new(width, hidden_size, true, dropout_rate, rng)?);
            width = hidden_size;
        }
        let output = LayerParams::new(width, output_dim, false, 0.0, rng)?;
        Ok(Mlp { input_dim, output_dim, hidden, output })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn hidden_layers(&self) -> usize {
        self.hidden.len()
    }

    /// Number of trainable parameter matrices (weights, biases, batch-norm
    /// scales and shifts).
    pub fn param_count(&self) -> usize {
        self.hidden.iter().map(|l| if l.batch_norm.is_some() { 4 } else { 2 }).sum::<usize>() + 2
    }

    /// Bias of the output layer; exposed so heads with a preferred
    /// operating point (e.g. identity-like initialization) can seed it.
    pub fn output_bias_mut(&mut self) -> &mut Matrix {
        &mut self.output.bias
    }

    /// Trainable parameter matrices in the same order `forward_*` reports
    /// their graph nodes.
    pub fn params_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.hidden.iter_mut().chain(std::iter::once(&mut self.output)) {
            out.push(&mut layer.weight);
            out.push(&mut layer.bias);
            if let Some(bn) = layer.batch_norm.as_mut() {
                out.push(&mut bn.gamma);
                out.push(&mut bn.beta);
            }
        }
        out
    }

    /// Forward pass in train mode: batch statistics are used (and running
    /// stats updated), and dropout masks are drawn from `rng`.
    pub fn forward_train(
        &mut self,
        g: &mut Graph,
        x: NodeId,
        rng: &mut SeededRng,
    ) -> Result<ForwardPass> {
        self.check_input(g, x)?;
        let mut params = Vec::with_capacity(self.param_count());
        let mut cur = x;
        for layer in &mut self.hidden {
            cur = layer_forward(g, cur, layer, Mode::Train, Some(rng), &mut params)?;
        }
        let output = layer_forward(g, cur, &mut self.output, Mode::Train, Some(rng), &mut params)?;
        Ok(ForwardPass { output, params })
    }

    /// Forward pass in eval mode: running statistics, no dropout, no
    /// mutation. Repeated calls produce identical outputs.
    pub fn forward_eval(&self, g: &mut Graph, x: NodeId) -> Result<NodeId> {
        self.check_input(g, x)?;
        let mut params = Vec::new();
        let mut cur = x;
        for layer in &self.hidden {
            // Eval mode never touches the running stats, so the clone is
            // discarded without observable effect.
            let mut layer = layer.clone();
            cur = layer_forward(g, cur, &mut layer, Mode::Eval, None, &mut params)?;
        }
        let mut out_layer = self.output.clone();
        layer_forward(g, cur, &mut out_layer, Mode::Eval, None, &mut params)
    }

    /// Convenience: evaluates the network on a matrix of rows.
    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        let mut g = Graph::new();
        let x = g.input(inputs.clone());
        let out = self.forward_eval(&mut g, x)?;
        Ok(g.value(out).clone())
    }

    fn check_input(&self, g: &Graph, x: NodeId) -> Result<()> {
        let cols = g.value(x).cols();
        if cols != self.input_dim {
            return Err(Error::ShapeMismatch {
                op: "mlp_forward",
                details: format!("input width {} vs network input {}", cols, self.input_dim),
            });
        }
        Ok(())
    }
}

fn layer_forward(
    g: &mut Graph,
    x: NodeId,
    layer: &mut LayerParams,
    mode: Mode,
    rng: Option<&mut SeededRng>,
    params: &mut Vec<NodeId>,
) -> Result<NodeId> {
    let w = g.param(layer.weight.clone());
    let b = g.param(layer.bias.clone());
    params.push(w);
    params.push(b);
    let lin = g.matmul(x, w)?;
    let mut cur = g.add_row(lin, b)?;
    if let Some(bn) = layer.batch_norm.as_mut() {
        let gamma = g.param(bn.gamma.clone());
        let beta = g.param(bn.beta.clone());
        params.push(gamma);
        params.push(beta);
        cur = batch_norm_graph(g, cur, gamma, beta, bn, mode)?;
        cur = g.elu(cur);
        if mode == Mode::Train && layer.dropout_rate > 0.0 {
            let rng = rng.expect("train mode requires an rng");
            let (rows, cols) = g.value(cur).shape();
            let mask = g.input(dropout_mask(rows, cols, layer.dropout_rate, rng)?);
            cur = g.mul(cur, mask)?;
        }
    }
    Ok(cur)
}
