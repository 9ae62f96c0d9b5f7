//! Reverse-mode automatic differentiation over dense matrices.
//!
//! A [`Graph`] is a define-by-run tape: each operation evaluates its
//! result eagerly and records the node so [`Graph::backward`] can sweep
//! the tape in reverse. Parents always precede children in the arena,
//! so reverse insertion order is a valid topological order.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Clone, Debug)]
enum Op {
    /// Leaf holding data that gradients are not collected for.
    Input,
    /// Leaf holding trainable values.
    Param,
    MatMul(NodeId, NodeId),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    /// Elementwise (Hadamard) product.
    Mul(NodeId, NodeId),
    /// n x c plus a 1 x c row, broadcast over rows.
    AddRow(NodeId, NodeId),
    SubRow(NodeId, NodeId),
    MulRow(NodeId, NodeId),
    DivRow(NodeId, NodeId),
    /// n x c divided by an n x 1 column, broadcast over columns.
    DivColVec(NodeId, NodeId),
    RowSum(NodeId),
    ColMean(NodeId),
    Scale(NodeId, f64),
    AddScalar(NodeId),
    Elu(NodeId),
    Sqrt(NodeId),
    SliceCols { src: NodeId, start: usize, len: usize },
    /// Mean squared error between two same-shaped nodes; scalar output.
    MseLoss(NodeId, NodeId),
}

struct Node {
    op: Op,
    value: Matrix,
    grad: Option<Matrix>,
}

#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

pub fn elu_scalar(x: f64) -> f64 {
    if x >= 0.0 {
        x
    } else {
        x.exp() - 1.0
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    fn push(&mut self, op: Op, value: Matrix) -> NodeId {
        self.nodes.push(Node { op, value, grad: None });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &Matrix {
        &self.nodes[id.0].value
    }

    /// Gradient of the last backward root with respect to `id`.
    /// `None` before any backward pass.
    pub fn gradient(&self, id: NodeId) -> Option<&Matrix> {
        self.nodes[id.0].grad.as_ref()
    }

    /// Value of a 1x1 node as a plain float.
    pub fn scalar_value(&self, id: NodeId) -> Result<f64> {
        let v = self.value(id);
        if v.shape() != (1, 1) {
            return Err(Error::NonScalarRoot { rows: v.rows(), cols: v.cols() });
        }
        Ok(v.get(0, 0))
    }

    pub fn input(&mut self, value: Matrix) -> NodeId {
        self.push(Op::Input, value)
    }

    pub fn param(&mut self, value: Matrix) -> NodeId {
        self.push(Op::Param, value)
    }

    fn shapes(&self, a: NodeId, b: NodeId) -> ((usize, usize), (usize, usize)) {
        (self.value(a).shape(), self.value(b).shape())
    }

    fn require_same_shape(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<()> {
        let (sa, sb) = self.shapes(a, b);
        if sa != sb {
            return Err(Error::ShapeMismatch { op, details: format!("{sa:?} vs {sb:?}") });
        }
        Ok(())
    }

    fn require_row_broadcast(&self, op: &'static str, a: NodeId, b: NodeId) -> Result<()> {
        let (sa, sb) = self.shapes(a, b);
        if sb.0 != 1 || sa.1 != sb.1 {
            return Err(Error::ShapeMismatch { op, details: format!("{sa:?} vs row {sb:?}") });
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        let value = self.value(a).matmul(self.value(b))?;
        Ok(self.push(Op::MatMul(a, b), value))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.require_same_shape("add", a, b)?;
        let value = self.value(a).add(self.value(b))?;
        Ok(self.push(Op::Add(a, b), value))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.require_same_shape("sub", a, b)?;
        let value = self.value(a).sub(self.value(b))?;
        Ok(self.push(Op::Sub(a, b), value))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.require_same_shape("mul", a, b)?;
        let value = self.value(a).zip_map(self.value(b), |x, y| x * y)?;
        Ok(self.push(Op::Mul(a, b), value))
    }

    pub fn add_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        self.require_row_broadcast("add_row", a, row)?;
        let value = broadcast_rows(self.value(a), self.value(row), |x, y| x + y);
        Ok(self.push(Op::AddRow(a, row), value))
    }

    pub fn sub_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        self.require_row_broadcast("sub_row", a, row)?;
        let value = broadcast_rows(self.value(a), self.value(row), |x, y| x - y);
        Ok(self.push(Op::SubRow(a, row), value))
    }

    pub fn mul_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        self.require_row_broadcast("mul_row", a, row)?;
        let value = broadcast_rows(self.value(a), self.value(row), |x, y| x * y);
        Ok(self.push(Op::MulRow(a, row), value))
    }

    pub fn div_row(&mut self, a: NodeId, row: NodeId) -> Result<NodeId> {
        self.require_row_broadcast("div_row", a, row)?;
        let value = broadcast_rows(self.value(a), self.value(row), |x, y| x / y);
        Ok(self.push(Op::DivRow(a, row), value))
    }

    pub fn div_colvec(&mut self, a: NodeId, col: NodeId) -> Result<NodeId> {
        let (sa, sc) = self.shapes(a, col);
        if sc.1 != 1 || sa.0 != sc.0 {
            return Err(Error::ShapeMismatch {
                op: "div_colvec",
                details: format!("{sa:?} vs column {sc:?}"),
            });
        }
        let av = self.value(a);
        let cv = self.value(col);
        let mut out = Matrix::zeros(sa.0, sa.1);
        for r in 0..sa.0 {
            let d = cv.get(r, 0);
            for c in 0..sa.1 {
                out.set(r, c, av.get(r, c) / d);
            }
        }
        Ok(self.push(Op::DivColVec(a, col), out))
    }

    pub fn row_sum(&mut self, a: NodeId) -> NodeId {
        let av = self.value(a);
        let mut out = Matrix::zeros(av.rows(), 1);
        for r in 0..av.rows() {
            out.set(r, 0, av.row(r).iter().sum());
        }
        self.push(Op::RowSum(a), out)
    }

    pub fn col_mean(&mut self, a: NodeId) -> NodeId {
        let means = self.value(a).col_means();
        let value = Matrix::from_vec(1, means.len(), means).expect("finite means");
        self.push(Op::ColMean(a), value)
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.value(a).scale(c);
        self.push(Op::Scale(a, c), value)
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> NodeId {
        let value = self.value(a).map(|x| x + c);
        self.push(Op::AddScalar(a), value)
    }

    pub fn elu(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(elu_scalar);
        self.push(Op::Elu(a), value)
    }

    pub fn sqrt(&mut self, a: NodeId) -> NodeId {
        let value = self.value(a).map(f64::sqrt);
        self.push(Op::Sqrt(a), value)
    }

    pub fn slice_cols(&mut self, src: NodeId, start: usize, len: usize) -> Result<NodeId> {
        let sv = self.value(src);
        if start + len > sv.cols() {
            return Err(Error::ShapeMismatch {
                op: "slice_cols",
                details: format!("cols {}..{} of {}", start, start + len, sv.cols()),
            });
        }
        let idx: Vec<usize> = (start..start + len).collect();
        let value = sv.select_cols(&idx);
        Ok(self.push(Op::SliceCols { src, start, len }, value))
    }

    /// Mean squared error `(1/n) * sum((pred - target)^2)` as a 1x1 node.
    pub fn mse_loss(&mut self, pred: NodeId, target: NodeId) -> Result<NodeId> {
        self.require_same_shape("mse_loss", pred, target)?;
        let p = self.value(pred);
        let t = self.value(target);
        let n = (p.rows() * p.cols()) as f64;
        if n == 0.0 {
            return Err(Error::InvalidInput("mse_loss on empty input".into()));
        }
        let sum: f64 = p
            .as_slice()
            .iter()
            .zip(t.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let value = Matrix::from_vec(1, 1, vec![sum / n])
            .map_err(|_| Error::NonFinite("mse_loss".into()))?;
        Ok(self.push(Op::MseLoss(pred, target), value))
    }

    /// Propagates gradients from a scalar root to every node on the tape.
    pub fn backward(&mut self, root: NodeId) -> Result<()> {
        let shape = self.value(root).shape();
        if shape != (1, 1) {
            return Err(Error::NonScalarRoot { rows: shape.0, cols: shape.1 });
        }
        for node in &mut self.nodes {
            node.grad = Some(Matrix::zeros(node.value.rows(), node.value.cols()));
        }
        self.nodes[root.0].grad = Some(Matrix::from_vec(1, 1, vec![1.0]).unwrap());

        for idx in (0..=root.0).rev() {
            let op = self.nodes[idx].op.clone();
            let out_grad = self.nodes[idx].grad.clone().expect("allocated above");
            match op {
                Op::Input | Op::Param => {}
                Op::MatMul(a, b) => {
                    let da = out_grad.matmul(&self.nodes[b.0].value.transpose()).unwrap();
                    let db = self.nodes[a.0].value.transpose().matmul(&out_grad).unwrap();
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::Add(a, b) => {
                    self.accumulate(a, &out_grad);
                    self.accumulate(b, &out_grad);
                }
                Op::Sub(a, b) => {
                    self.accumulate(a, &out_grad);
                    self.accumulate(b, &out_grad.scale(-1.0));
                }
                Op::Mul(a, b) => {
                    let da = out_grad.zip_map(&self.nodes[b.0].value, |g, y| g * y).unwrap();
                    let db = out_grad.zip_map(&self.nodes[a.0].value, |g, x| g * x).unwrap();
                    self.accumulate(a, &da);
                    self.accumulate(b, &db);
                }
                Op::AddRow(a, row) => {
                    self.accumulate(a, &out_grad);
                    self.accumulate(row, &col_sums(&out_grad));
                }
                Op::SubRow(a, row) => {
                    self.accumulate(a, &out_grad);
                    self.accumulate(row, &col_sums(&out_grad).scale(-1.0));
                }
                Op::MulRow(a, row) => {
                    let rv = self.nodes[row.0].value.clone();
                    let da = broadcast_rows(&out_grad, &rv, |g, y| g * y);
                    let prod = out_grad
                        .zip_map(&self.nodes[a.0].value, |g, x| g * x)
                        .unwrap();
                    self.accumulate(a, &da);
                    self.accumulate(row, &col_sums(&prod));
                }
                Op::DivRow(a, row) => {
                    let rv = self.nodes[row.0].value.clone();
                    let da = broadcast_rows(&out_grad, &rv, |g, y| g / y);
                    let av = &self.nodes[a.0].value;
                    let mut drow = Matrix::zeros(1, rv.cols());
                    for r in 0..out_grad.rows() {
                        for c in 0..out_grad.cols() {
                            let y = rv.get(0, c);
                            let add = -out_grad.get(r, c) * av.get(r, c) / (y * y);
                            drow.set(0, c, drow.get(0, c) + add);
                        }
                    }
                    self.accumulate(a, &da);
                    self.accumulate(row, &drow);
                }
                Op::DivColVec(a, col) => {
                    let cv = self.nodes[col.0].value.clone();
                    let av = &self.nodes[a.0].value;
                    let mut da = Matrix::zeros(out_grad.rows(), out_grad.cols());
                    let mut dcol = Matrix::zeros(cv.rows(), 1);
                    for r in 0..out_grad.rows() {
                        let d = cv.get(r, 0);
                        let mut acc = 0.0;
                        for c in 0..out_grad.cols() {
                            let g = out_grad.get(r, c);
                            da.set(r, c, g / d);
                            acc -= g * av.get(r, c) / (d * d);
                        }
                        dcol.set(r, 0, acc);
                    }
                    self.accumulate(a, &da);
                    self.accumulate(col, &dcol);
                }
                Op::RowSum(a) => {
                    let av_cols = self.nodes[a.0].value.cols();
                    let mut da = Matrix::zeros(out_grad.rows(), av_cols);
                    for r in 0..out_grad.rows() {
                        let g = out_grad.get(r, 0);
                        for c in 0..av_cols {
                            da.set(r, c, g);
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::ColMean(a) => {
                    let av_rows = self.nodes[a.0].value.rows();
                    let scale = 1.0 / av_rows as f64;
                    let mut da = Matrix::zeros(av_rows, out_grad.cols());
                    for r in 0..av_rows {
                        for c in 0..out_grad.cols() {
                            da.set(r, c, out_grad.get(0, c) * scale);
                        }
                    }
                    self.accumulate(a, &da);
                }
                Op::Scale(a, c) => {
                    self.accumulate(a, &out_grad.scale(c));
                }
                Op::AddScalar(a) => {
                    self.accumulate(a, &out_grad);
                }
                Op::Elu(a) => {
                    let da = out_grad
                        .zip_map(&self.nodes[a.0].value, |g, x| {
                            if x >= 0.0 {
                                g
                            } else {
                                g * x.exp()
                            }
                        })
                        .unwrap();
                    self.accumulate(a, &da);
                }
                Op::Sqrt(a) => {
                    let da = out_grad
                        .zip_map(&self.nodes[idx].value, |g, y| g / (2.0 * y))
                        .unwrap();
                    self.accumulate(a, &da);
                }
                Op::SliceCols { src, start, len } => {
                    let sv = &self.nodes[src.0].value;
                    let mut da = Matrix::zeros(sv.rows(), sv.cols());
                    for r in 0..out_grad.rows() {
                        for c in 0..len {
                            da.set(r, start + c, out_grad.get(r, c));
                        }
                    }
                    self.accumulate(src, &da);
                }
                Op::MseLoss(pred, target) => {
                    let g = out_grad.get(0, 0);
                    let p = &self.nodes[pred.0].value;
                    let t = &self.nodes[target.0].value;
                    let n = (p.rows() * p.cols()) as f64;
                    let dp = p.zip_map(t, |a, b| g * 2.0 * (a - b) / n).unwrap();
                    self.accumulate(pred, &dp);
                    self.accumulate(target, &dp.scale(-1.0));
                }
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, id: NodeId, delta: &Matrix) {
        let grad = self.nodes[id.0].grad.as_mut().expect("allocated in backward");
        *grad = grad.add(delta).expect("gradient shapes agree");
    }
}

fn broadcast_rows(a: &Matrix, row: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
    let mut out = Matrix::zeros(a.rows(), a.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out.set(r, c, f(a.get(r, c), row.get(0, c)));
        }
    }
    out
}

fn col_sums(a: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(1, a.cols());
    for r in 0..a.rows() {
        for c in 0..a.cols() {
            out.set(0, c, out.get(0, c) + a.get(r, c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_gradient() {
        // d(x^2)/dx at x = 3 is 6
        let mut g = Graph::new();
        let x = g.param(Matrix::from_vec(1, 1, vec![3.0]).unwrap());
        let y = g.mul(x, x).unwrap();
        g.backward(y).unwrap();
        assert_eq!(g.gradient(x).unwrap().get(0, 0), 6.0);
    }

    #[test]
    fn mse_loss_value_and_gradient() {
        let mut g = Graph::new();
        let pred = g.param(Matrix::from_vec(2, 1, vec![1.0, 3.0]).unwrap());
        let target = g.input(Matrix::zeros(2, 1));
        let loss = g.mse_loss(pred, target).unwrap();
        assert_eq!(g.scalar_value(loss).unwrap(), 5.0);
        g.backward(loss).unwrap();
        assert_eq!(g.gradient(pred).unwrap().as_slice(), &[1.0, 3.0]);
    }

    #[test]
    fn mse_loss_trivial_cases() {
        let mut g = Graph::new();
        let pred = g.param(Matrix::from_vec(2, 1, vec![1.5, -2.0]).unwrap());
        let same = g.input(Matrix::from_vec(2, 1, vec![1.5, -2.0]).unwrap());
        let zero = g.mse_loss(pred, same).unwrap();
        assert_eq!(g.scalar_value(zero).unwrap(), 0.0);

        let single = g.param(Matrix::from_vec(1, 1, vec![2.0]).unwrap());
        let t = g.input(Matrix::from_vec(1, 1, vec![5.0]).unwrap());
        let loss = g.mse_loss(single, t).unwrap();
        assert_eq!(g.scalar_value(loss).unwrap(), 9.0);

        let bad = g.input(Matrix::zeros(3, 1));
        assert!(g.mse_loss(pred, bad).is_err());
    }

    #[test]
    fn backward_rejects_non_scalar_root() {
        let mut g = Graph::new();
        let x = g.param(Matrix::zeros(2, 2));
        assert!(matches!(g.backward(x), Err(Error::NonScalarRoot { .. })));
    }

    #[test]
    fn repeated_backward_is_stable() {
        let mut g = Graph::new();
        let x = g.param(Matrix::from_vec(1, 1, vec![2.0]).unwrap());
        let y = g.mul(x, x).unwrap();
        g.backward(y).unwrap();
        let first = g.gradient(x).unwrap().clone();
        g.backward(y).unwrap();
        assert_eq!(&first, g.gradient(x).unwrap());
    }

    #[test]
    fn elu_values() {
        let mut g = Graph::new();
        let x = g.input(Matrix::from_vec(1, 3, vec![0.0, 2.5, -(2.0f64.ln())]).unwrap());
        let y = g.elu(x);
        let out = g.value(y).as_slice().to_vec();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 2.5);
        assert!((out[2] + 0.5).abs() < 1e-15);
    }
}
