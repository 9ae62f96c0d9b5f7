//! The simplex-constrained stacking head: a network emits the entries of
//! a lower-triangular matrix L per row, and the weights are
//! `theta = A e / (e' A e)` with `A = L L' + eps * I`, which sum to one
//! by construction for any L (including L = 0, where the guard yields
//! uniform weights).

use tensor_autodiff::graph::{Graph, NodeId};
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};

pub const DEFAULT_EPSILON_PD: f64 = 1e-6;

/// Number of lower-triangular entries for k learners.
pub fn triangular_len(k: usize) -> usize {
    k * (k + 1) / 2
}

/// Position of entry (row, col), row >= col, in the row-major
/// lower-triangular layout (0,0), (1,0), (1,1), (2,0), ...
pub fn triangular_index(row: usize, col: usize) -> usize {
    debug_assert!(col <= row);
    row * (row + 1) / 2 + col
}

fn infer_k(len: usize) -> Result<usize> {
    let mut k = 0;
    while triangular_len(k) < len {
        k += 1;
    }
    if triangular_len(k) != len {
        return Err(Error::InvalidInput(format!(
            "{len} entries is not a triangular number k(k+1)/2"
        )));
    }
    Ok(k)
}

/// Weights for one entry vector. See the module docs for the formula.
pub fn cnns_head(l_entries: &[f64], epsilon_pd: f64) -> Result<Vec<f64>> {
    let k = infer_k(l_entries.len())?;
    if k == 0 {
        return Err(Error::InvalidInput("empty entry vector".into()));
    }
    // u = L' e (column sums of L), v = L u, den = ||u||^2 + eps*k.
    let mut u = vec![0.0; k];
    for row in 0..k {
        for col in 0..=row {
            u[col] += l_entries[triangular_index(row, col)];
        }
    }
    let mut v = vec![0.0; k];
    for row in 0..k {
        for col in 0..=row {
            v[row] += l_entries[triangular_index(row, col)] * u[col];
        }
    }
    let den: f64 = u.iter().map(|x| x * x).sum::<f64>() + epsilon_pd * k as f64;
    Ok(v.iter().map(|x| (x + epsilon_pd) / den).collect())
}

/// Differentiable head over a batch: `l` is an n x k(k+1)/2 node and the
/// result is the n x k weight matrix, one simplex point per row. Built
/// from primitive graph ops so gradients reach every L entry.
pub fn cnns_head_graph(g: &mut Graph, l: NodeId, k: usize, epsilon_pd: f64) -> Result<NodeId> {
    let m = triangular_len(k);
    let cols = g.value(l).cols();
    if cols != m {
        return Err(Error::InvalidInput(format!(
            "head input has {cols} columns, expected k(k+1)/2 = {m} for k = {k}"
        )));
    }
    // Selector matrices: s_col maps entries to their column index, s_row
    // to their row index.
    let mut s_col = Matrix::zeros(m, k);
    let mut s_row = Matrix::zeros(m, k);
    for row in 0..k {
        for col in 0..=row {
            let idx = triangular_index(row, col);
            s_col.set(idx, col, 1.0);
            s_row.set(idx, row, 1.0);
        }
    }
    let s_col_t = s_col.transpose();

    let s_col = g.input(s_col);
    let s_col_t = g.input(s_col_t);
    let s_row = g.input(s_row);

    let u = g.matmul(l, s_col)?; // n x k, column sums of L
    let u_rep = g.matmul(u, s_col_t)?; // n x m, u broadcast to entry slots
    let lu = g.mul(l, u_rep)?; // entries l_ab * u_b
    let v = g.matmul(lu, s_row)?; // n x k, (L u)_a
    let num = g.add_scalar(v, epsilon_pd);
    let u_sq = g.mul(u, u)?;
    let norm = g.row_sum(u_sq);
    let den = g.add_scalar(norm, epsilon_pd * k as f64); // n x 1
    Ok(g.div_colvec(num, den)?)
}
