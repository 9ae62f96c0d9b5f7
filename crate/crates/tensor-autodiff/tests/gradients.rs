//! Finite-difference verification of the backward pass, op by op and
//! through full networks.

use tensor_autodiff::gradcheck::{central_difference, max_relative_error};
use tensor_autodiff::graph::{Graph, NodeId};
use tensor_autodiff::rng::{rng_from_seed, standard_normal};
use tensor_autodiff::{Matrix, Mlp};

const H: f64 = 1e-6;
const TOL: f64 = 1e-4;

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = rng_from_seed(seed);
    let data = (0..rows * cols).map(|_| standard_normal(&mut rng)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

/// Positive random matrix bounded away from zero, for ops that divide or
/// take square roots.
fn random_positive(rows: usize, cols: usize, seed: u64) -> Matrix {
    random_matrix(rows, cols, seed).map(|v| v.abs() + 0.5)
}

/// Reduces an arbitrary node to a scalar through a fixed random weighting
/// so every entry of the probed gradient is exercised distinctly.
fn scalarize(g: &mut Graph, y: NodeId, seed: u64) -> NodeId {
    let (rows, cols) = g.value(y).shape();
    let w = g.input(random_matrix(rows, cols, seed ^ 0xabcd));
    let weighted = g.mul(y, w).unwrap();
    let rs = g.row_sum(weighted);
    let zeros = g.input(Matrix::zeros(rows, 1));
    g.mse_loss(rs, zeros).unwrap()
}

/// Checks d(scalarize(op(x, fixed...)))/dx against central differences.
fn check_unary(name: &str, seed: u64, at: &Matrix, build: &dyn Fn(&mut Graph, NodeId) -> NodeId) {
    let run = |x: &Matrix| -> (f64, Option<Matrix>) {
        let mut g = Graph::new();
        let xid = g.param(x.clone());
        let y = build(&mut g, xid);
        let loss = scalarize(&mut g, y, seed);
        let value = g.scalar_value(loss).unwrap();
        g.backward(loss).unwrap();
        (value, Some(g.gradient(xid).unwrap().clone()))
    };
    let (_, analytic) = run(at);
    let mut f = |x: &Matrix| run(x).0;
    let numeric = central_difference(&mut f, at, H);
    let err = max_relative_error(&analytic.unwrap(), &numeric);
    assert!(err < TOL, "{name} (seed {seed}): relative error {err}");
}

#[test]
fn elementwise_and_broadcast_ops_match_finite_differences() {
    for seed in 0..5u64 {
        let a = random_matrix(3, 4, seed);
        let b = random_matrix(3, 4, seed + 100);
        let row = random_positive(1, 4, seed + 200);
        let col = random_positive(3, 1, seed + 300);

        check_unary("add", seed, &a, &|g, x| {
            let other = g.input(random_matrix(3, 4, seed + 100));
            g.add(x, other).unwrap()
        });
        check_unary("add_rhs", seed, &b, &|g, x| {
            let other = g.input(random_matrix(3, 4, seed));
            g.add(other, x).unwrap()
        });
        check_unary("sub", seed, &a, &|g, x| {
            let other = g.input(random_matrix(3, 4, seed + 100));
            g.sub(x, other).unwrap()
        });
        check_unary("sub_rhs", seed, &b, &|g, x| {
            let other = g.input(random_matrix(3, 4, seed));
            g.sub(other, x).unwrap()
        });
        check_unary("mul", seed, &a, &|g, x| {
            let other = g.input(random_matrix(3, 4, seed + 100));
            g.mul(x, other).unwrap()
        });
        check_unary("mul_same_node", seed, &a, &|g, x| g.mul(x, x).unwrap());
        check_unary("add_row", seed, &a, &|g, x| {
            let r = g.input(random_matrix(1, 4, seed + 200));
            g.add_row(x, r).unwrap()
        });
        check_unary("add_row_rhs", seed, &row, &|g, r| {
            let x = g.input(random_matrix(3, 4, seed));
            g.add_row(x, r).unwrap()
        });
        check_unary("sub_row_rhs", seed, &row, &|g, r| {
            let x = g.input(random_matrix(3, 4, seed));
            g.sub_row(x, r).unwrap()
        });
        check_unary("mul_row", seed, &a, &|g, x| {
            let r = g.input(random_positive(1, 4, seed + 200));
            g.mul_row(x, r).unwrap()
        });
        check_unary("mul_row_rhs", seed, &row, &|g, r| {
            let x = g.input(random_matrix(3, 4, seed));
            g.mul_row(x, r).unwrap()
        });
        check_unary("div_row", seed, &a, &|g, x| {
            let r = g.input(random_positive(1, 4, seed + 200));
            g.div_row(x, r).unwrap()
        });
        check_unary("div_row_rhs", seed, &row, &|g, r| {
            let x = g.input(random_matrix(3, 4, seed));
            g.div_row(x, r).unwrap()
        });
        check_unary("div_colvec", seed, &a, &|g, x| {
            let c = g.input(random_positive(3, 1, seed + 300));
            g.div_colvec(x, c).unwrap()
        });
        check_unary("div_colvec_rhs", seed, &col, &|g, c| {
            let x = g.input(random_matrix(3, 4, seed));
            g.div_colvec(x, c).unwrap()
        });
    }
}

#[test]
fn structural_ops_match_finite_differences() {
    for seed in 0..5u64 {
        let a = random_matrix(3, 4, seed);
        let b = random_matrix(4, 2, seed + 100);
        let pos = random_positive(3, 4, seed + 400);

        check_unary("matmul_lhs", seed, &a, &|g, x| {
            let other = g.input(random_matrix(4, 2, seed + 100));
            g.matmul(x, other).unwrap()
        });
        check_unary("matmul_rhs", seed, &b, &|g, x| {
            let other = g.input(random_matrix(3, 4, seed));
            g.matmul(other, x).unwrap()
        });
        check_unary("row_sum", seed, &a, &|g, x| g.row_sum(x));
        check_unary("col_mean", seed, &a, &|g, x| g.col_mean(x));
        check_unary("scale", seed, &a, &|g, x| g.scale(x, -1.7));
        check_unary("add_scalar", seed, &a, &|g, x| g.add_scalar(x, 2.3));
        check_unary("elu", seed, &a, &|g, x| g.elu(x));
        check_unary("sqrt", seed, &pos, &|g, x| g.sqrt(x));
        check_unary("slice_cols", seed, &a, &|g, x| g.slice_cols(x, 1, 2).unwrap());
        check_unary("mse_pred", seed, &a, &|g, x| {
            let t = g.input(random_matrix(3, 4, seed + 500));
            g.mse_loss(x, t).unwrap()
        });
        check_unary("mse_target", seed, &a, &|g, x| {
            let p = g.input(random_matrix(3, 4, seed + 500));
            g.mse_loss(p, x).unwrap()
        });
    }
}

/// Full network (batch norm, ELU, dropout) trained-mode gradients for
/// every parameter matrix match finite differences. A fixed rng seed per
/// forward keeps the dropout masks identical across evaluations.
#[test]
fn composite_network_gradients_match_finite_differences() {
    let inputs = random_matrix(6, 3, 42);
    let targets = random_matrix(6, 1, 43);
    let mut rng = rng_from_seed(7);
    let mut mlp = Mlp::new(3, 2, 4, 1, 0.5, &mut rng).unwrap();

    let eval = |mlp: &Mlp| -> (f64, Vec<Matrix>) {
        let mut mlp = mlp.clone();
        let mut g = Graph::new();
        let x = g.input(inputs.clone());
        let t = g.input(targets.clone());
        let mut mask_rng = rng_from_seed(99);
        let fp = mlp.forward_train(&mut g, x, &mut mask_rng).unwrap();
        let loss = g.mse_loss(fp.output, t).unwrap();
        let value = g.scalar_value(loss).unwrap();
        g.backward(loss).unwrap();
        let grads = fp.params.iter().map(|&id| g.gradient(id).unwrap().clone()).collect();
        (value, grads)
    };

    let (_, analytic) = eval(&mlp);
    let n_params = analytic.len();
    for i in 0..n_params {
        let at = mlp.params_mut()[i].clone();
        let mut f = |p: &Matrix| {
            let mut probe = mlp.clone();
            *probe.params_mut()[i] = p.clone();
            let mut g = Graph::new();
            let x = g.input(inputs.clone());
            let t = g.input(targets.clone());
            let mut mask_rng = rng_from_seed(99);
            let fp = probe.forward_train(&mut g, x, &mut mask_rng).unwrap();
            let loss = g.mse_loss(fp.output, t).unwrap();
            g.scalar_value(loss).unwrap()
        };
        let numeric = central_difference(&mut f, &at, H);
        let err = max_relative_error(&analytic[i], &numeric);
        assert!(err < TOL, "param {i}: relative error {err}");
    }
}
