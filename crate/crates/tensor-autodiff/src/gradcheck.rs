//! Gradient verification against central finite differences.
//!
//! The checker only uses forward evaluations of the function under test,
//! so it stays independent of the backward pass it validates.

use crate::matrix::Matrix;

/// Central finite-difference gradient of `f` with respect to every entry
/// of `at`, using step `h`.
pub fn central_difference(
    f: &mut dyn FnMut(&Matrix) -> f64,
    at: &Matrix,
    h: f64,
) -> Matrix {
    let mut grad = Matrix::zeros(at.rows(), at.cols());
    for r in 0..at.rows() {
        for c in 0..at.cols() {
            let mut plus = at.clone();
            plus.set(r, c, at.get(r, c) + h);
            let mut minus = at.clone();
            minus.set(r, c, at.get(r, c) - h);
            grad.set(r, c, (f(&plus) - f(&minus)) / (2.0 * h));
        }
    }
    grad
}

/// Largest relative error between an analytic gradient and its
/// finite-difference estimate. The denominator is floored at 1 so tiny
/// gradients are compared absolutely.
pub fn max_relative_error(analytic: &Matrix, numeric: &Matrix) -> f64 {
    analytic
        .as_slice()
        .iter()
        .zip(numeric.as_slice())
        .map(|(&a, &n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0, f64::max)
}
