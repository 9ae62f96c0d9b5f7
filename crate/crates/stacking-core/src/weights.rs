//! Closed-form minimum-risk weights for a positive-definite residual
//! second-moment matrix.

use tensor_autodiff::linalg::spd_solve;
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};

/// Minimizer of `theta' M theta` subject to `sum theta = 1`:
/// `theta = M^{-1} e / (e' M^{-1} e)` with `e` the all-ones vector.
///
/// The result always sums to one, but individual entries may be negative
/// for some positive-definite `M`; callers that need proper weights must
/// handle that gap themselves.
pub fn closed_form_weights(m: &Matrix) -> Result<Vec<f64>> {
    let k = m.rows();
    if k == 0 || m.cols() != k {
        return Err(Error::InvalidInput(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let scale = m.as_slice().iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for i in 0..k {
        for j in (i + 1)..k {
            if (m.get(i, j) - m.get(j, i)).abs() > 1e-9 * scale {
                return Err(Error::InvalidInput(format!(
                    "matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    let ones = vec![1.0; k];
    let z = spd_solve(m, &ones).ok_or(Error::NotPositiveDefinite)?;
    let denom: f64 = z.iter().sum();
    if !denom.is_finite() || denom == 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(z.iter().map(|v| v / denom).collect())
}
