//! Small dense linear-algebra kernels: Cholesky factorization and
//! symmetric positive-definite solves.

use crate::matrix::Matrix;

/// Lower-triangular Cholesky factor of a symmetric matrix, or `None`
/// when a pivot is not strictly positive (matrix not positive definite).
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    if n != a.cols() {
        return None;
    }
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if !(sum > 0.0) || !sum.is_finite() {
                    return None;
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Some(l)
}

/// Solves L L' x = b given the lower-triangular factor `l`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    debug_assert_eq!(b.len(), n);
    // forward: L y = b
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    // backward: L' x = y
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l.get(k, i) * x[k];
        }
        x[i] = sum / l.get(i, i);
    }
    x
}

/// Solves A x = b for symmetric positive-definite A; `None` if the
/// Cholesky factorization fails.
pub fn spd_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    cholesky(a).map(|l| cholesky_solve(&l, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_matches_reconstruction() {
        let a = Matrix::from_vec(3, 3, vec![4.0, 2.0, 2.0, 2.0, 5.0, 3.0, 2.0, 3.0, 6.0]).unwrap();
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        for (x, y) in a.as_slice().iter().zip(back.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_recovers_known_solution() {
        let a = Matrix::from_vec(2, 2, vec![4.0, 1.0, 1.0, 3.0]).unwrap();
        let x_true = [2.0, -1.0];
        let b = [4.0 * 2.0 - 1.0, 2.0 - 3.0];
        let x = spd_solve(&a, &b).unwrap();
        for (got, want) in x.iter().zip(&x_true) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = Matrix::from_vec(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(cholesky(&a).is_none());
        let b = Matrix::from_vec(2, 2, vec![0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(cholesky(&b).is_none());
    }
}
