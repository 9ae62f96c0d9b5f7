//! Closed-form constrained weights against an independent
//! projected-gradient QP oracle, and the grid-search oracle for the
//! constant-weight stacking fit.

use rand::Rng;
use stacking_core::{
    breiman_objective, closed_form_weights, fit_breiman, kfold_partition, solve_simplex_qp,
    OofMatrix,
};
use tensor_autodiff::rng::{rng_from_seed, standard_normal};
use tensor_autodiff::Matrix;

fn random_spd(k: usize, rng: &mut tensor_autodiff::SeededRng) -> Matrix {
    // B'B + delta*I is symmetric positive definite.
    let b: Vec<f64> = (0..k * k).map(|_| standard_normal(rng)).collect();
    let b = Matrix::from_vec(k, k, b).unwrap();
    let mut m = b.transpose().matmul(&b).unwrap();
    let delta = 0.05 + rng.gen::<f64>();
    for i in 0..k {
        m.set(i, i, m.get(i, i) + delta);
    }
    m
}

fn quad_form(m: &Matrix, theta: &[f64]) -> f64 {
    let k = theta.len();
    let mut out = 0.0;
    for i in 0..k {
        for j in 0..k {
            out += theta[i] * m.get(i, j) * theta[j];
        }
    }
    out
}

/// Brute-force check of the diagonal closed-form values against a grid
/// search over the simplex.
#[test]
fn diagonal_closed_form_matches_grid_search() {
    // k = 2: M = diag(1, 4)
    let m = {
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 0, 1.0);
        m.set(1, 1, 4.0);
        m
    };
    let mut best = (f64::INFINITY, 0.0);
    for step in 0..=10_000 {
        let t = step as f64 / 10_000.0;
        let obj = quad_form(&m, &[t, 1.0 - t]);
        if obj < best.0 {
            best = (obj, t);
        }
    }
    let closed = closed_form_weights(&m).unwrap();
    assert!((closed[0] - 0.8).abs() < 1e-12 && (closed[1] - 0.2).abs() < 1e-12);
    assert!((best.1 - closed[0]).abs() < 1e-3, "grid argmin {} vs closed {}", best.1, closed[0]);

    // k = 3: M = diag(1, 2, 4) -> (4/7, 2/7, 1/7)
    let m = {
        let mut m = Matrix::zeros(3, 3);
        m.set(0, 0, 1.0);
        m.set(1, 1, 2.0);
        m.set(2, 2, 4.0);
        m
    };
    let closed = closed_form_weights(&m).unwrap();
    let mut best = (f64::INFINITY, [0.0; 3]);
    let steps = 200;
    for i in 0..=steps {
        for j in 0..=(steps - i) {
            let a = i as f64 / steps as f64;
            let b = j as f64 / steps as f64;
            let theta = [a, b, 1.0 - a - b];
            let obj = quad_form(&m, &theta);
            if obj < best.0 {
                best = (obj, theta);
            }
        }
    }
    let expected = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
    for ((c, e), g) in closed.iter().zip(&expected).zip(&best.1) {
        assert!((c - e).abs() < 1e-12);
        assert!((c - g).abs() < 1e-2, "grid {g} vs closed {c}");
    }
    assert!(quad_form(&m, &closed) <= best.0 + 1e-9);
}

#[test]
fn closed_form_matches_qp_oracle_when_feasible() {
    let mut rng = rng_from_seed(2024);
    let mut feasible = 0;
    let mut infeasible = 0;
    for trial in 0..200 {
        let k = 2 + trial % 3; // k in {2, 3, 4}
        let m = random_spd(k, &mut rng);
        let closed = closed_form_weights(&m).unwrap();
        assert!((closed.iter().sum::<f64>() - 1.0).abs() < 1e-9);

        let oracle = solve_simplex_qp(&m, &vec![0.0; k], 20_000, 1e-14).unwrap();
        let oracle_obj = quad_form(&m, &oracle);

        if closed.iter().all(|&t| t >= 0.0) {
            feasible += 1;
            let closed_obj = quad_form(&m, &closed);
            assert!(
                (closed_obj - oracle_obj).abs() < 1e-6,
                "trial {trial}: closed {closed_obj} vs oracle {oracle_obj}"
            );
        } else {
            infeasible += 1;
            // The formula solved the sum-to-one problem without the
            // nonnegativity constraint; clipping it back onto the simplex
            // can only do as well as the true simplex optimum.
            let clipped = stacking_core::simplex_project(&closed);
            assert!(
                oracle_obj <= quad_form(&m, &clipped) + 1e-9,
                "trial {trial}: oracle beaten by clipped closed form"
            );
        }
    }
    assert!(feasible > 0, "no feasible trials sampled");
    assert!(infeasible > 0, "no infeasible trials sampled; gap not exercised");
}

fn oof_from_columns(cols: Vec<Vec<f64>>, seed: u64) -> OofMatrix {
    let n = cols[0].len();
    let k = cols.len();
    let mut p = Matrix::zeros(n, k);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            p.set(i, j, v);
        }
    }
    let names = (0..k).map(|j| format!("g{j}")).collect();
    let partition = kfold_partition(n, 2, seed).unwrap();
    OofMatrix::from_parts(p, names, partition).unwrap()
}

#[test]
fn breiman_single_learner_gets_unit_weight() {
    let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let oof = oof_from_columns(vec![y.clone()], 0);
    let w = fit_breiman(&oof, &y).unwrap();
    assert_eq!(w.theta.len(), 1);
    assert!((w.theta[0] - 1.0).abs() < 1e-12);
}

#[test]
fn breiman_puts_all_mass_on_an_exact_column() {
    let mut rng = rng_from_seed(5);
    let n = 60;
    let y: Vec<f64> = (0..n).map(|_| 3.0 * standard_normal(&mut rng)).collect();
    let noise: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let oof = oof_from_columns(vec![y.clone(), noise], 1);
    let w = fit_breiman(&oof, &y).unwrap();
    assert!(w.theta[0] > 0.999, "theta {:?}", w.theta);
    let obj = breiman_objective(&oof, &y, &w.theta);
    assert!(obj < 1e-6, "objective {obj}");

    // Grid-search oracle over the 1-simplex.
    let mut best = f64::INFINITY;
    for step in 0..=1000 {
        let t = step as f64 / 1000.0;
        best = best.min(breiman_objective(&oof, &y, &[t, 1.0 - t]));
    }
    assert!(obj <= best + 1e-8, "PGD {obj} vs grid {best}");
}

#[test]
fn duplicated_columns_reach_the_reduced_problem_objective() {
    let mut rng = rng_from_seed(9);
    let n = 50;
    let y: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let g1: Vec<f64> = y.iter().map(|v| v + 0.3 * standard_normal(&mut rng)).collect();
    let g2: Vec<f64> = y.iter().map(|v| 0.5 * v + standard_normal(&mut rng)).collect();

    let reduced = oof_from_columns(vec![g1.clone(), g2.clone()], 3);
    let duplicated = oof_from_columns(vec![g1.clone(), g1, g2], 3);

    let w_reduced = fit_breiman(&reduced, &y).unwrap();
    let w_dup = fit_breiman(&duplicated, &y).unwrap();
    let obj_reduced = breiman_objective(&reduced, &y, &w_reduced.theta);
    let obj_dup = breiman_objective(&duplicated, &y, &w_dup.theta);
    // The split of mass between duplicates is unidentifiable; only the
    // objective is comparable.
    assert!((obj_reduced - obj_dup).abs() < 1e-8, "{obj_reduced} vs {obj_dup}");
}

#[test]
fn breiman_objective_scales_quadratically_with_the_data() {
    let mut rng = rng_from_seed(21);
    let n = 40;
    let y: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
    let g1: Vec<f64> = y.iter().map(|v| v + 0.5 * standard_normal(&mut rng)).collect();
    let g2: Vec<f64> = y.iter().map(|v| -v + 0.5 * standard_normal(&mut rng)).collect();
    let oof = oof_from_columns(vec![g1.clone(), g2.clone()], 4);
    let w = fit_breiman(&oof, &y).unwrap();
    let obj = breiman_objective(&oof, &y, &w.theta);

    let c = 3.7;
    let scaled_y: Vec<f64> = y.iter().map(|v| c * v).collect();
    let scaled = oof_from_columns(
        vec![g1.iter().map(|v| c * v).collect(), g2.iter().map(|v| c * v).collect()],
        4,
    );
    let w_scaled = fit_breiman(&scaled, &scaled_y).unwrap();
    let obj_scaled = breiman_objective(&scaled, &scaled_y, &w_scaled.theta);
    assert!(
        (obj_scaled - c * c * obj).abs() <= 1e-6 * obj.max(1.0) * c * c,
        "{obj_scaled} vs c^2 * {obj}"
    );
}

#[test]
fn breiman_weights_stay_on_the_simplex() {
    let mut rng = rng_from_seed(33);
    for trial in 0..20 {
        let n = 30;
        let k = 2 + trial % 4;
        let y: Vec<f64> = (0..n).map(|_| standard_normal(&mut rng)).collect();
        let cols: Vec<Vec<f64>> = (0..k)
            .map(|_| y.iter().map(|v| v + standard_normal(&mut rng)).collect())
            .collect();
        let oof = oof_from_columns(cols, trial as u64);
        let w = fit_breiman(&oof, &y).unwrap();
        assert!(w.theta.iter().all(|&t| t >= -1e-12));
        assert!((w.theta.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}
