//! Synthetic benchmark generator: a one-dimensional target whose linear
//! and quadratic fits dominate in different regions, so feature-varying
//! stacking weights have something to gain over constant ones.

use rand::Rng;
use base_learners::Dataset;
use tensor_autodiff::rng::{rng_from_seed, standard_normal};
use tensor_autodiff::Matrix;

use crate::error::{Error, Result};

pub const DEFAULT_NOISE_SD: f64 = 2.0;

/// `y = 0.6 x + 0.3 x^2 + x sin(x) + noise` with `x` uniform on
/// `[-7.5, 7.5]`. Emits feature columns `x` and `x2` (the squared value)
/// so linear learners on either basis can be configured directly.
pub fn generate(n: usize, seed: u64, noise_sd: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("synthetic dataset needs at least one row".into()));
    }
    if noise_sd < 0.0 {
        return Err(Error::Config(format!("noise must be nonnegative, got {noise_sd}")));
    }
    let mut rng = rng_from_seed(seed);
    let mut features = Vec::with_capacity(n * 2);
    let mut target = Vec::with_capacity(n);
    for _ in 0..n {
        let x: f64 = rng.gen_range(-7.5..7.5);
        let y = 0.6 * x + 0.3 * x * x + x * x.sin() + noise_sd * standard_normal(&mut rng);
        features.push(x);
        features.push(x * x);
        target.push(y);
    }
    let features = Matrix::from_vec(n, 2, features).map_err(|e| Error::stage("synth", e))?;
    Dataset::new(features, target, vec!["x".into(), "x2".into()])
        .map_err(|e| Error::stage("synth", e))
}

/// Writes the generated dataset as CSV with columns `x,x2,y`.
pub fn write_synth_csv(
    path: impl AsRef<std::path::Path>,
    n: usize,
    seed: u64,
    noise_sd: f64,
) -> Result<()> {
    let data = generate(n, seed, noise_sd)?;
    crate::csv::write_csv(
        path,
        &["x", "x2", "y"],
        (0..data.n_rows()).map(|i| {
            vec![
                format!("{}", data.features().get(i, 0)),
                format!("{}", data.features().get(i, 1)),
                format!("{}", data.target()[i]),
            ]
        }),
    )
}
