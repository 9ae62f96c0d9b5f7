//! End-to-end experiment: random train/test split, out-of-fold matrix on
//! the training part, every configured stacker (with the architecture
//! sweep for the networks), evaluation on the held-out test rows, and
//! artifact emission.
//!
//! Wall-clock fit times are measured and reported on stdout and in
//! `timings.csv`; every other artifact is a pure function of
//! (dataset bytes, config, seed), so reruns are byte-identical.

use std::path::PathBuf;
use std::time::Instant;

use rand::seq::SliceRandom;

use base_learners::{Dataset, FittedLearner};
use evaluation::{
    error_correlation, mae_with_se, mse_with_se, negative_fraction, redundancy_flags,
    weight_summary, EvalReport, LearnerWeightSummary, ModelMetrics, ModelWeightSummary,
};
use stacking_core::{
    build_oof_matrix, fit_breiman, predict_stacked, train_baseline_nn, train_cnns, train_unns,
    BaselineKind, MetaLearner, OofMatrix, StackedModel,
};
use tensor_autodiff::rng::{rng_from_seed, seed_mix};
use tensor_autodiff::TrainConfig;

use crate::config::{ExperimentConfig, StackerKind};
use crate::csv::load_csv;
use crate::error::{Error, Result};
use crate::persist::{save_model, PersistedModel, FORMAT_VERSION};
use crate::report_io::{emit_report, render_table, ReportFormat};

const SPLIT_TAG: u64 = 0x5917;
const OOF_TAG: u64 = 0x00f5;
const FULL_FIT_SALT: u64 = 0xf177;
const STACKER_TAG: u64 = 0x57ac;

pub struct RunArtifacts {
    /// The evaluation report including measured fit times.
    pub report: EvalReport,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// The exact (train, test) row split `run_experiment` will use for a
/// dataset with `n_rows` rows under this config.
pub fn split_for_config(config: &ExperimentConfig, n_rows: usize) -> (Vec<usize>, Vec<usize>) {
    train_test_split(n_rows, config.test_fraction, seed_mix(config.seed, SPLIT_TAG))
}

/// Deterministic shuffled split into (train, test) row indices, both
/// ascending.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_from_seed(seed));
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n.saturating_sub(2));
    let mut test: Vec<usize> = order[..n_test].to_vec();
    let mut train: Vec<usize> = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    (train, test)
}

fn layers_label(layers: usize) -> String {
    if layers == 1 {
        "1 layer".into()
    } else {
        format!("{layers} layers")
    }
}

fn train_config(config: &ExperimentConfig, hidden_layers: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        hidden_layers,
        hidden_size: config.hidden_size,
        batch_size: config.batch_size,
        patience: config.patience,
        val_fraction: config.val_fraction,
        max_epochs: config.max_epochs,
        seed,
        learning_rate: config.learning_rate,
        ..TrainConfig::default()
    }
}

struct FittedStacker {
    key: &'static str,
    display: String,
    model: StackedModel,
    fit_secs: f64,
}

/// Trains one stacker, sweeping the architecture list for the network
/// variants and selecting the depth with the lowest validation MSE.
fn fit_stacker(
    kind: StackerKind,
    oof: &OofMatrix,
    train: &Dataset,
    base: &[FittedLearner],
    config: &ExperimentConfig,
) -> Result<FittedStacker> {
    let start = Instant::now();
    let stacker_seed = seed_mix(config.seed, STACKER_TAG ^ kind.key().len() as u64 ^ hash_key(kind.key()));
    let (display, model) = match kind {
        StackerKind::Breiman => {
            let weights =
                fit_breiman(oof, train.target()).map_err(|e| Error::stage("stacking", e))?;
            let model = StackedModel::new(MetaLearner::Constant(weights), base.to_vec())
                .map_err(|e| Error::stage("stacking", e))?;
            ("breiman".to_string(), model)
        }
        StackerKind::Unns | StackerKind::UnnsPhi | StackerKind::Cnns | StackerKind::CnnsPhi => {
            let with_phi = matches!(kind, StackerKind::UnnsPhi | StackerKind::CnnsPhi);
            let constrained = matches!(kind, StackerKind::Cnns | StackerKind::CnnsPhi);
            let mut best: Option<(f64, usize, stacking_core::StackNet)> = None;
            for &layers in &config.architecture_sweep {
                let tc = train_config(config, layers, seed_mix(stacker_seed, layers as u64));
                let net = if constrained {
                    train_cnns(oof, train, &tc, with_phi)
                } else {
                    train_unns(oof, train, &tc, with_phi)
                }
                .map_err(|e| Error::stage("stacking", e))?;
                let val = net.history.best_val_loss;
                if best.as_ref().map_or(true, |(b, _, _)| val < *b) {
                    best = Some((val, layers, net));
                }
            }
            let (_, layers, mut net) = best.expect("architecture sweep is non-empty");
            if constrained {
                net.clip_negative = config.cnns_clip_negative;
            }
            let model = StackedModel::new(MetaLearner::Net(net), base.to_vec())
                .map_err(|e| Error::stage("stacking", e))?;
            (format!("{} ({})", kind.key(), layers_label(layers)), model)
        }
        StackerKind::MetaNn | StackerKind::DirectNn => {
            let (inputs, baseline_kind, base_models) = match kind {
                StackerKind::MetaNn => {
                    (oof.matrix().clone(), BaselineKind::MetaRegression, base.to_vec())
                }
                _ => (train.features().clone(), BaselineKind::Direct, Vec::new()),
            };
            let mut best: Option<(f64, usize, stacking_core::BaselineNet)> = None;
            for &layers in &config.architecture_sweep {
                let tc = train_config(config, layers, seed_mix(stacker_seed, layers as u64));
                let net = train_baseline_nn(&inputs, train.target(), &tc, baseline_kind)
                    .map_err(|e| Error::stage("stacking", e))?;
                let val = net.history.best_val_loss;
                if best.as_ref().map_or(true, |(b, _, _)| val < *b) {
                    best = Some((val, layers, net));
                }
            }
            let (_, layers, net) = best.expect("architecture sweep is non-empty");
            let model = StackedModel::new(MetaLearner::Baseline(net), base_models)
                .map_err(|e| Error::stage("stacking", e))?;
            (format!("{} ({})", kind.key(), layers_label(layers)), model)
        }
    };
    Ok(FittedStacker {
        key: kind.key(),
        display,
        model,
        fit_secs: start.elapsed().as_secs_f64(),
    })
}

fn hash_key(key: &str) -> u64 {
    // FNV-1a; stable across runs and platforms.
    let mut h: u64 = 0xcbf29ce484222325;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Runs the full experiment and writes all artifacts under
/// `config.output_dir`. Partial artifacts are removed on failure.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunArtifacts> {
    config.validate()?;
    let data = load_csv(&config.data_path, &config.target_column)?;
    if data.n_rows() < 8 {
        return Err(Error::Config(format!(
            "need at least 8 rows for a split plus folds, got {}",
            data.n_rows()
        )));
    }

    let (train_idx, test_idx) =
        train_test_split(data.n_rows(), config.test_fraction, seed_mix(config.seed, SPLIT_TAG));
    let train = data.subset_rows(&train_idx);
    let test = data.subset_rows(&test_idx);

    let oof = build_oof_matrix(
        &config.learners,
        &train,
        config.oof_folds,
        seed_mix(config.seed, OOF_TAG),
    )
    .map_err(|e| Error::stage("oof", e))?;

    // Base models refitted on the whole training part, with fit times.
    let mut base_models = Vec::with_capacity(config.learners.len());
    let mut base_times = Vec::with_capacity(config.learners.len());
    for spec in &config.learners {
        let start = Instant::now();
        let fitted = spec
            .fit(&train, seed_mix(config.seed, FULL_FIT_SALT))
            .map_err(|e| Error::stage("base-fit", e))?;
        base_times.push(start.elapsed().as_secs_f64());
        base_models.push(fitted);
    }

    let mut models = Vec::new();
    let mut weight_summaries = Vec::new();
    let mut persisted = Vec::new();

    for &kind in &config.stackers {
        let fitted = fit_stacker(kind, &oof, &train, &base_models, config)?;
        let prediction = predict_stacked(&fitted.model, test.features())
            .map_err(|e| Error::stage("predict", e))?;
        let mse = mse_with_se(test.target(), &prediction.predictions)
            .map_err(|e| Error::stage("evaluate", e))?;
        let mae = mae_with_se(test.target(), &prediction.predictions)
            .map_err(|e| Error::stage("evaluate", e))?;
        models.push(ModelMetrics {
            model: fitted.display.clone(),
            mse,
            mae,
            fit_time_secs: Some(fitted.fit_secs),
        });
        if let Some(weights) = &prediction.weights {
            let quantiles = weight_summary(weights).map_err(|e| Error::stage("evaluate", e))?;
            weight_summaries.push(ModelWeightSummary {
                model: fitted.display.clone(),
                learners: oof
                    .learner_names()
                    .iter()
                    .zip(quantiles)
                    .map(|(learner, quantiles)| LearnerWeightSummary {
                        learner: learner.clone(),
                        quantiles,
                    })
                    .collect(),
                negative_fraction: negative_fraction(weights),
            });
        }
        persisted.push((
            fitted.key.to_string(),
            PersistedModel {
                format_version: FORMAT_VERSION,
                name: fitted.display.clone(),
                seed: config.seed,
                feature_columns: data.column_names().to_vec(),
                target_column: config.target_column.clone(),
                config_snapshot: serde_json::to_value(config)
                    .map_err(|e| Error::stage("persist", e))?,
                model: fitted.model,
            },
        ));
    }

    // Base estimators evaluated on the same test rows.
    for (spec, (fitted, secs)) in
        config.learners.iter().zip(base_models.iter().zip(&base_times))
    {
        let preds = fitted.predict(test.features()).map_err(|e| Error::stage("predict", e))?;
        let mse = mse_with_se(test.target(), &preds).map_err(|e| Error::stage("evaluate", e))?;
        let mae = mae_with_se(test.target(), &preds).map_err(|e| Error::stage("evaluate", e))?;
        models.push(ModelMetrics {
            model: spec.name.clone(),
            mse,
            mae,
            fit_time_secs: Some(*secs),
        });
    }

    let correlation =
        error_correlation(&oof, train.target()).map_err(|e| Error::stage("evaluate", e))?;
    let redundancy = redundancy_flags(&correlation, config.redundancy_threshold);

    let report = EvalReport {
        models,
        error_correlation: correlation,
        weight_summaries,
        redundancy_pairs: redundancy,
    };

    let files = write_artifacts(config, &report, &persisted)?;
    print!("{}", render_table(&report));
    Ok(RunArtifacts { report, out_dir: config.output_dir.clone(), files })
}

fn write_artifacts(
    config: &ExperimentConfig,
    report: &EvalReport,
    persisted: &[(String, PersistedModel)],
) -> Result<Vec<PathBuf>> {
    let out_dir = &config.output_dir;
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<()> {
        std::fs::create_dir_all(out_dir.join("models"))?;

        // Deterministic artifacts carry no wall-clock values.
        let stable = report.without_timings();
        let metrics_json = out_dir.join("metrics.json");
        std::fs::write(
            &metrics_json,
            serde_json::to_string_pretty(&stable).map_err(|e| Error::stage("report", e))?,
        )?;
        written.push(metrics_json);

        written.extend(emit_report(&stable, ReportFormat::Table, out_dir)?);
        written.extend(emit_report(&stable, ReportFormat::Delimited, out_dir)?);

        for (key, model) in persisted {
            let path = out_dir.join("models").join(format!("{key}.json"));
            save_model(model, &path)?;
            written.push(path);
        }

        // Wall-clock timings live in their own artifact; it is the one
        // file that legitimately differs between reruns.
        let timings = out_dir.join("timings.csv");
        let mut text = String::from("model,fit_time_secs\n");
        for m in &report.models {
            if let Some(secs) = m.fit_time_secs {
                text.push_str(&format!("{},{secs:.3}\n", m.model));
            }
        }
        std::fs::write(&timings, text)?;
        written.push(timings);
        Ok(())
    })();

    match result {
        Ok(()) => Ok(written),
        Err(e) => {
            for path in &written {
                std::fs::remove_file(path).ok();
            }
            Err(e)
        }
    }
}
