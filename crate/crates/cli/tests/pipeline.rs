//! Integration tests for the experiment pipeline: persistence
//! round-trips, version handling, report rendering and the isolation of
//! the test split from training.

use std::path::{Path, PathBuf};

use cli::{
    generate, load_model, run_experiment, save_model, split_for_config, write_synth_csv,
    ExperimentConfig, ReportFormat,
};
use stacking_core::predict_stacked;
use tensor_autodiff::rng::{rng_from_seed, standard_normal};
use tensor_autodiff::Matrix;

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("stack_pipe_{tag}_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        TempDir(dir)
    }
    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn small_config_text(data: &Path, out: &Path) -> String {
    format!(
        "data = {}\ntarget = y\ntest_fraction = 0.25\nfolds = 5\nseed = 3\n\
         stackers = unns_phi, cnns, breiman\narchitectures = 1\n\
         hidden_size = 12\nbatch_size = 64\npatience = 4\nmax_epochs = 15\n\
         learners = lin_x, lin_x2\nlin_x.kind = ols\nlin_x.columns = x\n\
         lin_x2.kind = ols\nlin_x2.columns = x2\noutput_dir = {}\n",
        data.display(),
        out.display()
    )
}

fn run_small(dir: &TempDir) -> (ExperimentConfig, cli::RunArtifacts) {
    let data_path = dir.path().join("data.csv");
    write_synth_csv(&data_path, 300, 5, 2.0).unwrap();
    let config =
        ExperimentConfig::from_str(&small_config_text(&data_path, &dir.path().join("out")))
            .unwrap();
    let artifacts = run_experiment(&config).unwrap();
    (config, artifacts)
}

#[test]
fn saved_models_reproduce_predictions_bit_exactly() {
    let dir = TempDir::new("roundtrip");
    let (_, artifacts) = run_small(&dir);

    // 100 fresh random rows.
    let mut rng = rng_from_seed(77);
    let rows: Vec<f64> = (0..100)
        .flat_map(|_| {
            let x = 7.5 * standard_normal(&mut rng);
            [x, x * x]
        })
        .collect();
    let fresh = Matrix::from_vec(100, 2, rows).unwrap();

    for key in ["unns_phi", "cnns", "breiman"] {
        let path = artifacts.out_dir.join("models").join(format!("{key}.json"));
        let loaded = load_model(&path).unwrap();
        let direct = predict_stacked(&loaded.model, &fresh).unwrap();

        // Save again, load again: predictions must be identical bits.
        let copy = dir.path().join(format!("{key}_copy.json"));
        save_model(&loaded, &copy).unwrap();
        let reloaded = load_model(&copy).unwrap();
        let roundtrip = predict_stacked(&reloaded.model, &fresh).unwrap();
        assert_eq!(direct.predictions, roundtrip.predictions, "{key} round trip drifted");
    }
}

#[test]
fn truncated_and_version_bumped_model_files_fail_loudly() {
    let dir = TempDir::new("versions");
    let (_, artifacts) = run_small(&dir);
    let path = artifacts.out_dir.join("models").join("breiman.json");

    let text = std::fs::read_to_string(&path).unwrap();
    let truncated_path = dir.path().join("truncated.json");
    std::fs::write(&truncated_path, &text[..text.len() / 2]).unwrap();
    assert!(matches!(load_model(&truncated_path), Err(cli::Error::CorruptModel(_))));

    let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
    let bumped_path = dir.path().join("bumped.json");
    std::fs::write(&bumped_path, bumped).unwrap();
    match load_model(&bumped_path) {
        Err(cli::Error::UnsupportedVersion { found, supported }) => {
            assert_eq!((found, supported), (2, 1));
        }
        other => panic!("expected UnsupportedVersion, got {other:?}"),
    }
}

/// Replacing the held-out test targets with noise must not change any
/// trained model: the test rows never participate in training.
#[test]
fn test_rows_never_influence_training() {
    let dir = TempDir::new("isolation");
    let data_path = dir.path().join("data.csv");
    let n = 300;
    write_synth_csv(&data_path, n, 5, 2.0).unwrap();
    let config =
        ExperimentConfig::from_str(&small_config_text(&data_path, &dir.path().join("out_a")))
            .unwrap();

    let (_, test_idx) = split_for_config(&config, n);

    // Rewrite the CSV with garbage targets on the test rows.
    let original = generate(n, 5, 2.0).unwrap();
    let mut rng = rng_from_seed(123);
    let mut lines = vec!["x,x2,y".to_string()];
    for i in 0..n {
        let y = if test_idx.contains(&i) {
            1e3 * standard_normal(&mut rng)
        } else {
            original.target()[i]
        };
        lines.push(format!(
            "{},{},{y}",
            original.features().get(i, 0),
            original.features().get(i, 1)
        ));
    }
    let noised_path = dir.path().join("noised.csv");
    std::fs::write(&noised_path, lines.join("\n")).unwrap();

    let mut noised_config = config.clone();
    noised_config.data_path = noised_path;
    noised_config.output_dir = dir.path().join("out_b");

    let a = run_experiment(&config).unwrap();
    let b = run_experiment(&noised_config).unwrap();

    for key in ["unns_phi", "cnns", "breiman"] {
        let file = format!("{key}.json");
        let bytes_a = std::fs::read(a.out_dir.join("models").join(&file)).unwrap();
        let raw_a = String::from_utf8(bytes_a).unwrap();
        let raw_b =
            String::from_utf8(std::fs::read(b.out_dir.join("models").join(&file)).unwrap())
                .unwrap();
        // The persisted config snapshot echoes the data path, which
        // differs by construction; every model byte must not.
        let strip = |s: &str| -> String {
            s.lines().filter(|l| !l.contains("data_path") && !l.contains("output_dir")).collect()
        };
        assert_eq!(strip(&raw_a), strip(&raw_b), "{key} changed when test targets changed");
    }
}

#[test]
fn report_formats_share_their_numbers() {
    let dir = TempDir::new("formats");
    let (_, artifacts) = run_small(&dir);
    let stable = artifacts.report.without_timings();

    let table_dir = dir.path().join("table");
    let delim_dir = dir.path().join("delim");
    cli::emit_report(&stable, ReportFormat::Table, &table_dir).unwrap();
    cli::emit_report(&stable, ReportFormat::Delimited, &delim_dir).unwrap();

    let table = std::fs::read_to_string(table_dir.join("report.txt")).unwrap();
    let metrics = std::fs::read_to_string(delim_dir.join("metrics.csv")).unwrap();

    // One accuracy row per model in both renderings.
    let expected_rows = stable.models.len();
    assert_eq!(metrics.lines().count(), expected_rows + 1, "csv header plus one row per model");
    for model in &stable.models {
        assert!(table.contains(&model.model), "table misses {}", model.model);
        let csv_row = metrics
            .lines()
            .find(|l| l.starts_with(&model.model))
            .unwrap_or_else(|| panic!("csv misses {}", model.model));
        // The same formatted numbers appear in both outputs.
        let mse = format!("{:.6}", model.mse.value);
        assert!(table.contains(&mse) && csv_row.contains(&mse), "mse mismatch for {}", model.model);
        let mae = format!("{:.6}", model.mae.value);
        assert!(table.contains(&mae) && csv_row.contains(&mae), "mae mismatch for {}", model.model);
    }

    // Correlation diagonal prints as 1.00.
    let corr = std::fs::read_to_string(delim_dir.join("correlation.csv")).unwrap();
    let mut lines = corr.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "learner,lin_x,lin_x2");
    let first = lines.next().unwrap();
    assert!(first.starts_with("lin_x,1.00"), "diagonal should print 1.00: {first}");
}
