use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cli::{
    emit_report, load_features_csv, load_model, run_experiment, write_csv, write_synth_csv,
    ExperimentConfig, ReportFormat, DEFAULT_NOISE_SD,
};
use stacking_core::predict_stacked;

#[derive(Parser)]
#[command(
    name = "nnstack",
    about = "Feature-dependent linear stacking of regression models",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment from a config file.
    Fit {
        /// Flat key-value config file.
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Predict with a saved model on new data.
    Predict {
        /// Persisted model file (models/<stacker>.json from a fit run).
        #[arg(long)]
        model: PathBuf,
        /// CSV with the model's feature columns (extra columns ignored).
        #[arg(long)]
        data: PathBuf,
        /// Output CSV of predictions (plus weights when available).
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render a saved metrics.json report.
    Report {
        /// metrics.json produced by a fit run.
        #[arg(long)]
        metrics: PathBuf,
        /// Output format: table or delimited.
        #[arg(long, default_value = "table")]
        format: String,
        /// Directory for the rendered files (default: print table to stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the synthetic benchmark dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gaussian noise standard deviation.
        #[arg(long, default_value_t = DEFAULT_NOISE_SD)]
        noise: f64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Fit { config, seed, out } => {
            let mut config = ExperimentConfig::from_file(&config)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(out) = out {
                config.output_dir = out;
            }
            let artifacts = run_experiment(&config)?;
            eprintln!("artifacts written to {}", artifacts.out_dir.display());
            Ok(())
        }
        Command::Predict { model, data, out } => {
            let persisted = load_model(&model)?;
            let features = load_features_csv(&data, &persisted.feature_columns)?;
            let prediction = predict_stacked(&persisted.model, &features)?;

            let mut header: Vec<String> = vec!["prediction".into()];
            if let Some(weights) = &prediction.weights {
                for j in 0..weights.cols() {
                    let name = persisted
                        .model
                        .base
                        .get(j)
                        .map_or_else(|| format!("{j}"), |l| l.spec.name.clone());
                    header.push(format!("weight_{name}"));
                }
            }
            if prediction.phi.is_some() {
                header.push("phi".into());
            }
            let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
            write_csv(
                &out,
                &header_refs,
                (0..features.rows()).map(|i| {
                    let mut row = vec![format!("{}", prediction.predictions[i])];
                    if let Some(weights) = &prediction.weights {
                        for j in 0..weights.cols() {
                            row.push(format!("{}", weights.get(i, j)));
                        }
                    }
                    if let Some(phi) = &prediction.phi {
                        row.push(format!("{}", phi[i]));
                    }
                    row
                }),
            )?;
            eprintln!("{} predictions written to {}", features.rows(), out.display());
            Ok(())
        }
        Command::Report { metrics, format, out } => {
            let text = std::fs::read_to_string(&metrics)?;
            let report: evaluation::EvalReport = serde_json::from_str(&text)?;
            let format = ReportFormat::parse(&format)
                .ok_or_else(|| format!("unknown format {format:?} (table or delimited)"))?;
            match out {
                Some(dir) => {
                    let files = emit_report(&report, format, &dir)?;
                    for f in files {
                        eprintln!("wrote {}", f.display());
                    }
                }
                None => print!("{}", cli::render_table(&report)),
            }
            Ok(())
        }
        Command::Synth { out, n, seed, noise } => {
            write_synth_csv(&out, n, seed, noise)?;
            eprintln!("{n} rows written to {}", out.display());
            Ok(())
        }
    }
}
