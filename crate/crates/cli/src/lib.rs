//! Experiment orchestration for feature-dependent stacking: CSV
//! ingestion, flat-file configuration, the train/test protocol with
//! out-of-fold construction and architecture sweeps, model persistence,
//! and report emission.

pub mod config;
pub mod csv;
pub mod error;
pub mod experiment;
pub mod persist;
pub mod report_io;
pub mod synth;

pub use config::{ExperimentConfig, StackerKind};
pub use csv::{load_csv, load_features_csv, write_csv};
pub use error::{Error, Result};
pub use experiment::{run_experiment, split_for_config, train_test_split, RunArtifacts};
pub use persist::{load_model, save_model, PersistedModel, FORMAT_VERSION};
pub use report_io::{emit_report, render_table, ReportFormat};
pub use synth::{generate, write_synth_csv, DEFAULT_NOISE_SD};
