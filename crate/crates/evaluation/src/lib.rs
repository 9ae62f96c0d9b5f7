//! Reporting surface for stacking experiments: MSE/MAE with standard
//! errors, error-correlation matrices between base learners, weight
//! distribution summaries and redundancy diagnostics. All functions are
//! pure and safe to call concurrently.

pub mod correlation;
pub mod error;
pub mod metrics;
pub mod report;
pub mod weights;

pub use correlation::{
    error_correlation, redundancy_flags, CorrelationMatrix, RedundancyPair,
    DEFAULT_REDUNDANCY_THRESHOLD,
};
pub use error::{Error, Result};
pub use metrics::{mae_with_se, mse_with_se, MetricWithSE};
pub use report::{EvalReport, LearnerWeightSummary, ModelMetrics, ModelWeightSummary};
pub use weights::{negative_fraction, weight_summary, WeightQuantiles};
