//! The full evaluation report produced by one experiment run.

use serde::{Deserialize, Serialize};

use crate::correlation::{CorrelationMatrix, RedundancyPair};
use crate::metrics::MetricWithSE;
use crate::weights::WeightQuantiles;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelMetrics {
    pub model: String,
    pub mse: MetricWithSE,
    pub mae: MetricWithSE,
    /// Wall-clock fit seconds, including any architecture sweep. `None`
    /// when timing was stripped for deterministic artifacts.
    pub fit_time_secs: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerWeightSummary {
    pub learner: String,
    pub quantiles: WeightQuantiles,
}

/// Weight distribution of one stacked model over the test rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelWeightSummary {
    pub model: String,
    pub learners: Vec<LearnerWeightSummary>,
    /// Share of strictly negative fitted weights; relevant for the
    /// simplex-parametrized head, whose closed form does not rule them
    /// out, and for unconstrained weights generally.
    pub negative_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub models: Vec<ModelMetrics>,
    pub error_correlation: CorrelationMatrix,
    pub weight_summaries: Vec<ModelWeightSummary>,
    pub redundancy_pairs: Vec<RedundancyPair>,
}

impl EvalReport {
    /// Copy with every fit time removed; used when writing byte-stable
    /// artifacts.
    pub fn without_timings(&self) -> EvalReport {
        let mut out = self.clone();
        for m in &mut out.models {
            m.fit_time_secs = None;
        }
        out
    }
}
