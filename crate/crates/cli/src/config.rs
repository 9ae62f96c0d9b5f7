//! Flat key-value experiment configuration with dotted per-learner keys.
//!
//! ```text
//! data = train.csv
//! target = y
//! test_fraction = 0.25
//! folds = 10
//! seed = 42
//! stackers = unns, cnns, breiman
//! architectures = 1, 3, 10
//! learners = lin_x, lin_x2, forest
//! lin_x.kind = ols
//! lin_x.columns = x
//! lin_x2.kind = ols
//! lin_x2.columns = x2
//! forest.kind = random_forest
//! forest.trees = 100
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use base_learners::{BoostParams, EnsembleParams, LearnerKind, LearnerSpec, TreeParams};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StackerKind {
    Unns,
    UnnsPhi,
    Cnns,
    CnnsPhi,
    Breiman,
    MetaNn,
    DirectNn,
}

impl StackerKind {
    pub fn key(&self) -> &'static str {
        match self {
            StackerKind::Unns => "unns",
            StackerKind::UnnsPhi => "unns_phi",
            StackerKind::Cnns => "cnns",
            StackerKind::CnnsPhi => "cnns_phi",
            StackerKind::Breiman => "breiman",
            StackerKind::MetaNn => "meta_nn",
            StackerKind::DirectNn => "direct_nn",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "unns" => StackerKind::Unns,
            "unns_phi" => StackerKind::UnnsPhi,
            "cnns" => StackerKind::Cnns,
            "cnns_phi" => StackerKind::CnnsPhi,
            "breiman" => StackerKind::Breiman,
            "meta_nn" => StackerKind::MetaNn,
            "direct_nn" => StackerKind::DirectNn,
            other => {
                return Err(Error::Config(format!(
                    "unknown stacker {other:?} (expected unns, unns_phi, cnns, cnns_phi, breiman, meta_nn or direct_nn)"
                )))
            }
        })
    }

    /// Whether this stacker trains a network whose depth is swept.
    pub fn is_network(&self) -> bool {
        !matches!(self, StackerKind::Breiman)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data_path: PathBuf,
    pub target_column: String,
    pub test_fraction: f64,
    pub oof_folds: usize,
    pub seed: u64,
    pub stackers: Vec<StackerKind>,
    pub architecture_sweep: Vec<usize>,
    pub hidden_size: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub val_fraction: f64,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub cnns_clip_negative: bool,
    pub redundancy_threshold: f64,
    pub learners: Vec<LearnerSpec>,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_str(&text)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let pairs = parse_pairs(text)?;
        build_config(pairs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Config(format!(
                "test_fraction must lie in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.oof_folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.oof_folds)));
        }
        if self.stackers.is_empty() {
            return Err(Error::Config("at least one stacker is required".into()));
        }
        if self.learners.is_empty() {
            return Err(Error::Config("at least one base learner is required".into()));
        }
        if self.architecture_sweep.is_empty() {
            return Err(Error::Config("architecture sweep must not be empty".into()));
        }
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(Error::Config(format!(
                "val_fraction must lie in (0, 1), got {}",
                self.val_fraction
            )));
        }
        let mut names: Vec<&str> = self.learners.iter().map(|l| l.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.learners.len() {
            return Err(Error::Config("learner names must be unique".into()));
        }
        Ok(())
    }
}

struct Pairs {
    map: BTreeMap<String, String>,
}

impl Pairs {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn take_parsed<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("invalid value {raw:?} for key {key:?}"))),
        }
    }

    fn take_list(&mut self, key: &str) -> Option<Vec<String>> {
        self.take(key).map(|raw| {
            raw.split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect()
        })
    }
}

fn parse_pairs(text: &str) -> Result<Pairs> {
    let mut map = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {}: expected 'key = value', got {raw_line:?}",
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("duplicate key {key:?}")));
        }
    }
    Ok(Pairs { map })
}

fn build_config(mut pairs: Pairs) -> Result<ExperimentConfig> {
    let data_path: PathBuf = pairs
        .take("data")
        .ok_or_else(|| Error::Config("missing required key 'data'".into()))?
        .into();
    let target_column = pairs
        .take("target")
        .ok_or_else(|| Error::Config("missing required key 'target'".into()))?;

    let test_fraction = pairs.take_parsed("test_fraction")?.unwrap_or(0.25);
    let oof_folds = pairs.take_parsed("folds")?.unwrap_or(10);
    let seed = pairs.take_parsed("seed")?.unwrap_or(0);
    let hidden_size = pairs.take_parsed("hidden_size")?.unwrap_or(100);
    let batch_size = pairs.take_parsed("batch_size")?.unwrap_or(128);
    let patience = pairs.take_parsed("patience")?.unwrap_or(10);
    let val_fraction = pairs.take_parsed("val_fraction")?.unwrap_or(0.1);
    let max_epochs = pairs.take_parsed("max_epochs")?.unwrap_or(500);
    let learning_rate = pairs.take_parsed("learning_rate")?.unwrap_or(1e-3);
    let cnns_clip_negative = pairs.take_parsed("cnns_clip_negative")?.unwrap_or(false);
    let redundancy_threshold = pairs
        .take_parsed("redundancy_threshold")?
        .unwrap_or(evaluation::DEFAULT_REDUNDANCY_THRESHOLD);
    let output_dir: PathBuf = pairs.take("output_dir").unwrap_or_else(|| "out".into()).into();

    let stackers = match pairs.take_list("stackers") {
        Some(items) => items.iter().map(|s| StackerKind::parse(s)).collect::<Result<Vec<_>>>()?,
        None => vec![
            StackerKind::Unns,
            StackerKind::UnnsPhi,
            StackerKind::Cnns,
            StackerKind::CnnsPhi,
            StackerKind::Breiman,
            StackerKind::MetaNn,
            StackerKind::DirectNn,
        ],
    };

    let architecture_sweep = match pairs.take_list("architectures") {
        Some(items) => items
            .iter()
            .map(|s| {
                s.parse::<usize>()
                    .map_err(|_| Error::Config(format!("invalid architecture {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?,
        None => vec![1, 3, 10],
    };

    let learner_names = pairs
        .take_list("learners")
        .ok_or_else(|| Error::Config("missing required key 'learners'".into()))?;
    let mut learners = Vec::with_capacity(learner_names.len());
    for name in &learner_names {
        learners.push(build_learner(name, &mut pairs, seed)?);
    }

    // Anything left is a typo or an orphaned learner key.
    if let Some(key) = pairs.map.keys().next() {
        return Err(Error::Config(format!("unknown key {key:?}")));
    }

    let config = ExperimentConfig {
        data_path,
        target_column,
        test_fraction,
        oof_folds,
        seed,
        stackers,
        architecture_sweep,
        hidden_size,
        batch_size,
        patience,
        val_fraction,
        max_epochs,
        learning_rate,
        cnns_clip_negative,
        redundancy_threshold,
        learners,
        output_dir,
    };
    config.validate()?;
    Ok(config)
}

fn build_learner(name: &str, pairs: &mut Pairs, default_seed: u64) -> Result<LearnerSpec> {
    let kind_name = pairs.take(&format!("{name}.kind")).unwrap_or_else(|| name.to_string());
    let columns = pairs.take_list(&format!("{name}.columns"));
    let seed = pairs.take_parsed(&format!("{name}.seed"))?.unwrap_or(default_seed);

    let tree_params = |pairs: &mut Pairs, default: TreeParams| -> Result<TreeParams> {
        let max_depth = match pairs.take(&format!("{name}.depth")) {
            None => default.max_depth,
            Some(raw) if raw == "none" => None,
            Some(raw) => Some(raw.parse().map_err(|_| {
                Error::Config(format!("invalid value {raw:?} for key \"{name}.depth\""))
            })?),
        };
        let min_leaf = pairs.take_parsed(&format!("{name}.min_leaf"))?.unwrap_or(default.min_leaf);
        Ok(TreeParams { max_depth, min_leaf, feature_subset: None })
    };

    let kind = match kind_name.as_str() {
        "ols" | "least_squares" => LearnerKind::Ols,
        "ridge" => LearnerKind::Ridge {
            lambda: pairs.take_parsed(&format!("{name}.lambda"))?.unwrap_or(1.0),
        },
        "lasso" => LearnerKind::Lasso {
            lambda: pairs.take_parsed(&format!("{name}.lambda"))?.unwrap_or(0.1),
        },
        "tree" => LearnerKind::Tree(tree_params(pairs, TreeParams::default())?),
        "bagging" | "random_forest" => {
            let params = EnsembleParams {
                n_trees: pairs.take_parsed(&format!("{name}.trees"))?.unwrap_or(100),
                tree: tree_params(pairs, TreeParams::default())?,
                bootstrap: true,
            };
            if kind_name == "bagging" {
                LearnerKind::Bagging(params)
            } else {
                LearnerKind::RandomForest(params)
            }
        }
        "gradient_boosting" | "gbr" => {
            let defaults = BoostParams::default();
            LearnerKind::GradientBoosting(BoostParams {
                n_rounds: pairs.take_parsed(&format!("{name}.rounds"))?.unwrap_or(defaults.n_rounds),
                shrinkage: pairs
                    .take_parsed(&format!("{name}.shrinkage"))?
                    .unwrap_or(defaults.shrinkage),
                tree: tree_params(pairs, defaults.tree)?,
            })
        }
        other => {
            return Err(Error::Config(format!(
                "learner {name:?}: unknown kind {other:?}"
            )))
        }
    };

    let mut spec = LearnerSpec::new(name, kind, seed);
    if let Some(columns) = columns {
        spec = spec.with_columns(columns);
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "data = d.csv\ntarget = y\nlearners = ols\nstackers = breiman\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_str(MINIMAL).unwrap();
        assert_eq!(cfg.test_fraction, 0.25);
        assert_eq!(cfg.oof_folds, 10);
        assert_eq!(cfg.architecture_sweep, vec![1, 3, 10]);
        assert_eq!(cfg.hidden_size, 100);
        assert_eq!(cfg.learners.len(), 1);
        assert_eq!(cfg.stackers, vec![StackerKind::Breiman]);
    }

    #[test]
    fn per_learner_keys_are_consumed() {
        let text = "data = d.csv\ntarget = y\nstackers = unns\n\
                    learners = lin_x, forest, gbr\n\
                    lin_x.kind = ols\nlin_x.columns = x\n\
                    forest.kind = random_forest\nforest.trees = 7\nforest.min_leaf = 2\n\
                    gbr.rounds = 5\ngbr.shrinkage = 0.3\n";
        let cfg = ExperimentConfig::from_str(text).unwrap();
        assert_eq!(cfg.learners[0].columns, Some(vec!["x".to_string()]));
        match &cfg.learners[1].kind {
            LearnerKind::RandomForest(p) => {
                assert_eq!(p.n_trees, 7);
                assert_eq!(p.tree.min_leaf, 2);
            }
            other => panic!("expected forest, got {other:?}"),
        }
        match &cfg.learners[2].kind {
            LearnerKind::GradientBoosting(p) => {
                assert_eq!(p.n_rounds, 5);
                assert_eq!(p.shrinkage, 0.3);
            }
            other => panic!("expected boosting, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_and_zero_stackers_are_rejected() {
        let text = format!("{MINIMAL}bogus_key = 1\n");
        assert!(matches!(ExperimentConfig::from_str(&text), Err(Error::Config(_))));

        let text = "data = d.csv\ntarget = y\nlearners = ols\nstackers = \n";
        assert!(matches!(ExperimentConfig::from_str(text), Err(Error::Config(_))));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let text = "# experiment\n\ndata = d.csv  # path\ntarget = y\nlearners = ols\nstackers = breiman\n";
        assert!(ExperimentConfig::from_str(text).is_ok());
    }

    #[test]
    fn duplicate_learner_names_are_rejected() {
        let text = "data = d.csv\ntarget = y\nlearners = ols, ols\nstackers = breiman\n";
        assert!(matches!(ExperimentConfig::from_str(text), Err(Error::Config(_))));
    }
}
