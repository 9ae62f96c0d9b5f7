//! Versioned model persistence. The payload is self-describing JSON; a
//! round trip reproduces predictions bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};
use stacking_core::StackedModel;

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PersistedModel {
    pub format_version: u64,
    pub name: String,
    pub seed: u64,
    /// Feature columns the model expects, in order.
    pub feature_columns: Vec<String>,
    pub target_column: String,
    /// The effective experiment configuration at fit time.
    pub config_snapshot: serde_json::Value,
    pub model: StackedModel,
}

pub fn save_model(model: &PersistedModel, path: impl AsRef<Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(model)
        .map_err(|e| Error::CorruptModel(e.to_string()))?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<PersistedModel> {
    let text = std::fs::read_to_string(path)?;
    // Check the version before attempting a full decode so format bumps
    // produce a clear error instead of a field-level parse failure.
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::CorruptModel(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::CorruptModel("missing format_version".into()))?;
    if found != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion { found, supported: FORMAT_VERSION });
    }
    serde_json::from_value(value).map_err(|e| Error::CorruptModel(e.to_string()))
}
