//! Config file loading.
//!
//! A config file is one JSON object:
//!
//! ```json
//! {
//!   "pipeline": { "sport": "football", "k_quant": 100, "rng_seed": 7 },
//!   "synth": {
//!     "frames_per_team": 5000,
//!     "teams": [ { "team_id": "A", "mean_block": [-5.0, 0.0], "compactness": 2.0 } ]
//!   }
//! }
//! ```
//!
//! Every key is optional. Pipeline values start from the preset of the
//! chosen sport; command-line flags override file values.

use std::path::Path;

use frameot::synth::StyleParams;
use frameot::PipelineConfig;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub pipeline: Option<Value>,
    #[serde(default)]
    pub synth: Option<SynthSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub frames_per_team: usize,
    pub teams: Vec<SynthTeam>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthTeam {
    #[serde(default)]
    pub team_id: Option<String>,
    #[serde(flatten)]
    pub style: StyleParams,
}

pub fn load(path: Option<&Path>) -> Result<ConfigFile, CliError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("invalid config {}: {e}", path.display())))
}

/// Sport preset overlaid with the file's pipeline keys.
pub fn pipeline(file: &ConfigFile) -> Result<PipelineConfig, CliError> {
    let overrides = match &file.pipeline {
        None => return Ok(PipelineConfig::football()),
        Some(Value::Object(m)) => m.clone(),
        Some(_) => return Err(CliError::usage("`pipeline` must be an object")),
    };
    let preset = match overrides.get("sport").and_then(Value::as_str) {
        Some("basketball") => PipelineConfig::basketball(),
        _ => PipelineConfig::football(),
    };
    let mut merged = match serde_json::to_value(preset) {
        Ok(Value::Object(m)) => m,
        _ => unreachable!("config serializes to an object"),
    };
    merged.extend(overrides);
    serde_json::from_value(Value::Object(merged))
        .map_err(|e| CliError::usage(format!("invalid pipeline config: {e}")))
}
