//! Run configuration: a single JSON file selects the experiment and its
//! parameters. Unknown experiment names and unknown fields are rejected
//! at parse time; the seed is mandatory (no wall-clock default) so every
//! run is reproducible.

use equizero_core::bergman::MetricModel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,

    /// Test function in the tiny polynomial syntax, e.g. "u^2-1/3".
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricModel>,
    /// "gaussian" | "sphere" | "haar-onb" | "z-power"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// "haar" | "monomial"
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_list: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials_outer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials_inner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_threshold: Option<f64>,

    /// Statistical acceptance bounds checked after the run; any
    /// violation makes the process exit with status 2.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<Bound>>,
}

fn default_schema() -> u32 {
    1
}

/// A bound on a report row (by statistic name and optional n) or on a
/// fitted summary (by fit name).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub statistic: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
}

pub const EXPERIMENTS: &[&str] = &[
    "expected-pairing",
    "variance-sweep",
    "sequence",
    "onb-average",
    "ep-cesaro",
    "szego",
    "orbit-check",
    "moment4",
    "gn-spread",
    "bergman-check",
    "common-zeros",
];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        if config.schema != 1 {
            return Err(format!("config: unsupported schema {}", config.schema));
        }
        if !EXPERIMENTS.contains(&config.experiment.as_str()) {
            return Err(format!(
                "config: unknown experiment `{}` (expected one of {})",
                config.experiment,
                EXPERIMENTS.join(", ")
            ));
        }
        Ok(config)
    }
}
