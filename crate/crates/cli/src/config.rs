//! Experiment configuration files.

use prolate_core::group::{BandSpec, TimeWindow};
use serde::Deserialize;

use crate::error::{CliError, Result};

/// One experiment, as read from `--config FILE`. Every field is optional:
/// command-line flags win over config values, and whatever is still missing
/// after the merge is a usage error naming the field.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<String>,
    pub kind: Option<String>,
    /// Structural operator description: group name plus window and band
    /// objects, an alternative to `kind`.
    pub group: Option<String>,
    #[serde(rename = "N")]
    pub modulus: Option<usize>,
    pub window: Option<TimeWindow>,
    pub band: Option<BandSpec>,
    pub operator: Option<String>,
    pub decomposition: Option<String>,
    pub n: Option<usize>,
    pub n2: Option<usize>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub w: Option<f64>,
    pub w2: Option<f64>,
    pub nw: Option<f64>,
    pub trig: Option<String>,
    pub sizes: Option<Vec<usize>>,
    pub metric: Option<String>,
    pub theorem: Option<String>,
    pub tolerance: Option<f64>,
    pub rank: Option<usize>,
    pub count: Option<usize>,
    pub eps: Option<f64>,
    pub levels: Option<Vec<f64>>,
    pub draws: Option<usize>,
    pub seed: Option<u64>,
    pub grid: Option<usize>,
    pub tapers: Option<usize>,
    pub weighting: Option<String>,
    pub theta: Option<Vec<String>>,
    pub rhs: Option<String>,
    pub signal: Option<String>,
    pub out: Option<String>,
    pub save_decomposition: Option<bool>,
    pub compare: Option<bool>,
}

impl ExperimentConfig {
    /// Schema checks beyond shape: the task must match the invoked
    /// subcommand, sweeps must be strictly increasing, tolerances positive.
    pub fn validate(&self, task: &str) -> Result<()> {
        if let Some(t) = &self.task {
            if t != task {
                return Err(CliError::Usage(format!(
                    "config field 'task': config names '{t}' but the '{task}' subcommand was invoked"
                )));
            }
        }
        if let Some(sizes) = &self.sizes {
            if sizes.windows(2).any(|p| p[1] <= p[0]) {
                return Err(CliError::Usage(
                    "config field 'sizes': sweep sizes must be strictly increasing".into(),
                ));
            }
        }
        if let Some(tol) = self.tolerance {
            if !(tol > 0.0) {
                return Err(CliError::Usage(format!(
                    "config field 'tolerance': must be positive, got {tol}"
                )));
            }
        }
        if let Some(levels) = &self.levels {
            if let Some(bad) = levels.iter().find(|&&e| !(e > 0.0)) {
                return Err(CliError::Usage(format!(
                    "config field 'levels': entries must be positive, got {bad}"
                )));
            }
        }
        Ok(())
    }
}
