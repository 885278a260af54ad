//! Run configuration read from JSON.

use std::path::Path;

use afmass_core::cone2d::{ConeExperimentConfig, ConicalSurface};
use afmass_core::sequences::ExperimentConfig;
use afmass_core::MetricSpec;
use serde::{Deserialize, Serialize};

use crate::run::CliError;

/// Angular resolution used when neither the config nor `--quadrature` sets one.
pub const DEFAULT_Q: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    AdmMass,
    FgProfile,
    WeightedMass,
    Sequence,
    ConeAngle,
    ConeSequence,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::AdmMass => "adm-mass",
            Command::FgProfile => "fg-profile",
            Command::WeightedMass => "weighted-mass",
            Command::Sequence => "sequence",
            Command::ConeAngle => "cone-angle",
            Command::ConeSequence => "cone-sequence",
        }
    }
}

fn default_q() -> usize {
    DEFAULT_Q
}

/// Everything a run needs. Fields a command does not use are ignored.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<ConicalSurface>,
    /// Shorthand for a flat cone surface.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cone_experiment: Option<ConeExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer_radius: Option<f64>,
    /// Dimension and indices of a shell sequence for `weighted-mass`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indices: Option<Vec<u32>>,
    #[serde(default = "default_q")]
    pub q: usize,
    /// Reserved for randomized sampling; every built-in computation is
    /// deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command: Some(command),
            metric: None,
            surface: None,
            alpha: None,
            experiment: None,
            cone_experiment: None,
            radii: None,
            outer_radius: None,
            n: None,
            indices: None,
            q: DEFAULT_Q,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::ConfigInvalid(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::ConfigInvalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Apply a `--quadrature` override everywhere a resolution appears.
    pub fn with_quadrature(mut self, q: Option<usize>) -> Self {
        if let Some(q) = q {
            self.q = q;
            if let Some(e) = self.experiment.as_mut() {
                e.q = q;
            }
            if let Some(e) = self.cone_experiment.as_mut() {
                e.q = q;
            }
        }
        self
    }
}
