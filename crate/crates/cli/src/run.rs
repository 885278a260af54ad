//! Command execution and error classification.

use std::path::{Path, PathBuf};

use afmass_core::cone2d::{self, ConicalSurface};
use afmass_core::fit::MassEstimate;
use afmass_core::mass::{self, FgRow, FgValue};
use afmass_core::sequences::{self, ExperimentReport};
use afmass_core::weighted::{self, DefectReport, DefectRow};
use afmass_core::Error as CoreError;
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};
use crate::report::{write_csv, write_report, Report, ReportError};

const DEFAULT_RADII: [f64; 4] = [50.0, 100.0, 200.0, 400.0];
const DEFAULT_PROFILE_RADII: [f64; 5] = [10.0, 20.0, 50.0, 100.0, 200.0];
const DEFAULT_OUTER: f64 = 400.0;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("computation failed: {0}")]
    ComputationFailed(#[source] CoreError),
    #[error(transparent)]
    Report(#[from] ReportError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid(_) => 2,
            CliError::ComputationFailed(_) | CliError::Report(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigInvalid(_) => "ConfigInvalid",
            CliError::ComputationFailed(_) => "ComputationFailed",
            CliError::Report(_) => "IoError",
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidSpec(m) | CoreError::InvalidInput(m) => CliError::ConfigInvalid(m),
            CoreError::UnsupportedDimension(n) => {
                CliError::ConfigInvalid(format!("dimension {n} is not supported here"))
            }
            other => CliError::ComputationFailed(other),
        }
    }
}

/// Contents of `error.json`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ErrorReport {
    pub tool_version: String,
    pub kind: String,
    pub message: String,
    /// Debug form of the originating library error, when there is one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module_error: Option<String>,
}

impl ErrorReport {
    pub fn from_error(e: &CliError) -> Self {
        ErrorReport {
            tool_version: afmass_core::VERSION.to_string(),
            kind: e.kind().to_string(),
            message: e.to_string(),
            module_error: match e {
                CliError::ComputationFailed(inner) => Some(format!("{inner:?}")),
                _ => None,
            },
        }
    }
}

/// Files written by a run and a one-line summary for stdout.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgProfileResult {
    pub profile: Vec<FgValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<MassEstimate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<u32>,
    pub divergence_mass: MassEstimate,
    #[serde(flatten)]
    pub defect: DefectReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedResult {
    pub entries: Vec<WeightedEntry>,
}

fn radii_or(config: &RunConfig, default: &[f64]) -> Vec<f64> {
    config.radii.clone().unwrap_or_else(|| default.to_vec())
}

fn require<T: Clone>(value: &Option<T>, what: &str, command: Command) -> Result<T, CliError> {
    value
        .clone()
        .ok_or_else(|| CliError::ConfigInvalid(format!("{} needs '{what}'", command.name())))
}

fn check_radii(radii: &[f64]) -> Result<(), CliError> {
    if radii.is_empty() {
        return Err(CliError::ConfigInvalid("radii list is empty".into()));
    }
    Ok(())
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::ConfigInvalid(format!("output directory {}: {e}", out.display())))
}

/// Resolve the command (from the subcommand or the config), run it and
/// write its reports into `out`.
pub fn execute(
    requested: Option<Command>,
    config: RunConfig,
    out: &Path,
) -> Result<Outcome, CliError> {
    let command = match (requested, config.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::ConfigInvalid(format!(
                "subcommand {} does not match config command {}",
                a.name(),
                b.name()
            )))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(CliError::ConfigInvalid("no command given".into())),
    };
    let mut config = config;
    config.command = Some(command);
    if config.q == 0 {
        return Err(CliError::ConfigInvalid("quadrature resolution must be positive".into()));
    }
    prepare_out(out)?;
    let q = config.q;
    let name = command.name();
    let json_path = out.join(format!("{}.json", name.replace('-', "_")));
    let csv_path = out.join(format!("{}.csv", name.replace('-', "_")));

    match command {
        Command::AdmMass => {
            let spec = require(&config.metric, "metric", command)?;
            let radii = radii_or(&config, &DEFAULT_RADII);
            check_radii(&radii)?;
            let est = mass::adm_mass(&spec, &radii, q)?;
            let summary = serde_json::json!({ "value": est.value, "error": est.error });
            write_report(&json_path, &Report::new(name, &config, est))?;
            Ok(Outcome {
                files: vec![json_path],
                summary,
            })
        }
        Command::FgProfile => {
            let spec = require(&config.metric, "metric", command)?;
            let radii = radii_or(&config, &DEFAULT_PROFILE_RADII);
            check_radii(&radii)?;
            let profile = mass::fg_profile(&spec, &radii, q)?;
            let limit = if spec.is_asymptotically_schwarzschild() && radii.len() >= 3 {
                Some(mass::fg_limit(&spec, &radii, q)?)
            } else {
                None
            };
            let rows: Vec<FgRow> = profile.iter().map(FgRow::from).collect();
            let summary = serde_json::json!({
                "radii": radii,
                "fg": profile.iter().map(|v| v.fg).collect::<Vec<_>>(),
                "limit": limit.as_ref().map(|l| l.value),
            });
            write_csv(&csv_path, &rows)?;
            write_report(&json_path, &Report::new(name, &config, FgProfileResult { profile, limit }))?;
            Ok(Outcome {
                files: vec![json_path, csv_path],
                summary,
            })
        }
        Command::WeightedMass => {
            let radii = radii_or(&config, &DEFAULT_RADII);
            check_radii(&radii)?;
            let outer = config.outer_radius.unwrap_or(DEFAULT_OUTER);
            let targets: Vec<(Option<u32>, afmass_core::MetricSpec)> = match &config.metric {
                Some(spec) => vec![(None, spec.clone())],
                None => {
                    let n = require(&config.n, "metric' or 'n", command)?;
                    let indices = require(&config.indices, "indices", command)?;
                    if indices.is_empty() {
                        return Err(CliError::ConfigInvalid("indices list is empty".into()));
                    }
                    indices
                        .iter()
                        .map(|&i| Ok((Some(i), sequences::default_shell(n, i)?)))
                        .collect::<Result<_, CliError>>()?
                }
            };
            let entries = targets
                .iter()
                .map(|(index, spec)| {
                    Ok(WeightedEntry {
                        index: *index,
                        divergence_mass: weighted::mass_via_divergence(spec, outer, q)?,
                        defect: weighted::mass_matter_defect(spec, &radii, outer, q)?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let rows: Vec<DefectRow> = entries
                .iter()
                .map(|e| DefectRow {
                    i: e.index.unwrap_or(0),
                    mass: e.defect.mass.value,
                    matter: e.defect.matter_integral,
                    defect: e.defect.defect,
                })
                .collect();
            let summary = serde_json::to_value(&rows).expect("rows serialize");
            write_csv(&csv_path, &rows)?;
            write_report(&json_path, &Report::new(name, &config, WeightedResult { entries }))?;
            Ok(Outcome {
                files: vec![json_path, csv_path],
                summary,
            })
        }
        Command::Sequence => {
            let exp = require(&config.experiment, "experiment", command)?;
            let rep = sequences::run_semicontinuity_experiment(&exp)?;
            experiment_outputs(name, &config, rep, json_path, csv_path)
        }
        Command::ConeAngle => {
            let surface = match (&config.surface, config.alpha) {
                (Some(s), _) => s.clone(),
                (None, Some(a)) => ConicalSurface::flat_cone(a),
                (None, None) => {
                    return Err(CliError::ConfigInvalid(
                        "cone-angle needs 'surface' or 'alpha'".into(),
                    ))
                }
            };
            let radii = radii_or(&config, &DEFAULT_RADII);
            check_radii(&radii)?;
            let est = cone2d::cone_mass(&surface, &radii, q)?;
            let summary = serde_json::json!({ "value": est.value, "error": est.error });
            write_report(&json_path, &Report::new(name, &config, est))?;
            Ok(Outcome {
                files: vec![json_path],
                summary,
            })
        }
        Command::ConeSequence => {
            let exp = require(&config.cone_experiment, "cone_experiment", command)?;
            let rep = cone2d::cone_semicontinuity_experiment(&exp)?;
            experiment_outputs(name, &config, rep, json_path, csv_path)
        }
    }
}

fn experiment_outputs(
    name: &str,
    config: &RunConfig,
    rep: ExperimentReport,
    json_path: PathBuf,
    csv_path: PathBuf,
) -> Result<Outcome, CliError> {
    let summary = serde_json::json!({
        "verdict": rep.verdict,
        "drop": rep.mass_drop,
        "masses_unbounded": rep.masses_unbounded,
        "fitted_exponent": rep.fitted_exponent,
    });
    write_csv(&csv_path, &rep.rows())?;
    write_report(&json_path, &Report::new(name, config, rep))?;
    Ok(Outcome {
        files: vec![json_path, csv_path],
        summary,
    })
}

/// Best-effort `error.json` next to the regular outputs.
pub fn write_error_report(out: &Path, e: &CliError) -> Option<PathBuf> {
    std::fs::create_dir_all(out).ok()?;
    let path = out.join("error.json");
    write_report(&path, &ErrorReport::from_error(e)).ok()?;
    Some(path)
}
