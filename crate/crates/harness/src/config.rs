//! Experiment configuration: model sources, generator specs and the error
//! taxonomy that maps onto process exit codes.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use nqovi_core::linear_mg::{from_json, random_linear_mg, random_tabular_mg, LinearMG, ModelError};
use nqovi_core::nqovi::{LearnerConfig, LearnerError};
use nqovi_core::oracle::OracleError;
use nqovi_core::stage_game::StageGameError;

use crate::audit::AuditToggles;

/// Exit codes: 0 success, 1 usage, 2 validation, 3 audit failure.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("audit failure: {0}")]
    Audit(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 1,
            HarnessError::Validation(_) | HarnessError::Io(_) => 2,
            HarnessError::Audit(_) => 3,
        }
    }
}

impl From<ModelError> for HarnessError {
    fn from(e: ModelError) -> Self {
        HarnessError::Validation(e.to_string())
    }
}

impl From<LearnerError> for HarnessError {
    fn from(e: LearnerError) -> Self {
        HarnessError::Validation(e.to_string())
    }
}

impl From<OracleError> for HarnessError {
    fn from(e: OracleError) -> Self {
        HarnessError::Validation(e.to_string())
    }
}

impl From<StageGameError> for HarnessError {
    fn from(e: StageGameError) -> Self {
        HarnessError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Validation(format!("json: {e}"))
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Validation(format!("csv: {e}"))
    }
}

/// Generator spec parsed from the `--gen "d=8,S=4,A=2x2,H=3,n=2"` shorthand.
///
/// `kind` selects the feature embedding: `simplex` (default) or `one_hot`
/// (tabular; `d` is then implied and must be omitted or match).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub d: Option<usize>,
    pub num_states: usize,
    pub action_dims: Vec<usize>,
    pub horizon: usize,
    pub num_agents: usize,
    pub kind: GenKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenKind {
    Simplex,
    OneHot,
}

impl GenSpec {
    /// Parse `key=value` pairs separated by commas. Required keys: `S`, `A`,
    /// `H`, `n`. `A` is `x`-separated per-agent action counts.
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut d = None;
        let mut num_states = None;
        let mut action_dims: Option<Vec<usize>> = None;
        let mut horizon = None;
        let mut num_agents = None;
        let mut kind = GenKind::Simplex;
        for part in text.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| HarnessError::Usage(format!("generator spec: `{part}` is not key=value")))?;
            let parse_usize = |v: &str| {
                v.trim().parse::<usize>().map_err(|_| {
                    HarnessError::Usage(format!("generator spec: `{key}` needs an integer, got `{v}`"))
                })
            };
            match key.trim() {
                "d" => d = Some(parse_usize(value)?),
                "S" => num_states = Some(parse_usize(value)?),
                "H" => horizon = Some(parse_usize(value)?),
                "n" => num_agents = Some(parse_usize(value)?),
                "A" => {
                    let dims = value
                        .split('x')
                        .map(|v| {
                            v.trim().parse::<usize>().map_err(|_| {
                                HarnessError::Usage(format!(
                                    "generator spec: `A` needs x-separated integers, got `{value}`"
                                ))
                            })
                        })
                        .collect::<Result<Vec<usize>, _>>()?;
                    action_dims = Some(dims);
                }
                "kind" => {
                    kind = match value.trim() {
                        "simplex" => GenKind::Simplex,
                        "one_hot" => GenKind::OneHot,
                        other => {
                            return Err(HarnessError::Usage(format!(
                                "generator spec: unknown kind `{other}` (expected simplex or one_hot)"
                            )))
                        }
                    }
                }
                other => {
                    return Err(HarnessError::Usage(format!(
                        "generator spec: unknown key `{other}`"
                    )))
                }
            }
        }
        let num_states =
            num_states.ok_or_else(|| HarnessError::Usage("generator spec: missing S".into()))?;
        let action_dims =
            action_dims.ok_or_else(|| HarnessError::Usage("generator spec: missing A".into()))?;
        let horizon =
            horizon.ok_or_else(|| HarnessError::Usage("generator spec: missing H".into()))?;
        let num_agents =
            num_agents.ok_or_else(|| HarnessError::Usage("generator spec: missing n".into()))?;
        if action_dims.len() != num_agents {
            return Err(HarnessError::Usage(format!(
                "generator spec: A lists {} agents but n={num_agents}",
                action_dims.len()
            )));
        }
        if kind == GenKind::Simplex && d.is_none() {
            return Err(HarnessError::Usage(
                "generator spec: missing d (required for simplex features)".into(),
            ));
        }
        Ok(Self {
            d,
            num_states,
            action_dims,
            horizon,
            num_agents,
            kind,
        })
    }

    /// Instantiate the model; deterministic in `seed`.
    pub fn build(&self, seed: u64) -> Result<LinearMG, HarnessError> {
        let (mg, _) = match self.kind {
            GenKind::Simplex => random_linear_mg(
                seed,
                self.d.expect("checked at parse"),
                self.num_states,
                &self.action_dims,
                self.horizon,
                self.num_agents,
            )?,
            GenKind::OneHot => random_tabular_mg(
                seed,
                self.num_states,
                &self.action_dims,
                self.horizon,
                self.num_agents,
            )?,
        };
        Ok(mg)
    }
}

/// Where the model comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Path(PathBuf),
    Gen(GenSpec),
}

impl ModelSource {
    /// Load or generate. The generator uses `model_seed`, which by convention
    /// is the first experiment seed so reruns are reproducible.
    pub fn load(&self, model_seed: u64) -> Result<LinearMG, HarnessError> {
        match self {
            ModelSource::Path(path) => {
                let text = std::fs::read_to_string(path)?;
                let mg = from_json(&text)?;
                Ok(mg)
            }
            ModelSource::Gen(spec) => spec.build(model_seed),
        }
    }
}

/// Full configuration of one experiment invocation.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub source: ModelSource,
    /// Template learner config; the per-seed `seed` field is overwritten.
    pub learner: LearnerConfig,
    pub seeds: Vec<u64>,
    /// Gap-evaluation cadence; `None` selects the default policy
    /// (every episode up to 2000 episodes, `ceil(K/2000)` beyond).
    pub cadence: Option<usize>,
    pub out_dir: PathBuf,
    pub audits: AuditToggles,
    /// Optimism-audit sample budget.
    pub audit_samples: usize,
}

impl ExperimentConfig {
    pub fn check(&self) -> Result<(), HarnessError> {
        if self.seeds.is_empty() {
            return Err(HarnessError::Usage("seeds: at least one seed required".into()));
        }
        if let Some(m) = self.cadence {
            if m == 0 {
                return Err(HarnessError::Usage("cadence: must be >= 1".into()));
            }
        }
        if self.learner.episodes == 0 {
            return Err(HarnessError::Usage("episodes: must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolved_cadence(&self) -> usize {
        match self.cadence {
            Some(m) => m,
            None => {
                let k = self.learner.episodes;
                if k <= 2000 {
                    1
                } else {
                    k.div_ceil(2000)
                }
            }
        }
    }
}
