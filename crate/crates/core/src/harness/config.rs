use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::agents::{AgentConfig, ObsSpec};
use crate::baseline::BaselineConfig;
use crate::env::EnvConfig;

/// Environment variable that overrides every configured output directory.
pub const OUTPUT_ENV_VAR: &str = "PHRL_OUT";

/// One training run: environment, learner and loop budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Label used in tables and file names.
    pub name: String,
    /// Preset this config was derived from, if any.
    pub preset: Option<String>,
    /// Master seed; the agent, environment and evaluation streams derive from it.
    pub seed: u64,
    /// Environment steps, warmup included.
    pub total_steps: u64,
    pub eval_every: u64,
    pub rollouts_per_eval: usize,
    /// Gradient updates per environment step after warmup.
    pub updates_per_step: usize,
    pub output_dir: PathBuf,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub baseline: BaselineConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            preset: None,
            seed: 0,
            total_steps: 50_000,
            eval_every: 5_000,
            rollouts_per_eval: 10,
            updates_per_step: 1,
            output_dir: PathBuf::from("runs"),
            env: EnvConfig::default(),
            agent: AgentConfig::default(),
            baseline: BaselineConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Parse(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |key: &str, msg: &str| Err(HarnessError::Validation(format!("{key}: {msg}")));
        if self.total_steps < self.agent.warmup_steps {
            return bad("total_steps", "must be at least agent.warmup_steps");
        }
        if self.rollouts_per_eval == 0 {
            return bad("rollouts_per_eval", "must be >= 1");
        }
        if self.eval_every == 0 {
            return bad("eval_every", "must be >= 1");
        }
        self.env
            .validate()
            .map_err(|e| HarnessError::Validation(format!("env.{}", strip_prefix(&e.to_string()))))?;
        self.agent
            .validate()
            .map_err(|e| HarnessError::Validation(format!("agent.{}", strip_prefix(&e.to_string()))))?;
        self.baseline
            .validate()
            .map_err(|e| HarnessError::Validation(format!("baseline.{e}")))?;
        Ok(())
    }

    pub fn obs_spec(&self) -> ObsSpec {
        ObsSpec::from_env(&self.env)
    }

    /// `PHRL_OUT` if set, else the configured directory.
    pub fn resolved_output_dir(&self) -> PathBuf {
        output_dir_override().unwrap_or_else(|| self.output_dir.clone())
    }
}

pub(crate) fn output_dir_override() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Drop the "invalid ... config: " prefix of nested error messages so the key leads.
fn strip_prefix(msg: &str) -> &str {
    msg.split_once(": ").map_or(msg, |(_, rest)| rest)
}

/// Read and validate a TOML experiment file.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path)?;
    ExperimentConfig::from_toml_str(&text)
}
