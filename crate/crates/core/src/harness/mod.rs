//! Experiment configuration, training loop, fixed-pose evaluation and presets.

mod config;
mod eval;
mod presets;
mod preview;
mod protocol;
mod train;

pub use config::{parse_config, ExperimentConfig, OUTPUT_ENV_VAR};
pub use eval::{
    evaluate, evaluate_random, read_episodes_csv, render_table, rollout, Aggregate, EpisodeRecord, EvalReport,
    Policy, RolloutResult,
};
pub use presets::{
    ablation_grid, preset_config, preset_names, preset_runs, run_preset, seed_average, table_rows, PresetReport,
};
pub use preview::{augment_preview, load_plane, render_preview, PoseFile};
pub use protocol::{BlockPlacement, Protocol};
pub use train::{read_curve_csv, train, train_to_dir, write_curve_csv, CurveRow, RunArtifacts, TrainOutcome};

use crate::agents::AgentError;
use crate::augment::AugError;
use crate::baseline::BaselineError;
use crate::env::EnvError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Augment(#[from] AugError),
}
