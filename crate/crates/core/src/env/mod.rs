//! The insertion task as a Markov decision process: randomized resets,
//! Cartesian actions, modality-masked observations and a four-term reward.

mod config;
mod episode;
mod observation;
mod reward;
mod trace;

pub use config::{
    AugmentConfig, ColorRanges, EnvConfig, HsvRange, Modality, RewardCoeffs, TableRegion,
    PROPRIO_LEN,
};
pub use episode::{Env, StepInfo, StepResult};
pub use observation::{ImageTensor, Observation};
pub use reward::{compute_reward, RewardBreakdown};
pub use trace::{EpisodeTrace, TraceRow};

use crate::augment::AugError;
use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("invalid environment config: {0}")]
    Config(String),
    #[error("no visible block pose found in {tries} samples")]
    UnreachableRandomization { tries: usize },
    #[error("episode is over; call reset")]
    EpisodeOver,
    #[error("action contains a non-finite component")]
    InvalidAction,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Augment(#[from] AugError),
}
