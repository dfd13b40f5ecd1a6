//! Off-policy actor-critic learners over a small hand-written network library.

mod checkpoint;
mod learner;
mod nn;
mod replay;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use learner::{
    log1m_tanh_sq, squashed_log_prob, Agent, AgentConfig, Algorithm, Losses, NetworkConfig, ObsSpec,
};
pub use nn::{
    Adam, Batch, Cache, ConvSpec, ImageShape, NetSpec, Network, OutputActivation, Real, TensorSlot,
};
pub use replay::{sample_uniform, ReplayBuffer, StoredObs, Transition};

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("network spec: {0}")]
    Spec(String),
    #[error("agent config: {0}")]
    Config(String),
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("replay buffer is empty")]
    Empty,
    #[error("observation does not match the agent's modalities")]
    ModalityMismatch,
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
