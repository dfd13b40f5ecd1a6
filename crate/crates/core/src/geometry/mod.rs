//! Rigid-body math, arm kinematics and peg/block scene queries.

mod arm;
mod pose;
mod scene;

pub use arm::{ArmModel, CartesianStepper, DhRow, Joints};
pub use pose::{Pose, PoseConfig};
pub use scene::{
    check_collision, target_error, target_point, BlockSpec, ContactReport, HoleSpec, PegSpec, Rgb,
    SceneGeometry, SceneState, TargetError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("joint {joint} = {value} outside [{lo}, {hi}]")]
    JointLimit { joint: usize, value: f64, lo: f64, hi: f64 },
    #[error("non-finite input")]
    NonFinite,
    #[error("requested step {requested} m exceeds max step {max} m")]
    StepTooLarge { requested: f64, max: f64 },
    #[error("damped normal matrix is not positive definite")]
    Singular,
    #[error("invalid geometry: {0}")]
    Invalid(String),
}
