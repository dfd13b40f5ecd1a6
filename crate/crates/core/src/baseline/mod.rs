//! Classical vision baseline: color segmentation of the block, depth-based
//! hole localization and a two-phase proportional servo.

mod controller;
mod hole;
mod segment;

pub use controller::{
    baseline_step, measure, proportional_action, run_baseline, servo_target, BaselineConfig,
    BaselineOutcome, ServoParams,
};
pub use hole::{convex_hull, estimate_hole_center, hull_contains, HoleEstimate, HoleModel};
pub use segment::{segment_block, Mask, SegmentationParams};

use crate::env::EnvError;
use crate::geometry::GeometryError;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("no block pixels in the mask")]
    NoBlock,
    #[error("no hole pixels inside the block top")]
    NoHole,
    #[error("mask has {mask} pixels but depth has {depth}")]
    Dimensions { mask: usize, depth: usize },
    #[error("camera: {0}")]
    Camera(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

impl From<GeometryError> for BaselineError {
    fn from(e: GeometryError) -> Self {
        BaselineError::Env(EnvError::Geometry(e))
    }
}
