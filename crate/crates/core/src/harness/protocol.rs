use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::Pose;

pub const PROTOCOL_POSES: usize = 6;
pub const PROTOCOL_ROLLOUTS: usize = 5;
pub const PROTOCOL_SPAN_X: f64 = 0.39;
pub const PROTOCOL_SPAN_Y: f64 = 0.21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockPlacement {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
}

impl BlockPlacement {
    pub fn pose(&self) -> Pose {
        Pose::from_xyz_yaw(self.x, self.y, 0.0, self.yaw)
    }
}

/// Fixed block poses, each evaluated for a number of rollouts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Protocol {
    pub poses: Vec<BlockPlacement>,
    pub rollouts_per_pose: usize,
    /// Seeds colors, noise and augmentation of every rollout.
    #[serde(default)]
    pub seed: u64,
}

impl Default for Protocol {
    /// 3 × 2 grid spanning exactly 0.39 m × 0.21 m around the home tip.
    fn default() -> Self {
        let (cx, cy) = (-0.4919, -0.1333);
        let xs = [-0.5, 0.0, 0.5].map(|f| cx + f * PROTOCOL_SPAN_X);
        let ys = [-0.5, 0.5].map(|f| cy + f * PROTOCOL_SPAN_Y);
        let poses = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| BlockPlacement { x: *x, y: *y, yaw: 0.0 }))
            .collect();
        Self {
            poses,
            rollouts_per_pose: PROTOCOL_ROLLOUTS,
            seed: 0,
        }
    }
}

impl Protocol {
    /// The evaluation protocol is fixed in shape: 6 poses within the stated
    /// extents, 5 rollouts each.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Validation(msg));
        if self.poses.len() != PROTOCOL_POSES {
            return bad(format!("poses: expected {PROTOCOL_POSES}, got {}", self.poses.len()));
        }
        if self.rollouts_per_pose != PROTOCOL_ROLLOUTS {
            return bad(format!("rollouts_per_pose: expected {PROTOCOL_ROLLOUTS}, got {}", self.rollouts_per_pose));
        }
        let span = |f: fn(&BlockPlacement) -> f64| {
            let vals = self.poses.iter().map(f);
            vals.clone().fold(f64::MIN, f64::max) - vals.fold(f64::MAX, f64::min)
        };
        if self.poses.iter().any(|p| !(p.x.is_finite() && p.y.is_finite() && p.yaw.is_finite())) {
            return bad("poses: coordinates must be finite".into());
        }
        let (sx, sy) = (span(|p| p.x), span(|p| p.y));
        if sx > PROTOCOL_SPAN_X + 1e-9 {
            return bad(format!("poses: x span {sx:.3} m exceeds {PROTOCOL_SPAN_X} m"));
        }
        if sy > PROTOCOL_SPAN_Y + 1e-9 {
            return bad(format!("poses: y span {sy:.3} m exceeds {PROTOCOL_SPAN_Y} m"));
        }
        Ok(())
    }

    pub fn n_rollouts(&self) -> usize {
        self.poses.len() * self.rollouts_per_pose
    }

    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let p: Self = toml::from_str(text).map_err(|e| HarnessError::Parse(e.message().to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }
}
