use serde::{Deserialize, Serialize};

use super::EnvError;
use crate::augment::{AugSpec, ChannelKind};
use crate::geometry::{ArmModel, CartesianStepper, SceneGeometry};
use crate::render::{CameraIntrinsics, DepthNoiseParams, RenderSettings};

/// Six normalized joints followed by the tip position.
pub const PROPRIO_LEN: usize = 9;

/// Observation channels a policy may receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    /// Color camera, delivered as one grayscale channel.
    Rgb,
    Depth,
    /// Normalized joint angles and tip position.
    Proprio,
    /// Hole target minus tip position, world frame.
    Target,
}

/// Block placement range on the table, world frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TableRegion {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Block yaw range, radians.
    pub yaw: [f64; 2],
}

impl Default for TableRegion {
    fn default() -> Self {
        // centered under the peg tip at the home pose
        Self {
            x: [-0.692, -0.292],
            y: [-0.243, -0.023],
            yaw: [0.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsvRange {
    /// Degrees; a range with `lo > hi` wraps through 0.
    pub hue: [f64; 2],
    pub saturation: [f64; 2],
    pub value: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ColorRanges {
    pub block: HsvRange,
    pub peg: HsvRange,
}

impl Default for ColorRanges {
    fn default() -> Self {
        Self {
            block: HsvRange {
                hue: [20.0, 60.0],
                saturation: [0.6, 1.0],
                value: [0.6, 1.0],
            },
            peg: HsvRange {
                hue: [180.0, 240.0],
                saturation: [0.6, 1.0],
                value: [0.6, 1.0],
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardCoeffs {
    /// Reward per meter of progress toward the target.
    pub w_dist: f64,
    pub r_success: f64,
    pub r_collision: f64,
    pub r_time: f64,
}

impl Default for RewardCoeffs {
    fn default() -> Self {
        Self {
            w_dist: 100.0,
            r_success: 10.0,
            r_collision: -1.0,
            r_time: -0.01,
        }
    }
}

/// Per-channel augmentation pipelines; `None` disables a channel's augmentation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AugmentConfig {
    pub gray: Option<AugSpec>,
    pub depth: Option<AugSpec>,
}

impl AugmentConfig {
    pub fn defaults() -> Self {
        Self {
            gray: Some(AugSpec::default_gray()),
            depth: Some(AugSpec::default_depth()),
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.gray.is_some() || self.depth.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvConfig {
    pub geometry: SceneGeometry,
    pub arm: ArmModel,
    pub stepper: CartesianStepper,
    pub intrinsics: CameraIntrinsics,
    pub render: RenderSettings,
    /// Stereo-style depth corruption; off by default.
    pub depth_noise: Option<DepthNoiseParams>,
    pub table_region: TableRegion,
    pub color_ranges: ColorRanges,
    /// Fraction of the block's top face that must project into the home view.
    pub min_visible_fraction: f64,
    pub max_steps: u32,
    /// Tip displacement per unit action, meters.
    pub action_scale: f64,
    pub success_threshold: f64,
    pub reward: RewardCoeffs,
    pub modalities: Vec<Modality>,
    /// Side length of the square policy image, pixels.
    pub observation_size: usize,
    /// Multiplier applied to the target vector in observations.
    pub target_scale: f64,
    pub augment: AugmentConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            geometry: SceneGeometry::default(),
            arm: ArmModel::ur5e(),
            stepper: CartesianStepper::default(),
            intrinsics: CameraIntrinsics::default(),
            render: RenderSettings::default(),
            depth_noise: None,
            table_region: TableRegion::default(),
            color_ranges: ColorRanges::default(),
            min_visible_fraction: 0.25,
            max_steps: 200,
            action_scale: 0.005,
            success_threshold: 0.003,
            reward: RewardCoeffs::default(),
            modalities: vec![Modality::Rgb, Modality::Depth, Modality::Proprio],
            observation_size: 64,
            target_scale: 10.0,
            augment: AugmentConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn has(&self, m: Modality) -> bool {
        self.modalities.contains(&m)
    }

    pub fn has_image(&self) -> bool {
        self.has(Modality::Rgb) || self.has(Modality::Depth)
    }

    pub fn image_channels(&self) -> usize {
        usize::from(self.has(Modality::Rgb)) + usize::from(self.has(Modality::Depth))
    }

    /// Length of the flat (non-image) observation vector.
    pub fn vector_len(&self) -> usize {
        PROPRIO_LEN * usize::from(self.has(Modality::Proprio)) + 3 * usize::from(self.has(Modality::Target))
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let invalid = |key: &str, msg: &str| Err(EnvError::Config(format!("{key}: {msg}")));
        self.geometry
            .validate()
            .map_err(|e| EnvError::Config(format!("geometry: {e}")))?;
        self.arm.validate().map_err(|e| EnvError::Config(format!("arm: {e}")))?;
        self.intrinsics
            .validate()
            .map_err(|e| EnvError::Config(format!("intrinsics: {e}")))?;
        if !(self.stepper.max_step > 0.0 && self.stepper.damping >= 0.0) {
            return invalid("stepper", "max_step must be positive and damping non-negative");
        }
        let r = &self.table_region;
        for (key, range) in [("table_region.x", r.x), ("table_region.y", r.y), ("table_region.yaw", r.yaw)] {
            if !(range[0].is_finite() && range[1].is_finite() && range[0] <= range[1]) {
                return invalid(key, "must be a finite [lo, hi] with lo <= hi");
            }
        }
        for (key, c) in [("color_ranges.block", self.color_ranges.block), ("color_ranges.peg", self.color_ranges.peg)] {
            let unit = |v: [f64; 2]| (0.0..=1.0).contains(&v[0]) && (0.0..=1.0).contains(&v[1]) && v[0] <= v[1];
            if !(unit(c.saturation) && unit(c.value) && c.hue.iter().all(|h| h.is_finite())) {
                return invalid(key, "saturation/value must be ranges within [0, 1]");
            }
        }
        if !(0.0..=1.0).contains(&self.min_visible_fraction) {
            return invalid("min_visible_fraction", "must be in [0, 1]");
        }
        if self.max_steps == 0 {
            return invalid("max_steps", "must be > 0");
        }
        if !(self.action_scale > 0.0) {
            return invalid("action_scale", "must be positive");
        }
        // being within the threshold of the target must imply the tip is below the rim
        if !(self.success_threshold > 0.0 && self.success_threshold < self.geometry.insertion_depth) {
            return invalid("success_threshold", "must be in (0, geometry.insertion_depth)");
        }
        if self.modalities.is_empty() {
            return invalid("modalities", "must be non-empty");
        }
        let mut seen = self.modalities.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.modalities.len() {
            return invalid("modalities", "contains duplicates");
        }
        if self.has_image() {
            let n = self.observation_size;
            if n == 0 || self.intrinsics.width % n != 0 || self.intrinsics.height % n != 0
                || self.intrinsics.width / n != self.intrinsics.height / n
            {
                return invalid(
                    "observation_size",
                    "must divide the camera width and height by the same factor",
                );
            }
        }
        if !(self.target_scale > 0.0) {
            return invalid("target_scale", "must be positive");
        }
        for (key, spec, kind) in [
            ("augment.gray", &self.augment.gray, ChannelKind::Gray),
            ("augment.depth", &self.augment.depth, ChannelKind::Depth),
        ] {
            if let Some(spec) = spec {
                if spec.channel != kind {
                    return invalid(key, "pipeline is declared for the other channel");
                }
                spec.validate().map_err(|e| EnvError::Config(format!("{key}: {e}")))?;
            }
        }
        Ok(())
    }
}
