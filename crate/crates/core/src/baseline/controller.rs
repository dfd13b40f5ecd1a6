use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_hole_center, segment_block, BaselineError, HoleEstimate, HoleModel, SegmentationParams};
use crate::env::{Env, EpisodeTrace};
use crate::geometry::{Pose, SceneState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BaselineConfig {
    pub segmentation: SegmentationParams,
    /// Fraction of the position error commanded per step.
    pub gain: f64,
    /// Height of the approach point above the rim, meters.
    pub hover_height: f64,
    /// Lateral error below which the peg descends into the hole, meters.
    pub descend_tolerance: f64,
    /// How close the camera must get to the survey point before re-measuring, meters.
    pub survey_tolerance: f64,
    /// Re-measurements from above the estimated hole before the approach.
    pub survey_passes: u32,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            segmentation: SegmentationParams::default(),
            gain: 0.9,
            hover_height: 0.03,
            descend_tolerance: 0.001,
            survey_tolerance: 0.002,
            survey_passes: 2,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.segmentation.validate()?;
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err("gain: must be positive".into());
        }
        for (key, v) in [
            ("hover_height", self.hover_height),
            ("descend_tolerance", self.descend_tolerance),
            ("survey_tolerance", self.survey_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{key}: must be positive"));
            }
        }
        Ok(())
    }
}

/// Inputs to one proportional servo step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServoParams {
    pub gain: f64,
    pub hover_height: f64,
    pub descend_tolerance: f64,
    /// Success point depth below the rim.
    pub insertion_depth: f64,
    /// Meters per unit action.
    pub action_scale: f64,
}

impl ServoParams {
    pub fn new(config: &BaselineConfig, env: &Env) -> Self {
        let cfg = env.config();
        Self {
            gain: config.gain,
            hover_height: config.hover_height,
            descend_tolerance: config.descend_tolerance,
            insertion_depth: cfg.geometry.insertion_depth,
            action_scale: cfg.action_scale,
        }
    }
}

/// Hover above the rim until laterally aligned, then the in-hole success point.
pub fn servo_target(estimate: &HoleEstimate, tip: &Pose, params: &ServoParams) -> Vector3<f64> {
    let c = estimate.center_world;
    let lateral = (tip.position.xy() - c.xy()).norm();
    if lateral < params.descend_tolerance {
        c - Vector3::z() * params.insertion_depth
    } else {
        c + Vector3::z() * params.hover_height
    }
}

/// `clip(gain · (target − tip) / action_scale)` per component.
pub fn proportional_action(target: &Vector3<f64>, tip: &Vector3<f64>, gain: f64, action_scale: f64) -> [f64; 3] {
    let a = (target - tip) * (gain / action_scale);
    [a.x, a.y, a.z].map(|v| v.clamp(-1.0, 1.0))
}

/// Two-phase proportional servo toward the estimated hole.
pub fn baseline_step(estimate: &HoleEstimate, tip: &Pose, params: &ServoParams) -> [f64; 3] {
    let target = servo_target(estimate, tip, params);
    proportional_action(&target, &tip.position, params.gain, params.action_scale)
}

#[derive(Debug, Clone)]
pub struct BaselineOutcome {
    pub success: bool,
    pub steps: u32,
    pub collisions: u32,
    pub final_distance: f64,
    pub final_xy_error: f64,
    /// Last hole estimate, if any measurement succeeded.
    pub estimate: Option<HoleEstimate>,
    pub trace: EpisodeTrace,
}

/// Segment and locate the hole in a fresh camera frame.
pub fn measure<R: Rng + ?Sized>(
    env: &Env,
    state: &SceneState,
    config: &BaselineConfig,
    rng: &mut R,
) -> Result<HoleEstimate, BaselineError> {
    let cfg = env.config();
    let frame = env.capture(state, rng)?;
    let mask = segment_block(frame.width, frame.height, &frame.rgb, &config.segmentation);
    let camera = env.camera_pose(state)?;
    let hole = HoleModel {
        radius: cfg.geometry.block.hole.radius,
        depth: cfg.geometry.block.hole.depth,
    };
    estimate_hole_center(&mask, &frame.depth, &cfg.intrinsics, &camera, &hole)
}

struct Rollout<'a> {
    env: &'a Env,
    trace: EpisodeTrace,
    collisions: u32,
    over: bool,
}

impl Rollout<'_> {
    fn step<R: Rng + ?Sized>(&mut self, state: &mut SceneState, action: [f64; 3], rng: &mut R) -> Result<(), BaselineError> {
        let result = self.env.step(state, &action, rng)?;
        self.collisions += u32::from(result.info.collided);
        self.over = result.done();
        self.trace.record(&action, &result);
        Ok(())
    }
}

/// Closed loop from the current state until success or the step limit.
///
/// A first estimate from the start pose is refined by moving the camera over
/// the estimated hole at hover height and re-measuring, which removes the
/// perspective bias of oblique views. The peg then hovers above the hole and
/// descends once aligned.
pub fn run_baseline<R: Rng + ?Sized>(
    env: &Env,
    state: &mut SceneState,
    config: &BaselineConfig,
    rng: &mut R,
) -> Result<BaselineOutcome, BaselineError> {
    let params = ServoParams::new(config, env);
    let mut run = Rollout {
        env,
        trace: EpisodeTrace::default(),
        collisions: 0,
        over: env.is_over(state)?,
    };
    let mut estimate = measure(env, state, config, rng).ok();

    if let Some(first) = estimate {
        let tip = env.tip_pose(state)?.position;
        let offset = env.camera_pose(state)?.position - tip;
        let mut current = first;
        for _ in 0..config.survey_passes {
            let mut survey = current.center_world - offset;
            survey.z = current.center_world.z + config.hover_height;
            while !run.over {
                let tip = env.tip_pose(state)?.position;
                if (survey - tip).norm() < config.survey_tolerance {
                    break;
                }
                let action = proportional_action(&survey, &tip, config.gain, params.action_scale);
                run.step(state, action, rng)?;
            }
            if run.over {
                break;
            }
            if let Ok(e) = measure(env, state, config, rng) {
                current = e;
            }
        }
        estimate = Some(current);
        while !run.over {
            let tip = env.tip_pose(state)?;
            let action = baseline_step(&current, &tip, &params);
            run.step(state, action, rng)?;
        }
    }

    let err = env.target_error(state)?;
    Ok(BaselineOutcome {
        success: env.is_success(state)?,
        steps: state.time_step,
        collisions: run.collisions,
        final_distance: err.distance,
        final_xy_error: err.xy_error.norm(),
        estimate,
        trace: run.trace,
    })
}
