use nalgebra::{Vector2, Vector3};
use rand::Rng;

use super::observation::{downsample_depth, downsample_mean};
use super::{
    compute_reward, EnvConfig, EnvError, HsvRange, ImageTensor, Modality, Observation,
    RewardBreakdown,
};
use crate::augment::{apply_pipeline, to_grayscale, Channel, Plane};
use crate::geometry::{
    check_collision, target_error, target_point, CartesianStepper, Joints, Pose, Rgb, SceneState,
    TargetError,
};
use crate::render::{apply_depth_noise, hsv_to_rgb, render, RenderScene, RgbdImage};

/// Diagnostics attached to every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub xy_error: Vector2<f64>,
    pub distance: f64,
    pub collided: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: RewardBreakdown,
    /// Reached the success threshold.
    pub terminated: bool,
    /// Hit `max_steps` without success.
    pub truncated: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn done(&self) -> bool {
        self.terminated || self.truncated
    }
}

/// The insertion task. Holds only immutable precomputed data; the episode
/// state lives in the caller's [`SceneState`].
#[derive(Debug, Clone)]
pub struct Env {
    config: EnvConfig,
    stepper: CartesianStepper,
    home_camera: Pose,
}

const VISIBILITY_GRID: usize = 11;
const MAX_RESETS: usize = 100;

fn sample_range<R: Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    let u: f64 = rng.random();
    range[0] + (range[1] - range[0]) * u
}

fn sample_color<R: Rng + ?Sized>(rng: &mut R, range: &HsvRange) -> Rgb {
    let [lo, hi] = range.hue;
    let span = if hi >= lo { hi - lo } else { hi + 360.0 - lo };
    let hue = lo + span * rng.random::<f64>();
    let s = sample_range(rng, range.saturation);
    let v = sample_range(rng, range.value);
    hsv_to_rgb([hue, s, v])
}

impl Env {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let home_tip = config.arm.forward_kinematics(&config.arm.home)?;
        let home_camera = config.arm.camera_pose(&config.arm.home)?;
        let stepper = CartesianStepper {
            hold_orientation: Some(home_tip.orientation),
            ..config.stepper
        };
        Ok(Self {
            config,
            stepper,
            home_camera,
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn tip_pose(&self, state: &SceneState) -> Result<Pose, EnvError> {
        Ok(self.config.arm.forward_kinematics(&state.joints)?)
    }

    pub fn camera_pose(&self, state: &SceneState) -> Result<Pose, EnvError> {
        Ok(self.config.arm.camera_pose(&state.joints)?)
    }

    pub fn target_error(&self, state: &SceneState) -> Result<TargetError, EnvError> {
        let tip = self.tip_pose(state)?;
        Ok(target_error(&self.config.geometry, &tip, &state.block_pose))
    }

    pub fn target_point(&self, state: &SceneState) -> Vector3<f64> {
        target_point(&self.config.geometry, &state.block_pose)
    }

    /// Fraction of the block's top face that projects inside the home camera image.
    pub fn visible_fraction(&self, block_pose: &Pose) -> f64 {
        let block = &self.config.geometry.block;
        let half = block.half_extents();
        let cam_inv = self.home_camera.inverse();
        let n = VISIBILITY_GRID;
        let mut inside = 0;
        for i in 0..n {
            for j in 0..n {
                let fx = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
                let fy = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
                let local = Vector3::new(fx * half.x, fy * half.y, block.height());
                let cam = cam_inv.transform_point(&block_pose.transform_point(&local));
                if let Ok((u, v)) = self.config.intrinsics.project(&cam) {
                    if self.config.intrinsics.contains(u, v) {
                        inside += 1;
                    }
                }
            }
        }
        inside as f64 / (n * n) as f64
    }

    /// New episode: home joints, a randomized visible block pose, random colors.
    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Observation, SceneState), EnvError> {
        let region = &self.config.table_region;
        let mut block_pose = None;
        for _ in 0..MAX_RESETS {
            let x = sample_range(rng, region.x);
            let y = sample_range(rng, region.y);
            let yaw = sample_range(rng, region.yaw);
            let pose = Pose::from_xyz_yaw(x, y, 0.0, yaw);
            if self.visible_fraction(&pose) >= self.config.min_visible_fraction {
                block_pose = Some(pose);
                break;
            }
        }
        let block_pose = block_pose.ok_or(EnvError::UnreachableRandomization { tries: MAX_RESETS })?;
        self.reset_with_block(block_pose, rng)
    }

    /// New episode with the block at a given pose; colors are still randomized.
    pub fn reset_with_block<R: Rng + ?Sized>(
        &self,
        block_pose: Pose,
        rng: &mut R,
    ) -> Result<(Observation, SceneState), EnvError> {
        let block_color = sample_color(rng, &self.config.color_ranges.block);
        let peg_color = sample_color(rng, &self.config.color_ranges.peg);
        let state = SceneState {
            joints: self.config.arm.home,
            block_pose,
            block_color,
            peg_color,
            in_collision: false,
            time_step: 0,
        };
        let obs = self.observe(&state, rng)?;
        Ok((obs, state))
    }

    pub fn is_success(&self, state: &SceneState) -> Result<bool, EnvError> {
        Ok(self.target_error(state)?.distance <= self.config.success_threshold)
    }

    pub fn is_over(&self, state: &SceneState) -> Result<bool, EnvError> {
        Ok(state.time_step >= self.config.max_steps || self.is_success(state)?)
    }

    /// Tip displacement commanded by `action`: clamped to the unit cube, scaled,
    /// then shortened to the stepper's maximum step if needed.
    pub fn action_to_delta(&self, action: &[f64; 3]) -> Result<Vector3<f64>, EnvError> {
        if action.iter().any(|a| !a.is_finite()) {
            return Err(EnvError::InvalidAction);
        }
        let a = Vector3::from(action.map(|v| v.clamp(-1.0, 1.0)));
        let delta = a * self.config.action_scale;
        let max = self.stepper.max_step;
        let norm = delta.norm();
        Ok(if norm > max { delta * (max / norm) } else { delta })
    }

    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &mut SceneState,
        action: &[f64; 3],
        rng: &mut R,
    ) -> Result<StepResult, EnvError> {
        if self.is_over(state)? {
            return Err(EnvError::EpisodeOver);
        }
        let arm = &self.config.arm;
        let geometry = &self.config.geometry;
        let prev = self.target_error(state)?;
        let delta = self.action_to_delta(action)?;
        let inc = self.stepper.resolve(arm, &state.joints, &delta)?;
        let mut next: Joints = state.joints;
        for (q, d) in next.iter_mut().zip(inc) {
            *q += d;
        }
        let tip = arm.forward_kinematics(&next)?;
        let collided = check_collision(geometry, &tip, &state.block_pose).colliding;
        if !collided {
            state.joints = next;
        }
        state.in_collision = collided;
        state.time_step += 1;

        let err = self.target_error(state)?;
        let succeeded = err.distance <= self.config.success_threshold;
        let reward = compute_reward(prev.distance, err.distance, collided, succeeded, &self.config.reward);
        let observation = self.observe(state, rng)?;
        Ok(StepResult {
            observation,
            reward,
            terminated: succeeded,
            truncated: !succeeded && state.time_step >= self.config.max_steps,
            info: StepInfo {
                xy_error: err.xy_error,
                distance: err.distance,
                collided,
            },
        })
    }

    /// Assemble the observation for `state`. The generator is consumed only by
    /// depth noise and augmentation.
    pub fn observe<R: Rng + ?Sized>(&self, state: &SceneState, rng: &mut R) -> Result<Observation, EnvError> {
        let cfg = &self.config;
        let arm = &cfg.arm;
        let tip = arm.forward_kinematics(&state.joints)?;
        let image = if cfg.has_image() {
            Some(self.render_image(state, rng)?)
        } else {
            None
        };
        let proprio = cfg.has(Modality::Proprio).then(|| {
            let mut v: Vec<f32> = state
                .joints
                .iter()
                .zip(arm.joint_limits)
                .map(|(q, [lo, hi])| (2.0 * (q - lo) / (hi - lo) - 1.0) as f32)
                .collect();
            v.extend(tip.position.iter().map(|p| *p as f32));
            v
        });
        let target = cfg.has(Modality::Target).then(|| {
            let rel = (self.target_point(state) - tip.position) * cfg.target_scale;
            [rel.x as f32, rel.y as f32, rel.z as f32]
        });
        Ok(Observation {
            image,
            proprio,
            target,
        })
    }

    /// Full-resolution color and depth frame from the wrist camera, with depth
    /// noise when configured.
    pub fn capture<R: Rng + ?Sized>(&self, state: &SceneState, rng: &mut R) -> Result<RgbdImage, EnvError> {
        let cfg = &self.config;
        let scene = RenderScene::from_state(&cfg.arm, state)?;
        let camera = cfg.arm.camera_pose(&state.joints)?;
        let mut frame = render(&cfg.geometry, &scene, &cfg.intrinsics, &camera, &cfg.render);
        if let Some(params) = &cfg.depth_noise {
            frame = apply_depth_noise(&frame, &cfg.intrinsics, params, rng);
        }
        Ok(frame)
    }

    fn render_image<R: Rng + ?Sized>(&self, state: &SceneState, rng: &mut R) -> Result<ImageTensor, EnvError> {
        let cfg = &self.config;
        let frame = self.capture(state, rng)?;
        let factor = cfg.intrinsics.width / cfg.observation_size;
        let n = cfg.observation_size;
        let mut data = Vec::with_capacity(cfg.image_channels() * n * n);
        if cfg.has(Modality::Rgb) {
            let gray = to_grayscale(frame.width, frame.height, &frame.rgb)?;
            let mut gray = downsample_mean(&gray, factor);
            if let Some(spec) = &cfg.augment.gray {
                gray = apply_pipeline(&gray, Channel::Gray, spec, rng)?;
            }
            data.extend(gray.data.iter().map(|v| v / 255.0));
        }
        if cfg.has(Modality::Depth) {
            let max = cfg.intrinsics.depth_max as f32;
            let depth = Plane::new(frame.width, frame.height, frame.depth)?;
            let mut depth = downsample_depth(&depth, factor);
            if let Some(spec) = &cfg.augment.depth {
                depth = apply_pipeline(&depth, Channel::Depth { max }, spec, rng)?;
            }
            data.extend(depth.data.iter().map(|v| v / max));
        }
        Ok(ImageTensor {
            channels: cfg.image_channels(),
            height: n,
            width: n,
            data,
        })
    }

    /// Drive the arm (ignoring collisions) until the tip reaches `target`.
    /// Used to set up scripted start poses.
    pub fn place_tip(&self, state: &mut SceneState, target: &Vector3<f64>) -> Result<(), EnvError> {
        let arm = &self.config.arm;
        for _ in 0..2000 {
            let tip = arm.forward_kinematics(&state.joints)?;
            let mut delta = target - tip.position;
            if delta.norm() < 1e-7 {
                return Ok(());
            }
            if delta.norm() > self.stepper.max_step {
                delta *= self.stepper.max_step / delta.norm();
            }
            let inc = self.stepper.resolve(arm, &state.joints, &delta)?;
            for (q, d) in state.joints.iter_mut().zip(inc) {
                *q += d;
            }
        }
        Err(EnvError::Config(format!("tip cannot reach {target:?}")))
    }
}
