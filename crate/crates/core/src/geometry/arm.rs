use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix6, SMatrix, UnitQuaternion, Vector3, Vector6};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Pose};

pub type Joints = [f64; 6];

/// One row of standard Denavit-Hartenberg parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DhRow {
    pub a: f64,
    pub alpha: f64,
    pub d: f64,
    #[serde(default)]
    pub theta_offset: f64,
}

impl DhRow {
    /// `Rz(θ) · Tz(d) · Tx(a) · Rx(α)` as a pose.
    pub fn transform(&self, joint: f64) -> Pose {
        let theta = joint + self.theta_offset;
        let (s, c) = theta.sin_cos();
        let rot = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), theta)
            * UnitQuaternion::from_axis_angle(&Vector3::x_axis(), self.alpha);
        Pose::new(Vector3::new(self.a * c, self.a * s, self.d), rot)
    }
}

/// Six-revolute-joint serial arm with a rigid peg and a wrist camera.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmModel {
    pub dh: [DhRow; 6],
    pub joint_limits: [[f64; 2]; 6],
    /// Flange to peg tip. The tip frame's z axis points out of the peg.
    pub tool_offset: Pose,
    /// Flange to camera optical frame (x right, y down, z along the view).
    pub camera_offset: Pose,
    pub home: Joints,
}

impl Default for ArmModel {
    fn default() -> Self {
        Self::ur5e()
    }
}

impl ArmModel {
    /// Nominal UR5e kinematics with a 16 cm gripper+peg stack and a camera
    /// 7 cm off the tool axis.
    pub fn ur5e() -> Self {
        let row = |a, alpha, d| DhRow {
            a,
            alpha,
            d,
            theta_offset: 0.0,
        };
        let full = [-2.0 * PI, 2.0 * PI];
        Self {
            dh: [
                row(0.0, FRAC_PI_2, 0.1625),
                row(-0.425, 0.0, 0.0),
                row(-0.3922, 0.0, 0.0),
                row(0.0, FRAC_PI_2, 0.1333),
                row(0.0, -FRAC_PI_2, 0.0997),
                row(0.0, 0.0, 0.0996),
            ],
            joint_limits: [full, full, [-PI, PI], full, full, full],
            tool_offset: Pose::from_translation(0.0, 0.0, 0.16),
            camera_offset: Pose::from_translation(0.0, 0.07, 0.02),
            home: [0.0, -FRAC_PI_2, FRAC_PI_2, -FRAC_PI_2, -FRAC_PI_2, 0.0],
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for (i, [lo, hi]) in self.joint_limits.iter().enumerate() {
            if !(lo < hi) {
                return Err(GeometryError::Invalid(format!(
                    "joint_limits[{i}]: lower bound {lo} must be below upper bound {hi}"
                )));
            }
        }
        if !self.tool_offset.is_finite() || !self.camera_offset.is_finite() {
            return Err(GeometryError::Invalid("tool/camera offsets must be finite".into()));
        }
        self.check_joints(&self.home)
            .map_err(|e| GeometryError::Invalid(format!("home: {e}")))
    }

    pub fn check_joints(&self, joints: &Joints) -> Result<(), GeometryError> {
        for (i, (&q, [lo, hi])) in joints.iter().zip(self.joint_limits.iter()).enumerate() {
            if !q.is_finite() {
                return Err(GeometryError::NonFinite);
            }
            if q < *lo || q > *hi {
                return Err(GeometryError::JointLimit {
                    joint: i,
                    value: q,
                    lo: *lo,
                    hi: *hi,
                });
            }
        }
        Ok(())
    }

    pub fn clamp_joints(&self, joints: &mut Joints) {
        for (q, [lo, hi]) in joints.iter_mut().zip(self.joint_limits.iter()) {
            *q = q.clamp(*lo, *hi);
        }
    }

    /// Frames `0..=6`: base, then the frame after each joint. Index 6 is the flange.
    fn frames(&self, joints: &Joints) -> [Pose; 7] {
        let mut frames = [Pose::identity(); 7];
        for i in 0..6 {
            frames[i + 1] = frames[i].compose(&self.dh[i].transform(joints[i]));
        }
        frames
    }

    pub fn flange_pose(&self, joints: &Joints) -> Result<Pose, GeometryError> {
        self.check_joints(joints)?;
        Ok(self.frames(joints)[6])
    }

    /// Peg-tip frame in world coordinates.
    pub fn forward_kinematics(&self, joints: &Joints) -> Result<Pose, GeometryError> {
        Ok(self.flange_pose(joints)?.compose(&self.tool_offset))
    }

    pub fn camera_pose(&self, joints: &Joints) -> Result<Pose, GeometryError> {
        Ok(self.flange_pose(joints)?.compose(&self.camera_offset))
    }

    /// Geometric Jacobian of the peg tip: rows 0..3 linear, rows 3..6 angular.
    pub fn jacobian(&self, joints: &Joints) -> Result<Matrix6<f64>, GeometryError> {
        self.check_joints(joints)?;
        let frames = self.frames(joints);
        let tip = frames[6].compose(&self.tool_offset).position;
        let mut jac = Matrix6::zeros();
        for i in 0..6 {
            // joint i rotates about the z axis of the frame preceding it
            let axis = frames[i].z_axis();
            let lin = axis.cross(&(tip - frames[i].position));
            jac.fixed_view_mut::<3, 1>(0, i).copy_from(&lin);
            jac.fixed_view_mut::<3, 1>(3, i).copy_from(&axis);
        }
        Ok(jac)
    }
}

/// Damped least-squares resolution of small Cartesian tip displacements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CartesianStepper {
    /// Largest accepted displacement norm per call, meters.
    pub max_step: f64,
    pub damping: f64,
    /// When set, the angular rows of the Jacobian steer the tip back to this
    /// orientation; otherwise the current orientation is held.
    #[serde(skip)]
    pub hold_orientation: Option<UnitQuaternion<f64>>,
}

impl Default for CartesianStepper {
    fn default() -> Self {
        Self {
            max_step: 0.005,
            damping: 1e-3,
            hold_orientation: None,
        }
    }
}

impl CartesianStepper {
    /// Joint increment that moves the tip by `delta` (world frame) while keeping
    /// its orientation. The returned increment keeps `joints + increment` within limits.
    pub fn resolve(
        &self,
        model: &ArmModel,
        joints: &Joints,
        delta: &Vector3<f64>,
    ) -> Result<Joints, GeometryError> {
        if !delta.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let norm = delta.norm();
        if norm > self.max_step * (1.0 + 1e-12) {
            return Err(GeometryError::StepTooLarge {
                requested: norm,
                max: self.max_step,
            });
        }
        let jac = model.jacobian(joints)?;
        let mut twist = Vector6::zeros();
        twist.fixed_rows_mut::<3>(0).copy_from(delta);
        if let Some(target) = self.hold_orientation {
            let current = model.forward_kinematics(joints)?.orientation;
            let err = (target * current.inverse()).scaled_axis();
            twist.fixed_rows_mut::<3>(3).copy_from(&err);
        }
        if twist.iter().all(|v| *v == 0.0) {
            return Ok([0.0; 6]);
        }
        let normal: Matrix6<f64> =
            jac * jac.transpose() + Matrix6::identity() * (self.damping * self.damping);
        let chol = normal.cholesky().ok_or(GeometryError::Singular)?;
        let y = chol.solve(&twist);
        let dq: SMatrix<f64, 6, 1> = jac.transpose() * y;
        let mut next = *joints;
        for (q, d) in next.iter_mut().zip(dq.iter()) {
            *q += d;
        }
        model.clamp_joints(&mut next);
        let mut inc = [0.0; 6];
        for i in 0..6 {
            inc[i] = next[i] - joints[i];
        }
        Ok(inc)
    }
}
