use nalgebra::{Matrix3, Matrix4, Point3, Quaternion, Unit, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// Rigid transform: translation in meters followed by a unit-quaternion rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "PoseConfig", into = "PoseConfig")]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            position: Vector3::zeros(),
            orientation: UnitQuaternion::identity(),
        }
    }

    pub fn new(position: Vector3<f64>, orientation: UnitQuaternion<f64>) -> Self {
        Self {
            position,
            orientation,
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(Vector3::new(x, y, z), UnitQuaternion::identity())
    }

    /// Rotation about the world z axis by `yaw`, placed at `(x, y, z)`.
    pub fn from_xyz_yaw(x: f64, y: f64, z: f64, yaw: f64) -> Self {
        Self::new(
            Vector3::new(x, y, z),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw),
        )
    }

    /// `self ∘ other`: express `other` (given in this frame) in the parent frame.
    pub fn compose(&self, other: &Pose) -> Pose {
        let mut orientation = self.orientation * other.orientation;
        orientation.renormalize();
        Pose {
            position: self.position + self.orientation * other.position,
            orientation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let inv = self.orientation.inverse();
        Pose {
            position: -(inv * self.position),
            orientation: inv,
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation * p
    }

    pub fn inverse_transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse() * (p - self.position)
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * v
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        *self.orientation.to_rotation_matrix().matrix()
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0)
            .copy_from(&self.rotation_matrix());
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.position);
        m
    }

    pub fn point(&self) -> Point3<f64> {
        Point3::from(self.position)
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.orientation.coords.iter().all(|v| v.is_finite())
    }

    /// Translation distance and rotation angle between two poses.
    pub fn distance_to(&self, other: &Pose) -> (f64, f64) {
        (
            (self.position - other.position).norm(),
            self.orientation.angle_to(&other.orientation),
        )
    }

    /// Axis of the local frame expressed in the parent frame.
    pub fn z_axis(&self) -> Vector3<f64> {
        self.orientation * Vector3::z()
    }
}

/// Serialized form used in config files: position and quaternion `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseConfig {
    pub position: [f64; 3],
    #[serde(default = "identity_quat")]
    pub orientation: [f64; 4],
}

fn identity_quat() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl From<PoseConfig> for Pose {
    fn from(c: PoseConfig) -> Self {
        let [w, x, y, z] = c.orientation;
        Pose::new(
            Vector3::from(c.position),
            Unit::new_normalize(Quaternion::new(w, x, y, z)),
        )
    }
}

impl From<Pose> for PoseConfig {
    fn from(p: Pose) -> Self {
        let q = p.orientation.quaternion();
        PoseConfig {
            position: [p.position.x, p.position.y, p.position.z],
            orientation: [q.w, q.i, q.j, q.k],
        }
    }
}
