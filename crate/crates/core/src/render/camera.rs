use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::RenderError;

/// Pinhole intrinsics. Pixel `(u, v)` has its center at integer coordinates;
/// depth is the z coordinate in the optical frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraIntrinsics {
    pub width: usize,
    pub height: usize,
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub depth_min: f64,
    pub depth_max: f64,
}

impl Default for CameraIntrinsics {
    /// 128×128, roughly 70° field of view, D435-like depth range.
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            fx: 90.0,
            fy: 90.0,
            cx: 63.5,
            cy: 63.5,
            depth_min: 0.1,
            depth_max: 2.0,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::Invalid("camera: width and height must be positive".into()));
        }
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(RenderError::Invalid("camera: fx and fy must be positive".into()));
        }
        if !(0.0 < self.depth_min && self.depth_min < self.depth_max) {
            return Err(RenderError::Invalid(
                "camera: need 0 < depth_min < depth_max".into(),
            ));
        }
        Ok(())
    }

    pub fn project(&self, p: &Vector3<f64>) -> Result<(f64, f64), RenderError> {
        if !(p.z > 0.0) {
            return Err(RenderError::BehindCamera);
        }
        Ok((
            self.cx + self.fx * p.x / p.z,
            self.cy + self.fy * p.y / p.z,
        ))
    }

    pub fn deproject(&self, u: f64, v: f64, depth: f64) -> Result<Vector3<f64>, RenderError> {
        if !(depth > 0.0) || !depth.is_finite() {
            return Err(RenderError::BehindCamera);
        }
        Ok(self.ray_direction(u, v) * depth)
    }

    /// Direction whose z component is 1, so a ray parameter equals depth.
    pub fn ray_direction(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= -0.5 && v >= -0.5 && u < self.width as f64 - 0.5 && v < self.height as f64 - 0.5
    }

    pub fn depth_is_valid(&self, z: f64) -> bool {
        z >= self.depth_min && z <= self.depth_max
    }

    /// Same optics at `1/factor` resolution.
    pub fn downsampled(&self, factor: usize) -> Self {
        let f = factor as f64;
        Self {
            width: self.width / factor,
            height: self.height / factor,
            fx: self.fx / f,
            fy: self.fy / f,
            cx: (self.cx + 0.5) / f - 0.5,
            cy: (self.cy + 0.5) / f - 0.5,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn intrinsics() -> CameraIntrinsics {
        CameraIntrinsics {
            width: 320,
            height: 240,
            fx: 400.0,
            fy: 400.0,
            cx: 160.0,
            cy: 120.0,
            depth_min: 0.1,
            depth_max: 3.0,
        }
    }

    #[test]
    fn optical_axis_hits_principal_point() {
        let k = intrinsics();
        for z in [0.1, 0.7, 2.5] {
            assert_eq!(k.project(&Vector3::new(0.0, 0.0, z)).unwrap(), (160.0, 120.0));
        }
    }

    #[test]
    fn hand_evaluated_projection() {
        let (u, v) = intrinsics().project(&Vector3::new(0.1, 0.0, 0.5)).unwrap();
        assert!((u - 240.0).abs() < 1e-12);
        assert!((v - 120.0).abs() < 1e-12);
    }

    #[test]
    fn projection_round_trip() {
        let k = intrinsics();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let p = Vector3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.05..3.0),
            );
            let (u, v) = k.project(&p).unwrap();
            let back = k.deproject(u, v, p.z).unwrap();
            assert!((back - p).norm() < 1e-6);
        }
    }

    #[test]
    fn behind_camera_is_an_error() {
        let k = intrinsics();
        assert!(matches!(k.project(&Vector3::new(0.0, 0.0, -1.0)), Err(RenderError::BehindCamera)));
        assert!(k.deproject(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn downsampling_keeps_the_same_rays() {
        let k = CameraIntrinsics::default();
        let half = k.downsampled(2);
        // the center of low-res pixel 0 lies between high-res pixels 0 and 1
        let hi = (k.ray_direction(0.0, 0.0) + k.ray_direction(1.0, 1.0)) * 0.5;
        let lo = half.ray_direction(0.0, 0.0);
        assert!((hi - lo).norm() < 1e-12);
    }
}
