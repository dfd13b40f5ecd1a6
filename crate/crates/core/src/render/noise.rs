use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CameraIntrinsics, RgbdImage};

/// Stereo-style depth corruption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DepthNoiseParams {
    /// σ = k·z², in 1/m.
    pub sigma_coeff: f64,
    /// Depth jump to a 4-neighbor that marks a pixel as an edge, meters.
    pub edge_threshold: f64,
    pub p_edge: f64,
    pub p_speckle: f64,
}

impl Default for DepthNoiseParams {
    fn default() -> Self {
        Self {
            sigma_coeff: 0.002,
            edge_threshold: 0.02,
            p_edge: 0.8,
            p_speckle: 0.01,
        }
    }
}

impl DepthNoiseParams {
    pub fn none() -> Self {
        Self {
            sigma_coeff: 0.0,
            edge_threshold: 0.0,
            p_edge: 0.0,
            p_speckle: 0.0,
        }
    }
}

/// Returns a copy of `image` with corrupted depth. Every pixel consumes the
/// same number of draws, so the stream is stable under parameter changes.
pub fn apply_depth_noise<R: Rng + ?Sized>(
    image: &RgbdImage,
    intrinsics: &CameraIntrinsics,
    params: &DepthNoiseParams,
    rng: &mut R,
) -> RgbdImage {
    let (w, h) = (image.width, image.height);
    let mut out = image.clone();
    let src = &image.depth;
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            let edge_draw: f64 = rng.random();
            let speckle_draw: f64 = rng.random();
            let gauss: f64 = rng.sample(StandardNormal);
            let z = f64::from(src[i]);
            if z == 0.0 {
                continue;
            }
            let mut is_edge = false;
            let mut check = |j: usize| {
                if (f64::from(src[j]) - z).abs() > params.edge_threshold {
                    is_edge = true;
                }
            };
            if u > 0 {
                check(i - 1);
            }
            if u + 1 < w {
                check(i + 1);
            }
            if v > 0 {
                check(i - w);
            }
            if v + 1 < h {
                check(i + w);
            }
            if (is_edge && edge_draw < params.p_edge) || speckle_draw < params.p_speckle {
                out.depth[i] = 0.0;
                continue;
            }
            let sigma = params.sigma_coeff * z * z;
            let noisy = z + sigma * gauss;
            out.depth[i] = if intrinsics.depth_is_valid(noisy) {
                if sigma == 0.0 {
                    src[i]
                } else {
                    noisy as f32
                }
            } else {
                0.0
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat(z: f32, n: usize) -> RgbdImage {
        let mut img = RgbdImage::new(n, n);
        img.depth.fill(z);
        img
    }

    fn stepped() -> RgbdImage {
        let mut img = RgbdImage::new(32, 32);
        for v in 0..32 {
            for u in 0..32 {
                img.depth[v * 32 + u] = if u < 16 { 0.4 } else { 0.5 };
            }
        }
        img.depth[5] = 0.0;
        img
    }

    #[test]
    fn zero_params_are_identity() {
        let k = CameraIntrinsics::default();
        let img = stepped();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(apply_depth_noise(&img, &k, &DepthNoiseParams::none(), &mut rng), img);
    }

    #[test]
    fn same_seed_same_output() {
        let k = CameraIntrinsics::default();
        let img = stepped();
        let p = DepthNoiseParams::default();
        let a = apply_depth_noise(&img, &k, &p, &mut ChaCha8Rng::seed_from_u64(9));
        let b = apply_depth_noise(&img, &k, &p, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let c = apply_depth_noise(&img, &k, &p, &mut ChaCha8Rng::seed_from_u64(10));
        assert_ne!(a, c);
    }

    #[test]
    fn noise_scale_follows_quadratic_law() {
        let k = CameraIntrinsics::default();
        let img = flat(0.5, 128);
        let p = DepthNoiseParams {
            sigma_coeff: 0.002,
            ..DepthNoiseParams::none()
        };
        let out = apply_depth_noise(&img, &k, &p, &mut ChaCha8Rng::seed_from_u64(2));
        let diffs: Vec<f64> = out
            .depth
            .iter()
            .zip(&img.depth)
            .map(|(a, b)| f64::from(*a) - f64::from(*b))
            .collect();
        let n = diffs.len() as f64;
        let mean = diffs.iter().sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        assert!((sd - 0.0005).abs() <= 0.1 * 0.0005, "sd {sd}");
    }

    #[test]
    fn edges_drop_and_range_is_respected() {
        let k = CameraIntrinsics {
            depth_min: 0.39,
            depth_max: 0.51,
            ..Default::default()
        };
        let img = stepped();
        let p = DepthNoiseParams {
            sigma_coeff: 0.2,
            p_edge: 1.0,
            ..DepthNoiseParams::default()
        };
        let out = apply_depth_noise(&img, &k, &p, &mut ChaCha8Rng::seed_from_u64(3));
        for v in 0..32 {
            assert_eq!(out.depth[v * 32 + 15], 0.0);
            assert_eq!(out.depth[v * 32 + 16], 0.0);
        }
        for d in &out.depth {
            let d = f64::from(*d);
            assert!(d == 0.0 || (k.depth_min..=k.depth_max).contains(&d));
        }
    }
}
