use nalgebra::Vector3;

use super::{BaselineError, Mask};
use crate::geometry::Pose;
use crate::render::CameraIntrinsics;

/// Estimated hole rim center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleEstimate {
    pub center_world: Vector3<f64>,
    /// Sub-pixel centroid of the hole pixels.
    pub center_pixel: (f64, f64),
    /// Camera-frame depth of the block top.
    pub top_depth: f64,
    /// Hole pixel count over the expected hole-disc area, clamped to [0, 1].
    pub confidence: f64,
}

/// Known hole dimensions used for thresholding and confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleModel {
    pub radius: f64,
    pub depth: f64,
}

fn median(values: &mut [f32]) -> Option<f32> {
    if values.is_empty() {
        return None;
    }
    let mid = values.len() / 2;
    let (_, m, _) = values.select_nth_unstable_by(mid, f32::total_cmp);
    Some(*m)
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counter-clockwise convex hull without collinear points (monotone chain).
pub fn convex_hull(mut points: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    points.sort_unstable();
    points.dedup();
    if points.len() < 3 {
        return points;
    }
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(2 * points.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(i64, i64)>> = if pass == 0 {
            Box::new(points.iter())
        } else {
            Box::new(points.iter().rev())
        };
        for p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], *p) <= 0 {
                hull.pop();
            }
            hull.push(*p);
        }
        hull.pop();
    }
    hull
}

/// Inclusive containment in a counter-clockwise convex polygon.
pub fn hull_contains(hull: &[(i64, i64)], p: (i64, i64)) -> bool {
    if hull.len() < 3 {
        return false;
    }
    (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= 0)
}

/// Locate the hole opening from the block mask and depth (0 = invalid).
///
/// The block top is the set of mask pixels within half the hole depth of the
/// median mask depth. Hole pixels lie inside the top's convex hull and are
/// either invalid or deeper than the top by more than half the hole depth.
/// Their centroid is deprojected at the top depth.
pub fn estimate_hole_center(
    mask: &Mask,
    depth: &[f32],
    intrinsics: &CameraIntrinsics,
    camera: &Pose,
    hole: &HoleModel,
) -> Result<HoleEstimate, BaselineError> {
    let (w, h) = (mask.width, mask.height);
    if depth.len() != w * h {
        return Err(BaselineError::Dimensions {
            mask: w * h,
            depth: depth.len(),
        });
    }
    let valid = |d: f32| d > 0.0 && d.is_finite();
    let mut block_depths: Vec<f32> = (0..w * h)
        .filter(|i| mask.data[*i] && valid(depth[*i]))
        .map(|i| depth[i])
        .collect();
    let rough = median(&mut block_depths).ok_or(BaselineError::NoBlock)?;
    let half = (0.5 * hole.depth) as f32;
    // refine on pixels near the rough top so side faces do not pull the median
    let mut near: Vec<f32> = block_depths.into_iter().filter(|d| (d - rough).abs() <= half).collect();
    let top = median(&mut near).unwrap_or(rough);

    let is_top = |i: usize| mask.data[i] && valid(depth[i]) && (depth[i] - top).abs() <= half;
    let top_pixels: Vec<(i64, i64)> = (0..w * h)
        .filter(|i| is_top(*i))
        .map(|i| ((i % w) as i64, (i / w) as i64))
        .collect();
    let hull = convex_hull(top_pixels);
    if hull.len() < 3 {
        return Err(BaselineError::NoHole);
    }
    let (umin, umax) = hull.iter().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (vmin, vmax) = hull.iter().fold((i64::MAX, i64::MIN), |(a, b), p| (a.min(p.1), b.max(p.1)));

    let (mut su, mut sv, mut count) = (0.0, 0.0, 0usize);
    for v in vmin..=vmax {
        for u in umin..=umax {
            let i = v as usize * w + u as usize;
            let d = depth[i];
            let is_hole = !valid(d) || d > top + half;
            if is_hole && hull_contains(&hull, (u, v)) {
                su += u as f64;
                sv += v as f64;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(BaselineError::NoHole);
    }
    let (cu, cv) = (su / count as f64, sv / count as f64);
    let top = f64::from(top);
    let local = intrinsics
        .deproject(cu, cv, top)
        .map_err(|e| BaselineError::Camera(e.to_string()))?;
    let r_px_x = hole.radius * intrinsics.fx / top;
    let r_px_y = hole.radius * intrinsics.fy / top;
    let expected = std::f64::consts::PI * r_px_x * r_px_y;
    Ok(HoleEstimate {
        center_world: camera.transform_point(&local),
        center_pixel: (cu, cv),
        top_depth: top,
        confidence: (count as f64 / expected).clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::{segment_block, SegmentationParams};
    use crate::env::{Env, EnvConfig};
    use crate::geometry::Pose;
    use nalgebra::Vector3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn intr() -> CameraIntrinsics {
        CameraIntrinsics::default()
    }

    const MODEL: HoleModel = HoleModel {
        radius: 0.012,
        depth: 0.03,
    };

    #[test]
    fn hull_of_square_is_its_corners() {
        let pts = (0..5).flat_map(|x| (0..5).map(move |y| (x, y))).collect();
        let hull = convex_hull(pts);
        assert_eq!(hull, vec![(0, 0), (4, 0), (4, 4), (0, 4)]);
        assert!(hull_contains(&hull, (2, 2)));
        assert!(hull_contains(&hull, (4, 2)));
        assert!(!hull_contains(&hull, (5, 2)));
    }

    fn synthetic(center: (f64, f64), radius: f64, hole_depth: f32) -> (Mask, Vec<f32>) {
        let n = 128;
        let mut mask = Mask::new(n, n);
        let mut depth = vec![0.0f32; n * n];
        for v in 20..110 {
            for u in 24..104 {
                let i = v * n + u;
                let r = ((u as f64 - center.0).powi(2) + (v as f64 - center.1).powi(2)).sqrt();
                if r <= radius {
                    depth[i] = hole_depth;
                } else {
                    mask.data[i] = true;
                    depth[i] = 0.4;
                }
            }
        }
        (mask, depth)
    }

    #[test]
    fn synthetic_circle_center_within_a_pixel() {
        for (center, hole_depth) in [((63.5, 63.5), 0.0), ((58.3, 70.8), 0.0), ((70.0, 50.2), 0.43)] {
            let (mask, depth) = synthetic(center, 9.0, hole_depth);
            let est = estimate_hole_center(&mask, &depth, &intr(), &Pose::identity(), &MODEL).unwrap();
            let (u, v) = est.center_pixel;
            assert!((u - center.0).hypot(v - center.1) <= 1.0, "{:?} vs {center:?}", est.center_pixel);
            assert!((est.top_depth - 0.4).abs() < 1e-6);
            assert!(est.confidence > 0.0 && est.confidence <= 1.0);
        }
    }

    #[test]
    fn no_depth_discontinuity_is_no_hole() {
        let (mut mask, mut depth) = synthetic((64.0, 64.0), 9.0, 0.0);
        for (m, d) in mask.data.iter_mut().zip(&mut depth) {
            if *d == 0.0 && *m == false {
                *d = 0.4;
            }
        }
        // the disc stays unmasked but shares the top depth
        for v in 20..110 {
            for u in 24..104 {
                mask.data[v * 128 + u] = true;
            }
        }
        let r = estimate_hole_center(&mask, &depth, &intr(), &Pose::identity(), &MODEL);
        assert!(matches!(r, Err(BaselineError::NoHole)), "{r:?}");
    }

    #[test]
    fn empty_mask_is_no_block() {
        let mask = Mask::new(128, 128);
        let depth = vec![0.4; 128 * 128];
        let r = estimate_hole_center(&mask, &depth, &intr(), &Pose::identity(), &MODEL);
        assert!(matches!(r, Err(BaselineError::NoBlock)));
    }

    #[test]
    fn top_down_render_locates_hole_axis() {
        // camera directly above the rim at survey height; oracle = geometric hole axis
        let env = Env::new(EnvConfig::default()).unwrap();
        let cfg = env.config();
        let params = SegmentationParams::from_range(&cfg.color_ranges.block, 0.85);
        let hole = HoleModel {
            radius: cfg.geometry.block.hole.radius,
            depth: cfg.geometry.block.hole.depth,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (x, y, yaw) in [(-0.49, -0.13, 0.0), (-0.62, -0.05, 0.4), (-0.35, -0.2, -1.0)] {
            let (_, mut state) = env.reset_with_block(Pose::from_xyz_yaw(x, y, 0.0, yaw), &mut rng).unwrap();
            let rim = cfg.geometry.block.height();
            let home_tip = env.tip_pose(&state).unwrap().position;
            let offset = env.camera_pose(&state).unwrap().position - home_tip;
            let survey = Vector3::new(x - offset.x, y - offset.y, rim + 0.03);
            env.place_tip(&mut state, &survey).unwrap();
            let frame = env.capture(&state, &mut rng).unwrap();
            let mask = segment_block(frame.width, frame.height, &frame.rgb, &params);
            let camera = env.camera_pose(&state).unwrap();
            let est = estimate_hole_center(&mask, &frame.depth, &cfg.intrinsics, &camera, &hole).unwrap();
            let axis = state.block_pose.transform_point(&cfg.geometry.rim_in_block());
            let err = (est.center_world - axis).xy().norm();
            assert!(err <= 0.002, "lateral error {err}");
            assert!((est.center_world.z - rim).abs() <= 0.002);
            assert!(est.confidence > 0.8, "{}", est.confidence);
        }
    }
}
