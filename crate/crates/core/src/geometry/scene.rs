use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeometryError, Joints, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PegSpec {
    pub radius: f64,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleSpec {
    pub radius: f64,
    pub depth: f64,
    /// Axis position in the block frame (x, y).
    #[serde(default)]
    pub center: [f64; 2],
}

/// Block frame: origin at the center of the bottom face, z up. The hole is a
/// vertical blind cylinder cut from the top face.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    /// Full side lengths (x, y, z), meters.
    pub extents: [f64; 3],
    pub hole: HoleSpec,
}

impl BlockSpec {
    pub fn height(&self) -> f64 {
        self.extents[2]
    }

    pub fn half_extents(&self) -> Vector3<f64> {
        Vector3::new(self.extents[0], self.extents[1], self.extents[2]) * 0.5
    }

    pub fn hole_center(&self) -> Vector2<f64> {
        Vector2::new(self.hole.center[0], self.hole.center[1])
    }

    pub fn hole_bottom(&self) -> f64 {
        self.height() - self.hole.depth
    }

    /// Point-membership test for the block solid (box minus hole) in the block frame.
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        let h = self.half_extents();
        let in_box = p.x.abs() < h.x && p.y.abs() < h.y && p.z > 0.0 && p.z < self.height();
        if !in_box {
            return false;
        }
        let r = (p.xy() - self.hole_center()).norm();
        !(r < self.hole.radius && p.z > self.hole_bottom())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneGeometry {
    pub peg: PegSpec,
    pub block: BlockSpec,
    /// Depth of the success pose below the hole rim.
    pub insertion_depth: f64,
}

impl Default for SceneGeometry {
    fn default() -> Self {
        Self {
            peg: PegSpec {
                radius: 0.010,
                length: 0.060,
            },
            block: BlockSpec {
                extents: [0.12, 0.12, 0.06],
                hole: HoleSpec {
                    radius: 0.012,
                    depth: 0.030,
                    center: [0.0, 0.0],
                },
            },
            insertion_depth: 0.010,
        }
    }
}

impl SceneGeometry {
    pub fn clearance(&self) -> f64 {
        self.block.hole.radius - self.peg.radius
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let invalid = |m: &str| Err(GeometryError::Invalid(m.to_string()));
        if !(self.peg.radius > 0.0 && self.peg.length > 0.0) {
            return invalid("peg: radius and length must be positive");
        }
        if self.block.extents.iter().any(|e| !(*e > 0.0)) {
            return invalid("block.extents: must be positive");
        }
        if !(self.clearance() > 0.0) {
            return invalid("block.hole.radius: must exceed peg.radius");
        }
        if !(self.block.hole.depth > 0.0 && self.block.hole.depth <= self.block.height()) {
            return invalid("block.hole.depth: must be in (0, block height]");
        }
        let h = self.block.half_extents();
        let c = self.block.hole_center();
        if c.x.abs() + self.block.hole.radius >= h.x || c.y.abs() + self.block.hole.radius >= h.y {
            return invalid("block.hole.center: hole must lie inside the top face");
        }
        if !(self.insertion_depth >= 0.0 && self.insertion_depth < self.block.hole.depth) {
            return invalid("insertion_depth: must be in [0, hole depth)");
        }
        Ok(())
    }

    /// Success point (on the hole axis, `insertion_depth` below the rim) in the block frame.
    pub fn target_in_block(&self) -> Vector3<f64> {
        let c = self.block.hole_center();
        Vector3::new(c.x, c.y, self.block.height() - self.insertion_depth)
    }

    /// Hole rim center in the block frame.
    pub fn rim_in_block(&self) -> Vector3<f64> {
        let c = self.block.hole_center();
        Vector3::new(c.x, c.y, self.block.height())
    }
}

pub type Rgb = [u8; 3];

/// Complete simulation state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneState {
    pub joints: Joints,
    pub block_pose: Pose,
    pub block_color: Rgb,
    pub peg_color: Rgb,
    pub in_collision: bool,
    pub time_step: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactReport {
    pub colliding: bool,
    /// Tip penetration below the rim while the peg is laterally inside the hole.
    pub peg_inside_hole_depth: f64,
}

/// Contact between the peg and {block solid, table plane z = 0}.
///
/// The peg is modeled as a vertical cylinder hanging above `tip`: the arm
/// controller holds the tool orientation pointing down, so only the tip
/// position enters the test.
pub fn check_collision(geometry: &SceneGeometry, tip: &Pose, block_pose: &Pose) -> ContactReport {
    let peg = &geometry.peg;
    let block = &geometry.block;
    let table_hit = tip.position.z < 0.0;

    let local = block_pose.inverse_transform_point(&tip.position);
    let center = local.xy();
    let (z_lo, z_hi) = (local.z, local.z + peg.length);
    let half = block.half_extents();

    let overlaps_height = |lo: f64, hi: f64| z_lo < hi && z_hi > lo;
    // closest point of the footprint rectangle to the peg axis
    let dx = (center.x.abs() - half.x).max(0.0);
    let dy = (center.y.abs() - half.y).max(0.0);
    let disc_meets_rect = dx * dx + dy * dy < peg.radius * peg.radius;

    let hole_offset = (center - block.hole_center()).norm();
    let inside_hole = hole_offset + peg.radius <= block.hole.radius;

    let block_hit = disc_meets_rect
        && (
            // solid slab under the hole
            overlaps_height(0.0, block.hole_bottom())
            // perforated slab: only a peg not contained in the hole disc touches it
            || (overlaps_height(block.hole_bottom(), block.height()) && !inside_hole)
        );

    let depth = if inside_hole && local.z < block.height() {
        block.height() - local.z
    } else {
        0.0
    };
    ContactReport {
        colliding: table_hit || block_hit,
        peg_inside_hole_depth: depth.max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetError {
    /// Tip to success point, meters.
    pub distance: f64,
    /// Tip minus hole axis, in the block's horizontal frame.
    pub xy_error: Vector2<f64>,
    /// Full 3-D offset tip minus target, in the block frame.
    pub offset: Vector3<f64>,
}

pub fn target_error(geometry: &SceneGeometry, tip: &Pose, block_pose: &Pose) -> TargetError {
    let local = block_pose.inverse_transform_point(&tip.position);
    let offset = local - geometry.target_in_block();
    TargetError {
        distance: offset.norm(),
        xy_error: offset.xy(),
        offset,
    }
}

/// Success point in world coordinates.
pub fn target_point(geometry: &SceneGeometry, block_pose: &Pose) -> Vector3<f64> {
    block_pose.transform_point(&geometry.target_in_block())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tip_at(block: &Pose, local: Vector3<f64>) -> Pose {
        Pose::new(
            block.transform_point(&local),
            nalgebra::UnitQuaternion::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI),
        )
    }

    /// 1 mm point-sampling oracle over the peg volume, optionally inflated.
    pub(crate) fn sampled_overlap(g: &SceneGeometry, tip_local: Vector3<f64>, inflate: f64) -> bool {
        let r = g.peg.radius + inflate;
        let step = 0.001;
        let n_r = (r / step).ceil() as i32;
        let n_z = ((g.peg.length + inflate) / step).ceil() as i32;
        for iz in 0..=n_z {
            let z = tip_local.z - inflate + (iz as f64) * step;
            for ix in -n_r..=n_r {
                for iy in -n_r..=n_r {
                    let (ox, oy) = (ix as f64 * step, iy as f64 * step);
                    if ox * ox + oy * oy > r * r {
                        continue;
                    }
                    let p = Vector3::new(tip_local.x + ox, tip_local.y + oy, z);
                    if g.block.contains(&p) {
                        return true;
                    }
                }
            }
        }
        false
    }

    #[test]
    fn far_above_block_is_free() {
        let g = SceneGeometry::default();
        let block = Pose::from_xyz_yaw(-0.5, -0.1, 0.0, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let local = Vector3::new(
                rng.random_range(-0.1..0.1),
                rng.random_range(-0.1..0.1),
                g.block.height() + 0.10,
            );
            let c = check_collision(&g, &tip_at(&block, local), &block);
            assert!(!c.colliding);
            assert_eq!(c.peg_inside_hole_depth, 0.0);
        }
    }

    #[test]
    fn coaxial_peg_inside_hole_is_free() {
        let g = SceneGeometry::default();
        let block = Pose::from_xyz_yaw(-0.4, 0.05, 0.0, -0.7);
        let local = Vector3::new(0.0, 0.0, g.block.height() - 0.01);
        let c = check_collision(&g, &tip_at(&block, local), &block);
        assert!(!c.colliding);
        assert!((c.peg_inside_hole_depth - 0.01).abs() < 1e-12);
    }

    #[test]
    fn offset_peg_below_top_collides() {
        let g = SceneGeometry::default();
        let block = Pose::from_xyz_yaw(-0.4, 0.05, 0.0, 0.0);
        let local = Vector3::new(g.clearance() + 0.0005, 0.0, g.block.height() - 0.005);
        let c = check_collision(&g, &tip_at(&block, local), &block);
        assert!(c.colliding);
        assert!(sampled_overlap(&g, local, 0.0));
    }

    #[test]
    fn hole_bottom_and_table_collide() {
        let g = SceneGeometry::default();
        let block = Pose::from_xyz_yaw(0.0, 0.0, 0.0, 0.0);
        let local = Vector3::new(0.0, 0.0, g.block.hole_bottom() - 0.001);
        assert!(check_collision(&g, &tip_at(&block, local), &block).colliding);
        let beside = Vector3::new(0.5, 0.0, -0.001);
        assert!(check_collision(&g, &tip_at(&block, beside), &block).colliding);
    }

    #[test]
    fn analytic_test_agrees_with_sampling_oracle() {
        let g = SceneGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let block = Pose::from_xyz_yaw(-0.45, -0.12, 0.0, 0.4);
        let h = g.block.height();
        for i in 0..50 {
            // half the samples near the hole, half around the outer faces
            let local = if i % 2 == 0 {
                Vector3::new(
                    rng.random_range(-0.006..0.006),
                    rng.random_range(-0.006..0.006),
                    rng.random_range(h - 0.04..h + 0.01),
                )
            } else {
                Vector3::new(
                    rng.random_range(-0.08..0.08),
                    rng.random_range(-0.08..0.08),
                    rng.random_range(0.005..h + 0.01),
                )
            };
            let c = check_collision(&g, &tip_at(&block, local), &block);
            if sampled_overlap(&g, local, 0.0) {
                assert!(c.colliding, "false negative at {local:?}");
            }
            if c.colliding {
                assert!(sampled_overlap(&g, local, 0.002), "false positive at {local:?}");
            }
        }
    }

    #[test]
    fn target_error_cases() {
        let g = SceneGeometry::default();
        let block = Pose::from_xyz_yaw(-0.4, 0.1, 0.0, 0.9);
        let at = tip_at(&block, g.target_in_block());
        let e = target_error(&g, &at, &block);
        assert!(e.distance < 1e-12 && e.xy_error.norm() < 1e-12);

        let shifted = tip_at(&block, g.target_in_block() + Vector3::new(0.003, 0.0, 0.0));
        let e = target_error(&g, &shifted, &block);
        assert!((e.distance - 0.003).abs() < 1e-12);
        assert!((e.xy_error - Vector2::new(0.003, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn target_distance_matches_matrix_oracle() {
        let g = SceneGeometry::default();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let yaw: f64 = rng.random_range(-3.0..3.0);
            let (bx, by) = (rng.random_range(-0.7..-0.3), rng.random_range(-0.3..0.1));
            let block = Pose::from_xyz_yaw(bx, by, 0.0, yaw);
            let tip = Pose::from_translation(
                rng.random_range(-0.8..-0.2),
                rng.random_range(-0.4..0.2),
                rng.random_range(0.0..0.4),
            );
            // target via an explicit homogeneous matrix
            let (s, c) = yaw.sin_cos();
            let t = g.target_in_block();
            let world = Vector3::new(bx + c * t.x - s * t.y, by + s * t.x + c * t.y, t.z);
            let e = target_error(&g, &tip, &block);
            assert!((e.distance - (tip.position - world).norm()).abs() < 1e-12);
            let zero = e.distance == 0.0;
            assert_eq!(zero, e.xy_error.norm() == 0.0 && e.offset.z == 0.0);
        }
    }

    #[test]
    fn default_geometry_is_valid() {
        let g = SceneGeometry::default();
        g.validate().unwrap();
        assert!((g.clearance() - 0.002).abs() < 1e-12);
        let mut bad = g;
        bad.block.hole.radius = 0.009;
        assert!(bad.validate().is_err());
    }
}
