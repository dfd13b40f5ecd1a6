use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{CameraIntrinsics, RgbdImage};
use crate::geometry::{ArmModel, GeometryError, Pose, Rgb, SceneGeometry, SceneState};

const EPS: f64 = 1e-9;

/// Which primitive produced a pixel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Background,
    Table,
    Block,
    Peg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderSettings {
    /// Direction from the surface toward the light, world frame (normalized on use).
    pub light_direction: [f64; 3],
    pub table_color: Rgb,
    pub background: Rgb,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            light_direction: [0.3, -0.2, 1.0],
            table_color: [120, 120, 120],
            background: [0, 0, 0],
        }
    }
}

/// Everything the renderer needs to know about the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderScene {
    pub block_pose: Pose,
    pub block_color: Rgb,
    /// Peg tip pose; `None` renders the scene without the peg.
    pub peg_tip: Option<Pose>,
    pub peg_color: Rgb,
}

impl RenderScene {
    pub fn from_state(arm: &ArmModel, state: &SceneState) -> Result<Self, GeometryError> {
        Ok(Self {
            block_pose: state.block_pose,
            block_color: state.block_color,
            peg_tip: Some(arm.forward_kinematics(&state.joints)?),
            peg_color: state.peg_color,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Ray parameter; equals camera-frame depth for rays built by the renderer.
    pub t: f64,
    pub normal: Vector3<f64>,
    pub label: Label,
}

#[derive(Debug, Clone, Copy)]
pub struct Ray {
    pub origin: Vector3<f64>,
    pub dir: Vector3<f64>,
}

impl Ray {
    fn to_local(&self, frame: &Pose) -> Ray {
        Ray {
            origin: frame.inverse_transform_point(&self.origin),
            dir: frame.orientation.inverse() * self.dir,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Surface {
    Wall,
    Cap(f64),
}

/// Parameter interval of the ray inside an infinite z-aligned cylinder, or
/// `None` if it misses. A ray parallel to the axis gives the whole line.
fn cylinder_interval(ray: &Ray, cx: f64, cy: f64, radius: f64) -> Option<(f64, f64)> {
    let ox = ray.origin.x - cx;
    let oy = ray.origin.y - cy;
    let (dx, dy) = (ray.dir.x, ray.dir.y);
    let a = dx * dx + dy * dy;
    let c = ox * ox + oy * oy - radius * radius;
    if a < 1e-300 {
        return if c <= 0.0 {
            Some((f64::NEG_INFINITY, f64::INFINITY))
        } else {
            None
        };
    }
    let b = ox * dx + oy * dy;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some(((-b - s) / a, (-b + s) / a))
}

/// Interval of the ray within `lo <= z <= hi`, each end tagged with the plane it crossed.
fn slab_interval(o: f64, d: f64, lo: f64, hi: f64) -> Option<((f64, f64), (f64, f64))> {
    if d.abs() < 1e-300 {
        return if o >= lo && o <= hi {
            Some(((f64::NEG_INFINITY, f64::NAN), (f64::INFINITY, f64::NAN)))
        } else {
            None
        };
    }
    let t_lo = (lo - o) / d;
    let t_hi = (hi - o) / d;
    if t_lo < t_hi {
        Some(((t_lo, lo), (t_hi, hi)))
    } else {
        Some(((t_hi, hi), (t_lo, lo)))
    }
}

/// Ray against a finite z-aligned cylinder `r <= radius, lo <= z <= hi`;
/// returns entry and exit with the surface crossed at each.
fn finite_cylinder(ray: &Ray, cx: f64, cy: f64, radius: f64, lo: f64, hi: f64) -> Option<[(f64, Surface); 2]> {
    let (w0, w1) = cylinder_interval(ray, cx, cy, radius)?;
    let ((s0, z0), (s1, z1)) = slab_interval(ray.origin.z, ray.dir.z, lo, hi)?;
    let entry = if w0 > s0 { (w0, Surface::Wall) } else { (s0, Surface::Cap(z0)) };
    let exit = if w1 < s1 { (w1, Surface::Wall) } else { (s1, Surface::Cap(z1)) };
    if entry.0 <= exit.0 {
        Some([entry, exit])
    } else {
        None
    }
}

fn wall_normal(ray: &Ray, t: f64, cx: f64, cy: f64) -> Vector3<f64> {
    let p = ray.origin + ray.dir * t;
    Vector3::new(p.x - cx, p.y - cy, 0.0).normalize()
}

pub fn intersect_table(ray: &Ray) -> Option<Hit> {
    if ray.dir.z.abs() < 1e-300 {
        return None;
    }
    let t = -ray.origin.z / ray.dir.z;
    (t > EPS).then(|| Hit {
        t,
        normal: Vector3::new(0.0, 0.0, ray.origin.z.signum()),
        label: Label::Table,
    })
}

/// Block solid = box minus hole cylinder, by interval subtraction along the ray.
pub fn intersect_block(ray: &Ray, geometry: &SceneGeometry, block_pose: &Pose) -> Option<Hit> {
    let local = ray.to_local(block_pose);
    let block = &geometry.block;
    let half = block.half_extents();

    // slab test for the box, tracking the entry face normal
    let mut t0 = f64::NEG_INFINITY;
    let mut t1 = f64::INFINITY;
    let mut n0 = Vector3::zeros();
    let bounds = [(-half.x, half.x), (-half.y, half.y), (0.0, block.height())];
    for axis in 0..3 {
        let (o, d) = (local.origin[axis], local.dir[axis]);
        let (lo, hi) = bounds[axis];
        if d.abs() < 1e-300 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let (mut ta, mut tb) = ((lo - o) / d, (hi - o) / d);
        let mut sign = -1.0;
        if ta > tb {
            std::mem::swap(&mut ta, &mut tb);
            sign = 1.0;
        }
        if ta > t0 {
            t0 = ta;
            n0 = Vector3::zeros();
            n0[axis] = sign;
        }
        t1 = t1.min(tb);
    }
    if t0 > t1 || t1 <= EPS {
        return None;
    }

    let c = block.hole_center();
    // the hole is open upward, so extend it well above the top face
    let hole = finite_cylinder(
        &local,
        c.x,
        c.y,
        block.hole.radius,
        block.hole_bottom(),
        block.height() + 1.0,
    );
    // solid = [t0, t1] \ [c0, c1]: at most two pieces, take the first one ahead of the origin
    let (c0, c1, exit) = match hole {
        Some([(c0, _), (c1, exit)]) => (c0, c1, exit),
        None => (f64::INFINITY, f64::INFINITY, Surface::Wall),
    };
    let local_hit = if (t0 < c0 || t0 >= c1) && t0 > EPS {
        (t0, n0)
    } else if c1 > t0 && c1 < t1 && c1 > EPS {
        let normal = match exit {
            Surface::Wall => -wall_normal(&local, c1, c.x, c.y),
            Surface::Cap(_) => Vector3::z(),
        };
        (c1, normal)
    } else {
        return None;
    };
    Some(Hit {
        t: local_hit.0,
        normal: block_pose.rotate(&local_hit.1),
        label: Label::Block,
    })
}

/// Peg: cylinder from the tip back along the tip frame's −z axis.
pub fn intersect_peg(ray: &Ray, geometry: &SceneGeometry, tip: &Pose) -> Option<Hit> {
    let local = ray.to_local(tip);
    let peg = &geometry.peg;
    let [(t, surface), _] = finite_cylinder(&local, 0.0, 0.0, peg.radius, -peg.length, 0.0)?;
    if t <= EPS {
        return None;
    }
    let n = match surface {
        Surface::Wall => wall_normal(&local, t, 0.0, 0.0),
        Surface::Cap(z) if z >= 0.0 => Vector3::z(),
        Surface::Cap(_) => -Vector3::z(),
    };
    Some(Hit {
        t,
        normal: tip.rotate(&n),
        label: Label::Peg,
    })
}

pub fn cast(ray: &Ray, geometry: &SceneGeometry, scene: &RenderScene) -> Option<Hit> {
    let mut best = intersect_table(ray);
    let mut consider = |h: Option<Hit>| {
        if let Some(h) = h {
            if best.is_none_or(|b| h.t < b.t) {
                best = Some(h);
            }
        }
    };
    consider(intersect_block(ray, geometry, &scene.block_pose));
    if let Some(tip) = &scene.peg_tip {
        consider(intersect_peg(ray, geometry, tip));
    }
    best
}

fn shade(color: Rgb, normal: &Vector3<f64>, light: &Vector3<f64>) -> Rgb {
    let k = 0.3 + 0.7 * normal.dot(light).max(0.0);
    color.map(|c| (f64::from(c) * k).round().clamp(0.0, 255.0) as u8)
}

/// Render with a per-pixel label map alongside the image.
pub fn render_labeled(
    geometry: &SceneGeometry,
    scene: &RenderScene,
    intrinsics: &CameraIntrinsics,
    camera: &Pose,
    settings: &RenderSettings,
) -> (RgbdImage, Vec<Label>) {
    let mut image = RgbdImage::new(intrinsics.width, intrinsics.height);
    let mut labels = vec![Label::Background; intrinsics.width * intrinsics.height];
    let light = Vector3::from(settings.light_direction).normalize();
    for v in 0..intrinsics.height {
        for u in 0..intrinsics.width {
            let dir = camera.rotate(&intrinsics.ray_direction(u as f64, v as f64));
            let ray = Ray {
                origin: camera.position,
                dir,
            };
            let idx = v * intrinsics.width + u;
            let (color, depth, label) = match cast(&ray, geometry, scene) {
                None => (settings.background, 0.0, Label::Background),
                Some(hit) => {
                    let base = match hit.label {
                        Label::Table => settings.table_color,
                        Label::Block => scene.block_color,
                        Label::Peg => scene.peg_color,
                        Label::Background => settings.background,
                    };
                    let depth = if intrinsics.depth_is_valid(hit.t) { hit.t } else { 0.0 };
                    (shade(base, &hit.normal, &light), depth, hit.label)
                }
            };
            image.rgb[3 * idx..3 * idx + 3].copy_from_slice(&color);
            image.depth[idx] = depth as f32;
            labels[idx] = label;
        }
    }
    (image, labels)
}

pub fn render(
    geometry: &SceneGeometry,
    scene: &RenderScene,
    intrinsics: &CameraIntrinsics,
    camera: &Pose,
    settings: &RenderSettings,
) -> RgbdImage {
    render_labeled(geometry, scene, intrinsics, camera, settings).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::UnitQuaternion;
    use std::f64::consts::PI;

    /// Camera at `(x, y, z)` looking straight down (optical z = world −z).
    fn down_camera(x: f64, y: f64, z: f64) -> Pose {
        Pose::new(
            Vector3::new(x, y, z),
            UnitQuaternion::from_axis_angle(&Vector3::x_axis(), PI),
        )
    }

    fn scene_at(block: Pose) -> RenderScene {
        RenderScene {
            block_pose: block,
            block_color: [200, 120, 30],
            peg_tip: None,
            peg_color: [30, 80, 200],
        }
    }

    fn far_block() -> RenderScene {
        scene_at(Pose::from_translation(50.0, 50.0, 0.0))
    }

    #[test]
    fn bare_table_from_half_a_meter() {
        let k = CameraIntrinsics::default();
        let g = SceneGeometry::default();
        let img = render(&g, &far_block(), &k, &down_camera(0.0, 0.0, 0.5), &RenderSettings::default());
        assert_eq!(img.depth_at(64, 64), 0.5);
        // a perpendicular plane has constant z-depth
        assert!(img.depth.iter().all(|d| (*d - 0.5).abs() < 1e-6));
    }

    #[test]
    fn looking_at_the_sky_sees_nothing() {
        let k = CameraIntrinsics::default();
        let g = SceneGeometry::default();
        let settings = RenderSettings::default();
        let up = Pose::from_translation(0.0, 0.0, 0.5);
        let img = render(&g, &far_block(), &k, &up, &settings);
        assert!(img.depth.iter().all(|d| *d == 0.0));
        assert!(img.rgb.chunks(3).all(|p| p == settings.background));
    }

    #[test]
    fn boresight_through_hole_sees_the_hole_bottom() {
        let k = CameraIntrinsics::default();
        let g = SceneGeometry::default();
        let (bx, by) = (-0.4, 0.1);
        let scene = scene_at(Pose::from_xyz_yaw(bx, by, 0.0, 0.3));
        let cam_h = 0.40;
        let img = render(&g, &scene, &k, &down_camera(bx, by, cam_h), &RenderSettings::default());
        let top = cam_h - g.block.height();
        let bottom = top + g.block.hole.depth;
        // analytic oracle: a pixel ray sees the bottom when it stays inside the
        // hole radius all the way down, the top face when it lands outside the rim
        let mut disc = 0;
        for v in 0..k.height {
            for u in 0..k.width {
                let d = k.ray_direction(u as f64, v as f64);
                let r_top = d.xy().norm() * top;
                let r_bottom = d.xy().norm() * bottom;
                let depth = f64::from(img.depth_at(u, v));
                if r_bottom < g.block.hole.radius - 1e-6 {
                    assert!((depth - bottom).abs() < 1e-6, "({u},{v}) {depth}");
                    disc += 1;
                } else if r_top > g.block.hole.radius + 1e-6 && r_top < 0.05 {
                    assert!((depth - top).abs() < 1e-6);
                } else if r_top < g.block.hole.radius - 1e-6 {
                    // hits the wall somewhere between rim and bottom
                    assert!(depth > top && depth < bottom + 1e-6);
                }
            }
        }
        assert!(disc > 20);
    }

    #[test]
    fn peg_occludes_the_block() {
        let k = CameraIntrinsics::default();
        let g = SceneGeometry::default();
        let mut scene = scene_at(Pose::from_translation(0.0, 0.0, 0.0));
        let tip = down_camera(0.0, 0.0, 0.2);
        scene.peg_tip = Some(tip);
        let (img, labels) = render_labeled(&g, &scene, &k, &down_camera(0.0, 0.0, 0.5), &RenderSettings::default());
        let c = img.index(64, 64);
        assert_eq!(labels[c], Label::Peg);
        // top cap of the peg is at tip + length
        let expect = 0.5 - (0.2 + g.peg.length);
        assert!((f64::from(img.depth[c]) - expect).abs() < 1e-6);
    }

    #[test]
    fn hand_picked_rays_match_closed_forms() {
        let g = SceneGeometry::default();
        let block = Pose::from_xyz_yaw(1.0, 2.0, 0.0, 0.0);
        let scene = scene_at(block);
        let h = g.block.height();
        let rays = [
            // straight down onto the top face outside the hole
            (Vector3::new(1.04, 2.0, 1.0), Vector3::new(0.0, 0.0, -1.0), 1.0 - h),
            // straight down the hole axis onto its bottom
            (Vector3::new(1.0, 2.0, 1.0), Vector3::new(0.0, 0.0, -1.0), 1.0 - (h - g.block.hole.depth)),
            // horizontal into the +x side face
            (Vector3::new(2.0, 2.0, 0.03), Vector3::new(-1.0, 0.0, 0.0), 1.0 - 0.06),
            // horizontal into the −y side face
            (Vector3::new(1.0, 1.0, 0.01), Vector3::new(0.0, 1.0, 0.0), 1.0 - 0.06),
            // down onto the table past the block
            (Vector3::new(1.5, 2.0, 0.7), Vector3::new(0.0, 0.0, -1.0), 0.7),
            // oblique ray onto the table
            (Vector3::new(0.0, 0.0, 1.0), Vector3::new(0.0, 1.0, -1.0), 1.0),
            // hole wall: start inside the hole below the rim, move sideways
            (Vector3::new(1.0, 2.0, h - 0.01), Vector3::new(1.0, 0.0, 0.0), g.block.hole.radius),
            // hole wall from a slanted ray through the rim
            (Vector3::new(1.0, 2.0, h + 0.005), Vector3::new(1.0, 0.0, -1.0), g.block.hole.radius),
            // top face near the rim, off-axis
            (Vector3::new(1.0, 2.013, 0.5), Vector3::new(0.0, 0.0, -1.0), 0.5 - h),
            // miss everything going up
            (Vector3::new(1.0, 2.0, 0.5), Vector3::new(0.0, 0.0, 1.0), f64::NAN),
        ];
        for (origin, dir, expect) in rays {
            let hit = cast(&Ray { origin, dir }, &g, &scene);
            if expect.is_nan() {
                assert!(hit.is_none());
            } else {
                let t = hit.unwrap().t;
                assert!((t - expect).abs() < 1e-6, "{origin:?} {dir:?}: {t} vs {expect}");
            }
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let k = CameraIntrinsics::default();
        let g = SceneGeometry::default();
        let mut scene = scene_at(Pose::from_xyz_yaw(0.02, -0.01, 0.0, 0.2));
        scene.peg_tip = Some(down_camera(0.01, 0.0, 0.12));
        let cam = down_camera(0.0, 0.05, 0.35);
        let a = render(&g, &scene, &k, &cam, &RenderSettings::default());
        let b = render(&g, &scene, &k, &cam, &RenderSettings::default());
        assert_eq!(a, b);
    }
}
