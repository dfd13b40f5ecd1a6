use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BlockPlacement, HarnessError};
use crate::augment::{contact_sheet, preview_tiles, to_grayscale, AugSpec, Channel, ChannelKind, Plane};
use crate::env::Env;
use crate::geometry::{Joints, Rgb};
use crate::render::{read_pnm, write_pgm16, write_pgm8, Pnm};

/// Scene description for `render-preview`. Without `joints` the arm starts at
/// home; `tip` then drives the peg tip to that point. Unset colors are drawn
/// from the configured ranges with `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseFile {
    /// Experiment config supplying the environment, relative to the pose file.
    #[serde(default)]
    pub config: Option<PathBuf>,
    pub block: BlockPlacement,
    #[serde(default)]
    pub joints: Option<Joints>,
    #[serde(default)]
    pub tip: Option<[f64; 3]>,
    #[serde(default)]
    pub block_color: Option<Rgb>,
    #[serde(default)]
    pub peg_color: Option<Rgb>,
    #[serde(default)]
    pub seed: u64,
}

impl PoseFile {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Parse(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut pose = Self::from_toml_str(&std::fs::read_to_string(path)?)?;
        if let (Some(cfg), Some(dir)) = (&pose.config, path.parent()) {
            pose.config = Some(dir.join(cfg));
        }
        Ok(pose)
    }
}

fn to_mm(depth: &[f32]) -> Vec<u16> {
    depth
        .iter()
        .map(|d| (f64::from(*d) * 1000.0).round().clamp(0.0, 65535.0) as u16)
        .collect()
}

/// Render the described scene into `dir`: the full-resolution color frame,
/// its depth in millimeters, and each channel of the policy observation.
/// Returns the written files and a one-line status.
pub fn render_preview(env: &Env, pose: &PoseFile, dir: &Path) -> Result<(Vec<PathBuf>, String), HarnessError> {
    std::fs::create_dir_all(dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(pose.seed);
    let (_, mut state) = env.reset_with_block(pose.block.pose(), &mut rng)?;
    if let Some(j) = pose.joints {
        env.config().arm.check_joints(&j).map_err(|e| HarnessError::Validation(format!("joints: {e}")))?;
        state.joints = j;
    } else if let Some(t) = pose.tip {
        env.place_tip(&mut state, &Vector3::from(t))?;
    }
    if let Some(c) = pose.block_color {
        state.block_color = c;
    }
    if let Some(c) = pose.peg_color {
        state.peg_color = c;
    }

    let mut files = vec![];
    let frame = env.capture(&state, &mut rng)?;
    let rgb = dir.join("rgb.ppm");
    frame.write_ppm(BufWriter::new(File::create(&rgb)?))?;
    files.push(rgb);
    let depth = dir.join("depth_mm.pgm");
    frame.write_depth_pgm(BufWriter::new(File::create(&depth)?))?;
    files.push(depth);

    let obs = env.observe(&state, &mut rng)?;
    if let Some(img) = &obs.image {
        let n = img.width * img.height;
        let cfg = env.config();
        let names = [
            cfg.has(crate::env::Modality::Rgb).then_some("obs_gray.pgm"),
            cfg.has(crate::env::Modality::Depth).then_some("obs_depth.pgm"),
        ];
        for (c, name) in names.into_iter().flatten().enumerate() {
            let bytes: Vec<u8> = img.data[c * n..(c + 1) * n]
                .iter()
                .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect();
            let path = dir.join(name);
            write_pgm8(BufWriter::new(File::create(&path)?), img.width, img.height, &bytes)?;
            files.push(path);
        }
    }
    let err = env.target_error(&state)?;
    let tip = env.tip_pose(&state)?.position;
    let status = format!(
        "tip ({:.4}, {:.4}, {:.4}) m, distance to target {:.1} mm, xy error ({:.1}, {:.1}) mm, colliding {}",
        tip.x,
        tip.y,
        tip.z,
        1000.0 * err.distance,
        1000.0 * err.xy_error.x,
        1000.0 * err.xy_error.y,
        crate::geometry::check_collision(&env.config().geometry, &env.tip_pose(&state)?, &state.block_pose).colliding,
    );
    Ok((files, status))
}

/// Load a PNM as the plane `spec` expects: color or 8-bit gray for the gray
/// channel, 16-bit millimeter depth for the depth channel.
pub fn load_plane(path: &Path, kind: ChannelKind) -> Result<Plane, HarnessError> {
    let pnm = read_pnm(File::open(path)?).map_err(|e| HarnessError::Parse(e.to_string()))?;
    let plane = match (pnm, kind) {
        (Pnm::Rgb { width, height, data }, ChannelKind::Gray) => to_grayscale(width, height, &data)?,
        (Pnm::Gray8 { width, height, data }, ChannelKind::Gray) => Plane::from_u8(width, height, &data),
        (Pnm::Gray16 { width, height, data }, ChannelKind::Depth) => {
            Plane::new(width, height, data.iter().map(|mm| f32::from(*mm) / 1000.0).collect())?
        }
        (_, kind) => {
            return Err(HarnessError::Validation(format!(
                "input image format does not match the {kind:?} channel (gray: P5 8-bit or P6; depth: P5 16-bit mm)"
            )))
        }
    };
    Ok(plane)
}

/// Write a contact sheet of `spec` applied to `input` into `dir`: the input,
/// every op alone, then four draws of the whole pipeline.
pub fn augment_preview(
    input: &Path,
    spec: &AugSpec,
    seed: u64,
    depth_max: f32,
    dir: &Path,
) -> Result<(PathBuf, Vec<String>), HarnessError> {
    let img = load_plane(input, spec.channel)?;
    let ch = match spec.channel {
        ChannelKind::Gray => Channel::Gray,
        ChannelKind::Depth => Channel::Depth { max: depth_max },
    };
    let tiles = preview_tiles(&img, ch, spec, seed, 4)?;
    let labels = tiles.iter().map(|(l, _)| l.clone()).collect();
    let planes: Vec<Plane> = tiles.into_iter().map(|(_, p)| p).collect();
    std::fs::create_dir_all(dir)?;
    let path = dir.join("augment_sheet.pgm");
    let out = BufWriter::new(File::create(&path)?);
    match spec.channel {
        ChannelKind::Gray => {
            let sheet = contact_sheet(&planes, 4, 4, 255.0)?;
            write_pgm8(out, sheet.width, sheet.height, &sheet.to_u8())?;
        }
        ChannelKind::Depth => {
            let sheet = contact_sheet(&planes, 4, 4, 0.0)?;
            write_pgm16(out, sheet.width, sheet.height, &to_mm(&sheet.data))?;
        }
    }
    Ok((path, labels))
}
