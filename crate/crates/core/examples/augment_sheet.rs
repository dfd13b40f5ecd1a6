//! Apply the default gray and depth augmentation pipelines to a rendered
//! observation and write contact sheets (input, each op alone, pipeline draws).
//!
//! cargo run --release --example augment_sheet -- [seed] [out_dir]

use std::fs::File;
use std::path::PathBuf;

use peghole::augment::{contact_sheet, preview_tiles, to_grayscale, AugSpec, Channel, Plane};
use peghole::env::{Env, EnvConfig};
use peghole::geometry::Pose;
use peghole::render::{write_pgm16, write_pgm8};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "runs/augment".into()));
    std::fs::create_dir_all(&out)?;

    let env = Env::new(EnvConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, state) = env.reset_with_block(Pose::from_xyz_yaw(-0.47, -0.12, 0.0, 0.0), &mut rng)?;
    let frame = env.capture(&state, &mut rng)?;
    let gray = to_grayscale(frame.width, frame.height, &frame.rgb)?;
    let depth = Plane::new(frame.width, frame.height, frame.depth.clone())?;
    let max = env.config().intrinsics.depth_max as f32;

    let sheets = [
        ("gray", gray, Channel::Gray, AugSpec::default_gray()),
        ("depth", depth, Channel::Depth { max }, AugSpec::default_depth()),
    ];
    for (name, img, ch, spec) in sheets {
        let tiles = preview_tiles(&img, ch, &spec, seed, 4)?;
        let labels: Vec<&str> = tiles.iter().map(|(l, _)| l.as_str()).collect();
        println!("{name} tiles: {}", labels.join(", "));
        let planes: Vec<Plane> = tiles.iter().map(|(_, p)| p.clone()).collect();
        let path = out.join(format!("{name}_sheet.pgm"));
        match ch {
            Channel::Gray => {
                let sheet = contact_sheet(&planes, 4, 4, 255.0)?;
                write_pgm8(File::create(&path)?, sheet.width, sheet.height, &sheet.to_u8())?;
            }
            Channel::Depth { .. } => {
                let sheet = contact_sheet(&planes, 4, 4, 0.0)?;
                let mm: Vec<u16> = sheet.data.iter().map(|d| (d * 1000.0).round() as u16).collect();
                write_pgm16(File::create(&path)?, sheet.width, sheet.height, &mm)?;
            }
        }
        println!("wrote {}", path.display());
    }
    Ok(())
}
