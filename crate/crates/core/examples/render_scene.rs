//! Render the eye-in-hand RGB-D view with the block under the home pose and
//! again with the peg hovering just above the hole. Writes PPM/PGM files.
//!
//! cargo run --release --example render_scene -- [out_dir]

use std::fs::File;
use std::path::PathBuf;

use nalgebra::Vector3;
use peghole::env::{Env, EnvConfig};
use peghole::geometry::Pose;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "runs/render".into()));
    std::fs::create_dir_all(&out)?;
    let env = Env::new(EnvConfig::default())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let block = Pose::from_xyz_yaw(-0.45, -0.10, 0.0, 0.3);
    let (_, mut state) = env.reset_with_block(block, &mut rng)?;

    let views = [("home", None), ("hover", Some(0.04))];
    for (name, hover) in views {
        if let Some(h) = hover {
            let rim = env.target_point(&state) + Vector3::new(0.0, 0.0, env.config().geometry.insertion_depth + h);
            env.place_tip(&mut state, &rim)?;
        }
        let frame = env.capture(&state, &mut rng)?;
        frame.write_ppm(File::create(out.join(format!("{name}_rgb.ppm")))?)?;
        frame.write_depth_pgm(File::create(out.join(format!("{name}_depth_mm.pgm")))?)?;
        let valid = frame.depth.iter().filter(|d| **d > 0.0).count();
        println!(
            "{name}: {}×{} frame, {valid} valid depth pixels, depth at the image center {:.3} m",
            frame.width,
            frame.height,
            frame.depth_at(frame.width / 2, frame.height / 2)
        );
    }
    println!("wrote images to {}", out.display());
    Ok(())
}
