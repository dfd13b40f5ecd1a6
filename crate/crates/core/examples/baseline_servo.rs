//! Run the classical vision baseline (color segmentation, depth-based hole
//! localization, two-phase proportional servo) on randomized resets.
//!
//! cargo run --release --example baseline_servo -- [episodes] [seed]

use peghole::baseline::{run_baseline, BaselineConfig};
use peghole::env::{Env, EnvConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(10);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let env = Env::new(EnvConfig::default())?;
    let config = BaselineConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inserted = 0;
    for ep in 0..episodes {
        let (_, mut state) = env.reset(&mut rng)?;
        let block = state.block_pose.position;
        let out = run_baseline(&env, &mut state, &config, &mut rng)?;
        let err = env.target_error(&state)?;
        inserted += usize::from(out.success);
        println!(
            "episode {ep:>2}: block ({:+.3}, {:+.3})  {}  steps {:>3}  collisions {}  xy error ({:+.2}, {:+.2}) mm",
            block.x,
            block.y,
            if out.success { "inserted" } else { "missed  " },
            out.steps,
            out.collisions,
            1000.0 * err.xy_error.x,
            1000.0 * err.xy_error.y,
        );
        if let Some(est) = out.estimate {
            let truth = env.target_point(&state);
            println!(
                "            final hole estimate off by {:.2} mm (confidence {:.2})",
                1000.0 * (est.center_world.xy() - truth.xy()).norm(),
                est.confidence
            );
        }
    }
    println!("inserted {inserted}/{episodes}");
    Ok(())
}
