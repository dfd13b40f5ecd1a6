//! Drive the environment with a proportional controller that knows the true
//! target, and dump the per-step reward breakdown as CSV.
//!
//! cargo run --release --example scripted_episode -- [seed]

use peghole::env::{Env, EnvConfig, EpisodeTrace, Modality};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let cfg = EnvConfig {
        modalities: vec![Modality::Proprio],
        ..EnvConfig::default()
    };
    let env = Env::new(cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, mut state) = env.reset(&mut rng)?;
    let mut trace = EpisodeTrace::default();
    loop {
        let tip = env.tip_pose(&state)?.position;
        let rel = (env.target_point(&state) - tip) / env.config().action_scale;
        let action = [rel.x, rel.y, rel.z].map(|v| v.clamp(-1.0, 1.0));
        let result = env.step(&mut state, &action, &mut rng)?;
        trace.record(&action, &result);
        if result.terminated || result.truncated {
            println!(
                "{} after {} steps, return {:.2}, final distance {:.2} mm",
                if result.terminated { "inserted" } else { "timed out" },
                state.time_step,
                trace.total_return(),
                1000.0 * result.info.distance
            );
            break;
        }
    }
    trace.write_csv(std::io::stdout())?;
    Ok(())
}
