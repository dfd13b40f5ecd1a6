//! Train briefly, save a checkpoint, load it back and confirm the loaded
//! policy acts identically on fresh observations.
//!
//! cargo run --release --example checkpoint_roundtrip

use peghole::agents::{load_checkpoint, save_checkpoint, Agent};
use peghole::env::Env;
use peghole::harness::{preset_config, train};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = preset_config("lowdim")?;
    cfg.total_steps = cfg.agent.warmup_steps + 1_000;
    cfg.eval_every = cfg.total_steps;
    let outcome = train(&cfg, |_| {})?;
    let dir = std::env::temp_dir().join("phrl-checkpoint-demo");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("checkpoint.phrl");
    save_checkpoint(&outcome.agent, &path)?;
    let loaded: Agent = load_checkpoint(&path)?;
    println!(
        "{} bytes, {:?}, actor with {} parameters",
        std::fs::metadata(&path)?.len(),
        loaded.algorithm(),
        loaded.actor().param_count()
    );

    let env = Env::new(cfg.env.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut identical = 0;
    for _ in 0..20 {
        let (obs, _) = env.reset(&mut rng)?;
        let a = outcome.agent.act(&obs, false, &mut rng)?;
        let b = loaded.act(&obs, false, &mut rng)?;
        identical += usize::from(a == b);
    }
    println!("{identical}/20 observations give bit-identical actions");
    Ok(())
}
