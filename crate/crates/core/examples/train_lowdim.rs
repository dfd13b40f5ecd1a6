//! Train TD3 on the low-dimensional observation (proprioception plus the
//! relative hole vector) and print the evaluation curve.
//!
//! cargo run --release --example train_lowdim -- [seed] [steps]

use std::time::Instant;

use peghole::harness::{preset_config, train_to_dir, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let steps: Option<u64> = args.next().map(|s| s.parse()).transpose()?;

    let mut cfg: ExperimentConfig = preset_config("lowdim")?;
    cfg.seed = seed;
    cfg.name = format!("lowdim-td3-s{seed}");
    if let Some(n) = steps {
        cfg.total_steps = n;
    }
    let out = cfg.resolved_output_dir().join(&cfg.name);
    let start = Instant::now();
    let run = train_to_dir(&cfg, &out, |row| {
        println!(
            "step {:>6}  return {:>7.2}  success {:>5.1}%  ({:.0}s)",
            row.step,
            row.mean_return,
            100.0 * row.success_rate,
            start.elapsed().as_secs_f64()
        );
    })?;
    println!("{} episodes; wrote {} and {}", run.outcome.episodes, run.curve.display(), run.checkpoint.display());
    Ok(())
}
