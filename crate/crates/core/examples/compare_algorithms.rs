//! Train TD3, DDPG and SAC on the low-dimensional task with shared seeds and
//! print their final returns next to a uniform random policy.
//!
//! cargo run --release --example compare_algorithms -- [steps] [seeds]

use peghole::agents::Algorithm;
use peghole::env::Env;
use peghole::harness::{evaluate_random, preset_config, train, Policy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let steps: Option<u64> = args.next().map(|s| s.parse()).transpose()?;
    let seeds: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let base = preset_config("lowdim")?;
    let env = Env::new(base.env.clone())?;
    let (random_return, _) = evaluate_random(&env, Policy::Random, 20, 0)?;
    println!("random policy: mean return {random_return:.2}");
    for algo in [Algorithm::Td3, Algorithm::Ddpg, Algorithm::Sac] {
        let mut finals = vec![];
        for seed in 0..seeds {
            let mut cfg = base.clone();
            cfg.agent.algorithm = algo;
            cfg.seed = seed;
            if let Some(n) = steps {
                cfg.total_steps = n.max(cfg.agent.warmup_steps);
                cfg.eval_every = cfg.eval_every.min(cfg.total_steps);
            }
            let out = train(&cfg, |_| {})?;
            let last = out.curve.last().copied().ok_or("empty curve")?;
            println!(
                "{:>4} seed {seed}: final return {:>7.2}, success {:>5.1}%",
                algo.name(),
                last.mean_return,
                100.0 * last.success_rate
            );
            finals.push(last.mean_return);
        }
        println!("{:>4} mean final return {:.2}", algo.name(), finals.iter().sum::<f64>() / finals.len() as f64);
    }
    Ok(())
}
