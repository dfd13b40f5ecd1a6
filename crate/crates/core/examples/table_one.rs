//! Evaluate policies under the fixed 6-pose, 30-rollout protocol and print
//! the insertion-error table. Always includes the baseline and a scripted
//! oracle; pass checkpoint paths (with `config.toml` beside them) to add rows.
//!
//! cargo run --release --example table_one -- [checkpoint ...]

use std::path::Path;

use peghole::agents::load_checkpoint;
use peghole::env::{Env, EnvConfig};
use peghole::harness::{evaluate, parse_config, render_table, Aggregate, Policy, Protocol};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let protocol = Protocol::default();
    let env = Env::new(EnvConfig::default())?;
    let mut rows: Vec<(String, Aggregate)> = vec![];
    let baseline = Default::default();
    for (label, policy) in [("Baseline", Policy::Baseline(&baseline)), ("Scripted oracle", Policy::Scripted)] {
        let report = evaluate(&env, policy, &protocol, label)?;
        rows.push((label.into(), report.aggregate));
    }
    for path in std::env::args().skip(1) {
        let path = Path::new(&path);
        let cfg = parse_config(&path.with_file_name("config.toml"))?;
        let agent = load_checkpoint(path)?;
        let env = Env::new(cfg.env)?;
        let report = evaluate(&env, Policy::Agent(&agent), &protocol, &cfg.name)?;
        rows.push((cfg.name, report.aggregate));
    }
    print!("{}", render_table(&rows));
    Ok(())
}
