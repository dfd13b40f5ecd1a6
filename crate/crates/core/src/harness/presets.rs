use std::path::{Path, PathBuf};

use super::eval::{evaluate, render_table, Aggregate, Policy};
use super::train::{train_to_dir, write_curve_csv, CurveRow};
use super::{ExperimentConfig, HarnessError, Protocol};
use crate::agents::{load_checkpoint, Algorithm, NetworkConfig};
use crate::env::{AugmentConfig, Env, Modality};

pub fn preset_names() -> &'static [&'static str] {
    &["lowdim", "image", "algo-compare", "ablation", "tableI"]
}

/// Low-dimensional observation: proprioception plus the relative hole vector.
fn lowdim(algorithm: Algorithm, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        name: format!("lowdim-{}-s{seed}", algorithm.name()),
        preset: Some("lowdim".into()),
        seed,
        total_steps: 50_000,
        eval_every: 2_500,
        rollouts_per_eval: 10,
        ..ExperimentConfig::default()
    };
    cfg.env.modalities = vec![Modality::Proprio, Modality::Target];
    // millimetre offsets must be visible to the trunk
    cfg.env.target_scale = 100.0;
    cfg.agent.algorithm = algorithm;
    cfg.agent.warmup_steps = 2_000;
    // the distance-delta reward telescopes, so a long horizon hides the centering signal
    cfg.agent.gamma = 0.8;
    cfg.agent.exploration_noise = 0.3;
    cfg.agent.batch_size = 128;
    cfg.agent.actor_lr = 1e-3;
    cfg.agent.critic_lr = 1e-3;
    cfg.agent.network = NetworkConfig {
        conv: vec![],
        trunk: vec![256, 256],
        ..NetworkConfig::default()
    };
    cfg
}

/// One cell of the image ablation grid.
fn image(rgb: bool, depth: bool, augment: bool, proprio: bool, seed: u64) -> ExperimentConfig {
    let mut modalities = vec![];
    let mut name = String::new();
    if rgb {
        modalities.push(Modality::Rgb);
        name.push_str("rgb");
    }
    if depth {
        modalities.push(Modality::Depth);
        name.push_str(if rgb { "d" } else { "depth" });
    }
    if proprio {
        modalities.push(Modality::Proprio);
    }
    let name = format!(
        "{name}-{}-{}-s{seed}",
        if augment { "aug" } else { "noaug" },
        if proprio { "proprio" } else { "noproprio" }
    );
    let mut cfg = ExperimentConfig {
        name,
        preset: Some("image".into()),
        seed,
        total_steps: 200_000,
        eval_every: 10_000,
        rollouts_per_eval: 10,
        ..ExperimentConfig::default()
    };
    cfg.env.modalities = modalities;
    cfg.env.augment = if augment { AugmentConfig::defaults() } else { AugmentConfig::default() };
    cfg.agent.warmup_steps = 5_000;
    cfg.agent.replay_capacity = 100_000;
    cfg
}

/// Single-run configuration of a preset (`lowdim`, `image`) or the first run
/// of a multi-run preset.
pub fn preset_config(name: &str) -> Result<ExperimentConfig, HarnessError> {
    match name {
        "lowdim" | "algo-compare" => Ok(lowdim(Algorithm::Td3, 0)),
        "image" | "ablation" | "tableI" => Ok(image(true, false, true, true, 0)),
        other => Err(HarnessError::UnknownPreset(other.into())),
    }
}

/// Every run of a preset, in execution order.
pub fn preset_runs(name: &str) -> Result<Vec<ExperimentConfig>, HarnessError> {
    let seeds = [0, 1, 2];
    Ok(match name {
        "lowdim" => seeds.iter().map(|s| lowdim(Algorithm::Td3, *s)).collect(),
        "image" => seeds.iter().map(|s| image(true, false, true, true, *s)).collect(),
        "algo-compare" => [Algorithm::Td3, Algorithm::Ddpg, Algorithm::Sac]
            .iter()
            .flat_map(|a| seeds.iter().map(move |s| lowdim(*a, *s)))
            .collect(),
        "ablation" => ablation_grid(),
        "tableI" => table_rows().into_iter().map(|(_, c)| c).collect(),
        other => return Err(HarnessError::UnknownPreset(other.into())),
    })
}

/// {rgb, rgb-d} × {augs on, off} × {proprio on, off}.
pub fn ablation_grid() -> Vec<ExperimentConfig> {
    let mut out = vec![];
    for depth in [false, true] {
        for augment in [true, false] {
            for proprio in [true, false] {
                out.push(image(true, depth, augment, proprio, 0));
            }
        }
    }
    out
}

/// The learned rows of the results table with their configurations.
pub fn table_rows() -> Vec<(&'static str, ExperimentConfig)> {
    vec![
        ("RGB w/ augs", image(true, false, true, true, 0)),
        ("RGB-D w/ augs", image(true, true, true, true, 0)),
        ("RGB-D w/o augs", image(true, true, false, true, 0)),
    ]
}

#[derive(Debug, Clone)]
pub struct PresetReport {
    pub name: String,
    /// Human-readable summary (a table for `tableI`).
    pub text: String,
    pub files: Vec<PathBuf>,
}

fn with_budget(mut cfg: ExperimentConfig, steps: Option<u64>) -> ExperimentConfig {
    if let Some(n) = steps {
        // smoke budgets keep a proportionate warmup
        cfg.agent.warmup_steps = cfg.agent.warmup_steps.min(n / 2);
        cfg.total_steps = n;
        cfg.eval_every = cfg.eval_every.min((n / 4).max(1));
    }
    cfg
}

/// Pointwise mean over runs that share a step grid; the grid is truncated to
/// the shortest run.
pub fn seed_average(runs: &[&[CurveRow]]) -> Vec<CurveRow> {
    let len = runs.iter().map(|r| r.len()).min().unwrap_or(0);
    let k = runs.len() as f64;
    (0..len)
        .map(|i| CurveRow {
            step: runs[0][i].step,
            mean_return: runs.iter().map(|r| r[i].mean_return).sum::<f64>() / k,
            success_rate: runs.iter().map(|r| r[i].success_rate).sum::<f64>() / k,
        })
        .collect()
}

/// Run a preset under `out`. `steps` overrides every run's budget.
pub fn run_preset(
    name: &str,
    out: &Path,
    steps: Option<u64>,
    mut log: impl FnMut(&str),
) -> Result<PresetReport, HarnessError> {
    let runs = preset_runs(name)?;
    let root = out.join(name);
    std::fs::create_dir_all(&root)?;
    let mut files = vec![];
    let mut text = String::new();
    let mut table: Vec<(String, Aggregate)> = vec![];
    let labels: Vec<&str> = if name == "tableI" {
        table_rows().iter().map(|(l, _)| *l).collect()
    } else {
        vec![]
    };
    let mut curves: Vec<(String, Vec<CurveRow>)> = vec![];
    for (i, cfg) in runs.into_iter().enumerate() {
        let cfg = with_budget(cfg, steps);
        let dir = root.join(&cfg.name);
        let checkpoint = dir.join("checkpoint.phrl");
        let agent = if name == "tableI" && checkpoint.exists() {
            log(&format!("{}: reusing {}", cfg.name, checkpoint.display()));
            load_checkpoint(&checkpoint)?
        } else {
            log(&format!("{}: training for {} steps", cfg.name, cfg.total_steps));
            let run_name = cfg.name.clone();
            let run = train_to_dir(&cfg, &dir, |row| {
                log(&format!(
                    "{run_name} step {} return {:.2} success {:.2}",
                    row.step, row.mean_return, row.success_rate
                ))
            })?;
            files.push(run.curve.clone());
            files.push(run.checkpoint.clone());
            let last = run.outcome.curve.last().copied();
            if let Some(r) = last {
                text.push_str(&format!(
                    "{}: final return {:.2}, success {:.0}%\n",
                    cfg.name,
                    r.mean_return,
                    100.0 * r.success_rate
                ));
            }
            curves.push((cfg.name.clone(), run.outcome.curve.clone()));
            run.outcome.agent
        };
        if name == "tableI" {
            let env = Env::new(cfg.env.clone())?;
            let report = evaluate(&env, Policy::Agent(&agent), &Protocol::default(), labels[i])?;
            let path = dir.join("eval_episodes.csv");
            report.write_episodes_csv(std::fs::File::create(&path)?)?;
            files.push(path);
            table.push((labels[i].to_string(), report.aggregate));
        }
    }
    if name == "tableI" {
        let base = preset_config("tableI")?;
        let env = Env::new(base.env.clone())?;
        let report = evaluate(&env, Policy::Baseline(&base.baseline), &Protocol::default(), "Baseline")?;
        let path = root.join("baseline_episodes.csv");
        report.write_episodes_csv(std::fs::File::create(&path)?)?;
        files.push(path);
        table.insert(0, ("Baseline".into(), report.aggregate));
        text = render_table(&table);
        let path = root.join("table.txt");
        std::fs::write(&path, &text)?;
        files.push(path);
    } else {
        // all runs' curves in one long-format file for overlaid plots
        let path = root.join("curves.csv");
        let mut w = csv::Writer::from_writer(std::fs::File::create(&path)?);
        w.write_record(["run", "step", "mean_return", "success_rate"])?;
        for (run, rows) in &curves {
            for r in rows {
                w.write_record([run.clone(), r.step.to_string(), r.mean_return.to_string(), r.success_rate.to_string()])?;
            }
        }
        w.flush()?;
        files.push(path);
        if name == "algo-compare" {
            for algo in ["td3", "ddpg", "sac"] {
                let runs: Vec<&[CurveRow]> = curves
                    .iter()
                    .filter(|(run, _)| run.split('-').nth(1) == Some(algo))
                    .map(|(_, rows)| rows.as_slice())
                    .collect();
                let path = root.join(format!("{algo}_curve.csv"));
                write_curve_csv(&seed_average(&runs), std::fs::File::create(&path)?)?;
                files.push(path);
            }
        }
    }
    Ok(PresetReport {
        name: name.to_string(),
        text,
        files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::read_curve_csv;

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(preset_config("nope"), Err(HarnessError::UnknownPreset(_))));
        assert!(preset_runs("nope").is_err());
    }

    #[test]
    fn every_preset_config_validates() {
        for name in preset_names() {
            for cfg in preset_runs(name).unwrap() {
                cfg.validate().unwrap();
            }
        }
    }

    #[test]
    fn ablation_grid_shape() {
        let grid = ablation_grid();
        assert_eq!(grid.len(), 8);
        let names: std::collections::BTreeSet<_> = grid.iter().map(|c| c.name.clone()).collect();
        assert_eq!(names.len(), 8);
        assert!(grid.iter().any(|c| !c.env.has(Modality::Proprio)));
        assert!(grid.iter().all(|c| c.env.has(Modality::Rgb)));
    }

    #[test]
    fn seed_average_is_pointwise() {
        let row = |step, r, s| CurveRow {
            step,
            mean_return: r,
            success_rate: s,
        };
        let a = [row(0, 1.0, 0.0), row(10, 3.0, 0.5)];
        let b = [row(0, 3.0, 1.0), row(10, 5.0, 0.5), row(20, 9.0, 1.0)];
        assert_eq!(seed_average(&[&a, &b]), vec![row(0, 2.0, 0.5), row(10, 4.0, 0.5)]);
    }

    #[test]
    fn algo_compare_writes_aligned_curves() {
        let dir = tempfile::tempdir().unwrap();
        let report = run_preset("algo-compare", dir.path(), Some(240), |_| {}).unwrap();
        let grids: Vec<Vec<u64>> = ["td3", "ddpg", "sac"]
            .iter()
            .map(|a| {
                let path = dir.path().join("algo-compare").join(format!("{a}_curve.csv"));
                assert!(report.files.contains(&path));
                read_curve_csv(std::fs::File::open(path).unwrap()).unwrap().iter().map(|r| r.step).collect()
            })
            .collect();
        assert!(grids[0].len() >= 2);
        assert!(grids.iter().all(|g| *g == grids[0]));
    }

    #[test]
    fn algo_compare_shares_env_seeds() {
        let runs = preset_runs("algo-compare").unwrap();
        assert_eq!(runs.len(), 9);
        for chunk in runs.chunks(3) {
            assert_eq!(chunk.iter().map(|c| c.seed).collect::<Vec<_>>(), vec![0, 1, 2]);
        }
        assert!(runs.iter().all(|c| c.env == runs[0].env && c.total_steps == runs[0].total_steps));
    }
}
