use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Protocol};
use crate::agents::Agent;
use crate::baseline::{proportional_action, run_baseline, BaselineConfig};
use crate::env::{Env, Observation};
use crate::geometry::{Pose, SceneState};

/// Anything that can drive an evaluation episode.
#[derive(Debug, Clone, Copy)]
pub enum Policy<'a> {
    /// Deterministic actor of a trained agent.
    Agent(&'a Agent),
    /// Closed-loop vision baseline.
    Baseline(&'a BaselineConfig),
    /// Servo on the true target: straight over the hole, then down.
    Scripted,
    /// Always the zero action.
    Zero,
    /// Uniform actions in the unit cube, drawn from the rollout generator.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub pose: usize,
    pub rollout: usize,
    /// Final tip-minus-hole-axis error in the block frame, millimeters.
    pub error_x_mm: f64,
    pub error_y_mm: f64,
    pub inserted: bool,
    pub episode_return: f64,
    pub steps: u32,
    pub collisions: u32,
}

/// Mean ± sample standard deviation of the final errors plus insertion rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Aggregate {
    pub n_rollouts: usize,
    pub mean_error_x: f64,
    pub std_error_x: f64,
    pub mean_error_y: f64,
    pub std_error_y: f64,
    /// Percent of rollouts ending in successful insertion.
    pub insertion_rate: f64,
    pub mean_return: f64,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

impl Aggregate {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let (mean_error_x, std_error_x) = mean_std(records.iter().map(|r| r.error_x_mm));
        let (mean_error_y, std_error_y) = mean_std(records.iter().map(|r| r.error_y_mm));
        let inserted = records.iter().filter(|r| r.inserted).count();
        let n = records.len();
        Self {
            n_rollouts: n,
            mean_error_x,
            std_error_x,
            mean_error_y,
            std_error_y,
            insertion_rate: if n == 0 { 0.0 } else { 100.0 * inserted as f64 / n as f64 },
            mean_return: mean_std(records.iter().map(|r| r.episode_return)).0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub label: String,
    pub aggregate: Aggregate,
    pub per_pose: Vec<Aggregate>,
    pub episodes: Vec<EpisodeRecord>,
}

impl EvalReport {
    pub fn from_episodes(label: &str, episodes: Vec<EpisodeRecord>) -> Self {
        let poses = episodes.iter().map(|e| e.pose + 1).max().unwrap_or(0);
        let per_pose = (0..poses)
            .map(|p| {
                let sel: Vec<_> = episodes.iter().filter(|e| e.pose == p).copied().collect();
                Aggregate::from_records(&sel)
            })
            .collect();
        Self {
            label: label.to_string(),
            aggregate: Aggregate::from_records(&episodes),
            per_pose,
            episodes,
        }
    }

    pub fn write_episodes_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        for e in &self.episodes {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-pose and aggregate rows as CSV.
    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "pose",
            "n_rollouts",
            "mean_error_x_mm",
            "std_error_x_mm",
            "mean_error_y_mm",
            "std_error_y_mm",
            "insertion_rate",
            "mean_return",
        ])?;
        let rows = self
            .per_pose
            .iter()
            .enumerate()
            .map(|(i, a)| (i.to_string(), a))
            .chain(std::iter::once(("all".to_string(), &self.aggregate)));
        for (name, a) in rows {
            w.write_record([
                name,
                a.n_rollouts.to_string(),
                a.mean_error_x.to_string(),
                a.std_error_x.to_string(),
                a.mean_error_y.to_string(),
                a.std_error_y.to_string(),
                a.insertion_rate.to_string(),
                a.mean_return.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn read_episodes_csv<R: Read>(input: R) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

/// Text table with Table I's columns: errors as `mean ± std` mm, insertion %.
pub fn render_table(rows: &[(String, Aggregate)]) -> String {
    let header = ["Method", "x error [mm]", "y error [mm]", "Insertion [%]"];
    let cells: Vec<[String; 4]> = rows
        .iter()
        .map(|(name, a)| {
            [
                name.clone(),
                format!("{:.1} ± {:.1}", a.mean_error_x, a.std_error_x),
                format!("{:.1} ± {:.1}", a.mean_error_y, a.std_error_y),
                format!("{:.0}", a.insertion_rate),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |row: [&str; 4]| {
        let padded: Vec<String> = row
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = line(header);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&format!("|-{}-|\n", rule.join("-|-")));
    for row in &cells {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutResult {
    pub episode_return: f64,
    pub success: bool,
    pub steps: u32,
    pub collisions: u32,
    pub error_xy: [f64; 2],
}

fn scripted_action(env: &Env, state: &SceneState) -> Result<[f64; 3], HarnessError> {
    let tip = env.tip_pose(state)?.position;
    let target = env.target_point(state);
    let geometry = &env.config().geometry;
    let lateral = (tip.xy() - target.xy()).norm();
    let goal = if lateral < 0.25 * geometry.clearance() {
        target
    } else {
        let mut hover = target;
        hover.z += geometry.insertion_depth + 0.02;
        hover
    };
    Ok(proportional_action(&goal, &tip, 1.0, env.config().action_scale))
}

/// One deterministic episode with the block at `block_pose`.
pub fn rollout(env: &Env, policy: Policy, block_pose: Pose, rng: &mut ChaCha8Rng) -> Result<RolloutResult, HarnessError> {
    let (obs, mut state) = env.reset_with_block(block_pose, rng)?;
    if let Policy::Baseline(cfg) = policy {
        let out = run_baseline(env, &mut state, cfg, rng)?;
        let err = env.target_error(&state)?;
        return Ok(RolloutResult {
            episode_return: out.trace.total_return(),
            success: out.success,
            steps: out.steps,
            collisions: out.collisions,
            error_xy: [err.xy_error.x, err.xy_error.y],
        });
    }
    let mut obs: Observation = obs;
    let mut ret = 0.0;
    let mut collisions = 0;
    let success = loop {
        let action = match policy {
            Policy::Agent(agent) => agent.act(&obs, false, rng)?,
            Policy::Scripted => scripted_action(env, &state)?,
            Policy::Zero => [0.0; 3],
            Policy::Random => [0; 3].map(|_| rng.random_range(-1.0..=1.0)),
            Policy::Baseline(_) => unreachable!(),
        };
        let r = env.step(&mut state, &action, rng)?;
        ret += r.reward.total;
        collisions += u32::from(r.info.collided);
        let done = r.done();
        let terminated = r.terminated;
        obs = r.observation;
        if done {
            break terminated;
        }
    };
    let err = env.target_error(&state)?;
    Ok(RolloutResult {
        episode_return: ret,
        success,
        steps: state.time_step,
        collisions,
        error_xy: [err.xy_error.x, err.xy_error.y],
    })
}

fn rollout_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Run the fixed-pose protocol. The policy is never updated.
pub fn evaluate(env: &Env, policy: Policy, protocol: &Protocol, label: &str) -> Result<EvalReport, HarnessError> {
    protocol.validate()?;
    let mut episodes = Vec::with_capacity(protocol.n_rollouts());
    for (p, placement) in protocol.poses.iter().enumerate() {
        for r in 0..protocol.rollouts_per_pose {
            let mut rng = rollout_rng(protocol.seed, (p * protocol.rollouts_per_pose + r) as u64);
            let out = rollout(env, policy, placement.pose(), &mut rng)?;
            episodes.push(EpisodeRecord {
                pose: p,
                rollout: r,
                error_x_mm: out.error_xy[0] * 1000.0,
                error_y_mm: out.error_xy[1] * 1000.0,
                inserted: out.success,
                episode_return: out.episode_return,
                steps: out.steps,
                collisions: out.collisions,
            });
        }
    }
    Ok(EvalReport::from_episodes(label, episodes))
}

/// Mean return and success fraction over `episodes` randomized resets drawn
/// from a fixed seed, so successive calls see the same block poses.
pub fn evaluate_random(env: &Env, policy: Policy, episodes: usize, seed: u64) -> Result<(f64, f64), HarnessError> {
    let mut total = 0.0;
    let mut successes = 0;
    for i in 0..episodes {
        let mut rng = rollout_rng(seed, i as u64);
        let (_, state) = env.reset(&mut rng)?;
        let out = rollout(env, policy, state.block_pose, &mut rng)?;
        total += out.episode_return;
        successes += usize::from(out.success);
    }
    Ok((total / episodes as f64, successes as f64 / episodes as f64))
}
