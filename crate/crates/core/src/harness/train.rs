use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::eval::{evaluate_random, Policy};
use super::{ExperimentConfig, HarnessError};
use crate::agents::{save_checkpoint, Agent, ReplayBuffer, StoredObs, Transition};
use crate::env::Env;

/// Offset between the training seed and the seed of the evaluation resets.
const EVAL_SEED_OFFSET: u64 = 0x5eed_0000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: u64,
    pub mean_return: f64,
    pub success_rate: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub agent: Agent,
    pub curve: Vec<CurveRow>,
    pub episodes: u64,
    /// Training episodes that ended in success.
    pub successes: u64,
}

pub fn write_curve_csv<W: Write>(rows: &[CurveRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: std::io::Read>(input: R) -> Result<Vec<CurveRow>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

/// Seeded training loop. Warmup steps take uniform random actions; afterwards
/// the agent acts with exploration and updates `updates_per_step` times per
/// step. The curve holds an evaluation at step 0 and at every multiple of
/// `eval_every` past warmup.
pub fn train(config: &ExperimentConfig, mut progress: impl FnMut(&CurveRow)) -> Result<TrainOutcome, HarnessError> {
    config.validate()?;
    let env = Env::new(config.env.clone())?;
    let mut agent_cfg = config.agent.clone();
    agent_cfg.seed = config.seed;
    let mut agent = Agent::new(agent_cfg, config.obs_spec())?;
    let mut buffer = ReplayBuffer::new(config.agent.replay_capacity)?;

    let mut env_rng = ChaCha8Rng::seed_from_u64(config.seed);
    env_rng.set_stream(1);
    let mut learn_rng = ChaCha8Rng::seed_from_u64(config.seed);
    learn_rng.set_stream(2);
    let eval_seed = config.seed.wrapping_add(EVAL_SEED_OFFSET);

    let mut curve = Vec::new();
    let mut record = |step: u64, agent: &Agent, curve: &mut Vec<CurveRow>| -> Result<(), HarnessError> {
        let (mean_return, success_rate) = evaluate_random(&env, Policy::Agent(agent), config.rollouts_per_eval, eval_seed)?;
        let row = CurveRow {
            step,
            mean_return,
            success_rate,
        };
        progress(&row);
        curve.push(row);
        Ok(())
    };
    record(0, &agent, &mut curve)?;

    let (mut obs, mut state) = env.reset(&mut env_rng)?;
    let (mut episodes, mut successes) = (0, 0);
    let warmup = config.agent.warmup_steps;
    for t in 1..=config.total_steps {
        let action = if t <= warmup {
            [0; 3].map(|_| env_rng.random_range(-1.0..=1.0))
        } else {
            agent.act(&obs, true, &mut env_rng)?
        };
        let result = env.step(&mut state, &action, &mut env_rng)?;
        buffer.push(Transition {
            obs: StoredObs::from_observation(&obs),
            action: action.map(|a| a as f32),
            reward: result.reward.total as f32,
            next_obs: StoredObs::from_observation(&result.observation),
            done: result.terminated,
        });
        if result.done() {
            episodes += 1;
            successes += u64::from(result.terminated);
            (obs, state) = env.reset(&mut env_rng)?;
        } else {
            obs = result.observation;
        }
        if t > warmup && buffer.len() >= config.agent.batch_size {
            for _ in 0..config.updates_per_step {
                let batch = buffer.sample(config.agent.batch_size, &mut learn_rng)?;
                agent.update(&batch, &mut learn_rng)?;
            }
        }
        if t > warmup && t % config.eval_every == 0 {
            record(t, &agent, &mut curve)?;
        }
    }
    Ok(TrainOutcome {
        agent,
        curve,
        episodes,
        successes,
    })
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub dir: PathBuf,
    pub checkpoint: PathBuf,
    pub curve: PathBuf,
    pub outcome: TrainOutcome,
}

/// Train and write `config.toml`, `curve.csv` and `checkpoint.phrl` into `dir`.
pub fn train_to_dir(
    config: &ExperimentConfig,
    dir: &Path,
    progress: impl FnMut(&CurveRow),
) -> Result<RunArtifacts, HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("config.toml"), config.to_toml_string()?)?;
    let outcome = train(config, progress)?;
    let curve = dir.join("curve.csv");
    write_curve_csv(&outcome.curve, std::fs::File::create(&curve)?)?;
    let checkpoint = dir.join("checkpoint.phrl");
    save_checkpoint(&outcome.agent, &checkpoint)?;
    Ok(RunArtifacts {
        dir: dir.to_path_buf(),
        checkpoint,
        curve,
        outcome,
    })
}
