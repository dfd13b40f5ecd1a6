//! Binary checkpoint: magic, version, algorithm tag, JSON header, then every
//! network's tensors as `rank, dims…, f32 LE values`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::learner::{Agent, AgentConfig, Algorithm, ObsSpec};
use super::nn::{NetSpec, Network};
use super::AgentError;

const MAGIC: &[u8; 4] = b"PHRL";
const VERSION: u32 = 1;
const MAX_HEADER: u32 = 1 << 20;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    config: AgentConfig,
    obs: ObsSpec,
    actor: NetSpec,
    critic: NetSpec,
    critics: usize,
    log_alpha: f32,
}

fn bad(msg: impl Into<String>) -> AgentError {
    AgentError::Checkpoint(msg.into())
}

fn write_u32<W: Write>(w: &mut W, v: u32) -> Result<(), AgentError> {
    w.write_all(&v.to_le_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, AgentError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn write_net<W: Write>(w: &mut W, net: &Network<f32>) -> Result<(), AgentError> {
    for slot in net.tensor_slots() {
        write_u32(w, slot.dims.len() as u32)?;
        for d in &slot.dims {
            write_u32(w, *d as u32)?;
        }
        let mut bytes = Vec::with_capacity(slot.len() * 4);
        for v in &net.params[slot.offset..slot.offset + slot.len()] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
    }
    Ok(())
}

fn read_net<R: Read>(r: &mut R, spec: &NetSpec) -> Result<Network<f32>, AgentError> {
    let mut net = Network::<f32>::zeros(spec.clone())?;
    for slot in net.tensor_slots() {
        let rank = read_u32(r)? as usize;
        if rank != slot.dims.len() {
            return Err(bad(format!("tensor rank {rank}, expected {}", slot.dims.len())));
        }
        for d in &slot.dims {
            let got = read_u32(r)? as usize;
            if got != *d {
                return Err(bad(format!("tensor dims {got}, expected {d}")));
            }
        }
        let mut bytes = vec![0u8; slot.len() * 4];
        r.read_exact(&mut bytes)?;
        for (dst, chunk) in net.params[slot.offset..].iter_mut().zip(bytes.chunks_exact(4)) {
            *dst = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        }
    }
    Ok(net)
}

/// Serialize weights (online and target). Optimizer state is not saved.
pub fn write_checkpoint<W: Write>(agent: &Agent, w: &mut W) -> Result<(), AgentError> {
    let header = Header {
        config: agent.config.clone(),
        obs: agent.obs,
        actor: agent.actor.spec().clone(),
        critic: agent.critics[0].spec().clone(),
        critics: agent.critics.len(),
        log_alpha: agent.log_alpha,
    };
    let json = serde_json::to_vec(&header).map_err(|e| bad(e.to_string()))?;
    w.write_all(MAGIC)?;
    write_u32(w, VERSION)?;
    write_u32(w, agent.algorithm().tag())?;
    write_u32(w, json.len() as u32)?;
    w.write_all(&json)?;
    write_net(w, &agent.actor)?;
    write_net(w, &agent.actor_target)?;
    for net in agent.critics.iter().chain(&agent.critic_targets) {
        write_net(w, net)?;
    }
    Ok(())
}

pub fn read_checkpoint<R: Read>(r: &mut R) -> Result<Agent, AgentError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let tag = read_u32(r)?;
    let algorithm = Algorithm::from_tag(tag).ok_or_else(|| bad(format!("unknown algorithm tag {tag}")))?;
    let len = read_u32(r)?;
    if len > MAX_HEADER {
        return Err(bad("header too large"));
    }
    let mut json = vec![0u8; len as usize];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json).map_err(|e| bad(e.to_string()))?;
    if header.config.algorithm != algorithm {
        return Err(bad("algorithm tag disagrees with header"));
    }
    let actor = read_net(r, &header.actor)?;
    let actor_target = read_net(r, &header.actor)?;
    let critics = (0..header.critics)
        .map(|_| read_net(r, &header.critic))
        .collect::<Result<Vec<_>, _>>()?;
    let critic_targets = (0..header.critics)
        .map(|_| read_net(r, &header.critic))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(bad("trailing bytes"));
    }
    Ok(Agent::assemble(
        header.config,
        header.obs,
        actor,
        actor_target,
        critics,
        critic_targets,
        header.log_alpha,
    ))
}

pub fn save_checkpoint(agent: &Agent, path: &Path) -> Result<(), AgentError> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(agent, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Agent, AgentError> {
    read_checkpoint(&mut std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::learner::tests::{observation, random_transitions, small_config, spec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trained(algo: Algorithm) -> Agent {
        let mut agent = Agent::new(small_config(algo), spec()).unwrap();
        let data = random_transitions(16, 1);
        let batch: Vec<_> = data.iter().collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..4 {
            agent.update(&batch, &mut rng).unwrap();
        }
        agent
    }

    #[test]
    fn round_trip_restores_actions_bit_exactly() {
        for algo in [Algorithm::Td3, Algorithm::Ddpg, Algorithm::Sac] {
            let agent = trained(algo);
            let mut bytes = vec![];
            write_checkpoint(&agent, &mut bytes).unwrap();
            assert_eq!(&bytes[..4], b"PHRL");
            let back = read_checkpoint(&mut bytes.as_slice()).unwrap();
            assert_eq!(back.algorithm(), algo);
            assert_eq!(back.actor.params, agent.actor.params);
            assert_eq!(back.actor_target.params, agent.actor_target.params);
            for (a, b) in back.critic_targets.iter().zip(&agent.critic_targets) {
                assert_eq!(a.params, b.params);
            }
            assert_eq!(back.log_alpha.to_bits(), agent.log_alpha.to_bits());
            for seed in 0..5 {
                let obs = observation(seed);
                let mut rng = ChaCha8Rng::seed_from_u64(0);
                assert_eq!(
                    agent.act(&obs, false, &mut rng).unwrap(),
                    back.act(&obs, false, &mut rng).unwrap()
                );
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.phrl");
        let agent = trained(Algorithm::Td3);
        save_checkpoint(&agent, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back.actor.params, agent.actor.params);
    }

    #[test]
    fn corrupt_input_is_rejected() {
        let agent = trained(Algorithm::Ddpg);
        let mut bytes = vec![];
        write_checkpoint(&agent, &mut bytes).unwrap();

        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(read_checkpoint(&mut bad_magic.as_slice()), Err(AgentError::Checkpoint(_))));

        let mut bad_tag = bytes.clone();
        bad_tag[8] = 9;
        assert!(read_checkpoint(&mut bad_tag.as_slice()).is_err());

        let truncated = &bytes[..bytes.len() - 3];
        assert!(read_checkpoint(&mut &truncated[..]).is_err());

        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(read_checkpoint(&mut trailing.as_slice()).is_err());
    }
}
