//! Agent checkpoints: networks in the `nn` layout plus optimiser moments,
//! snapshots, schedules and counters.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::dqn::DqnAgent;
use super::policy::PolicyHead;
use super::ppo::PpoAgent;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const AGENT_FORMAT: &str = "uavdc-agent";
pub const AGENT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct AgentFile<A> {
    format: String,
    version: u32,
    kind: String,
    agent: A,
}

fn save<A: Serialize>(kind: &str, agent: &A) -> Result<String> {
    let file = AgentFile { format: AGENT_FORMAT.into(), version: AGENT_VERSION, kind: kind.into(), agent };
    Ok(serde_json::to_string(&file)?)
}

fn load<A: DeserializeOwned>(kind: &str, text: &str) -> Result<A> {
    let file: AgentFile<A> = serde_json::from_str(text)?;
    if file.format != AGENT_FORMAT || file.version != AGENT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported agent file {} v{}", file.format, file.version)));
    }
    if file.kind != kind {
        return Err(Error::Checkpoint(format!("expected a {kind} checkpoint, found {}", file.kind)));
    }
    Ok(file.agent)
}

/// The `kind` tag of an agent file (`"ppo"` or `"dqn"`).
pub fn checkpoint_kind(text: &str) -> Result<String> {
    let file: AgentFile<serde::de::IgnoredAny> = serde_json::from_str(text)?;
    if file.format != AGENT_FORMAT {
        return Err(Error::Checkpoint(format!("not an agent file: {}", file.format)));
    }
    Ok(file.kind)
}

impl<T: Scalar, H: PolicyHead<T>> PpoAgent<T, H> {
    pub fn to_checkpoint(&self) -> Result<String> {
        save("ppo", self)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let agent: Self = load("ppo", text)?;
        let shapes_ok = agent.actor().same_shape(agent.old_actor())
            && agent.critic().same_shape(agent.old_critic())
            && agent.actor().output_dim() == agent.head.n_outputs();
        if !shapes_ok {
            return Err(Error::Checkpoint("snapshot and live network shapes differ".into()));
        }
        Ok(agent)
    }
}

impl<T: Scalar> DqnAgent<T> {
    pub fn to_checkpoint(&self) -> Result<String> {
        save("dqn", self)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let mut agent: Self = load("dqn", text)?;
        if !agent.online().same_shape(agent.target()) {
            return Err(Error::Checkpoint("target and online network shapes differ".into()));
        }
        agent.restore_replay();
        Ok(agent)
    }
}
