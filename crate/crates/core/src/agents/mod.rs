//! Learners for the two action slots: PPO for either slot, DQN and dueling
//! DQN as discrete-slot baselines.

mod checkpoint;
mod dqn;
mod policy;
mod ppo;
mod schedule;

pub use checkpoint::{checkpoint_kind, AGENT_FORMAT, AGENT_VERSION};
pub use dqn::{dueling_q, DqnAgent, DqnConfig, Experience, ReplayBuffer};
pub use policy::PolicyHead;
pub use ppo::{
    compute_advantages, normalize, ContinuousPpo, DiscretePpo, LossGrads, PpoAct, PpoAgent, PpoConfig, Transition,
};
pub use schedule::EpsilonSchedule;
