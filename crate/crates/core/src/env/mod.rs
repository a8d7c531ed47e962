//! The data-collection MDP: scenario, hybrid action, per-slot transmission and
//! the two agents' observations and rewards.

mod codec;
mod config;
mod sim;
mod trace;

pub use codec::{action_count, decode_allocation, encode_allocation, Allocation, AllocationAction};
pub use config::{uniform_positions, ClampMode, EnvConfig, MdcPlacement, RewardMode};
pub use sim::{Env, EnvState, StepOutcome, TrajectoryAction};
pub use trace::{write_trace, TraceRow};
