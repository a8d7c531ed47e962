//! UAV-aided uplink data collection over shared Rician channels, with a
//! cascaded discrete/continuous agent pair (PPO-PPO) and DQN baselines.

pub mod agents;
pub mod channel;
pub mod env;
pub mod error;
pub mod nn;
pub mod scalar;
pub mod trainer;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision instantiations.
pub type Env64 = env::Env<f64>;
pub type EnvConfig64 = env::EnvConfig<f64>;
pub type RadioConfig64 = channel::RadioConfig<f64>;
pub type Mlp64 = nn::Mlp<f64>;
pub type TrainConfig64 = trainer::TrainConfig<f64>;
pub type Trainer64 = trainer::Trainer<f64>;

/// Single-precision instantiations.
pub type Env32 = env::Env<f32>;
pub type EnvConfig32 = env::EnvConfig<f32>;
pub type Mlp32 = nn::Mlp<f32>;
pub type TrainConfig32 = trainer::TrainConfig<f32>;
pub type Trainer32 = trainer::Trainer<f32>;
