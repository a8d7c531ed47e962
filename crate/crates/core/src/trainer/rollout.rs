use rand::Rng;

use crate::agents::{checkpoint_kind, ContinuousPpo, DiscretePpo, DqnAgent, Transition};
use crate::env::{AllocationAction, Env, EnvState, TraceRow, TrajectoryAction};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Steps saved since the last update round, one sequence per PPO slot.
///
/// With a DQN in the discrete slot the discrete sequence stays empty; that
/// agent keeps its own replay buffer.
#[derive(Clone, Debug, Default)]
pub struct RolloutBuffer<T> {
    pub discrete: Vec<Transition<T, usize>>,
    pub continuous: Vec<Transition<T, [T; 2]>>,
}

impl<T: Scalar> RolloutBuffer<T> {
    pub fn new() -> Self {
        Self { discrete: Vec::new(), continuous: Vec::new() }
    }

    /// Number of saved environment steps.
    pub fn len(&self) -> usize {
        self.continuous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.continuous.is_empty()
    }

    pub fn clear(&mut self) {
        self.discrete.clear();
        self.continuous.clear();
    }
}

/// Whatever occupies the channel-allocation slot.
#[derive(Clone, Debug)]
pub enum DiscreteSlot<T> {
    Ppo(DiscretePpo<T>),
    Dqn(DqnAgent<T>),
}

impl<T: Scalar> DiscreteSlot<T> {
    pub fn set_epsilon(&mut self, eps: f64) {
        match self {
            DiscreteSlot::Ppo(a) => a.epsilon = eps,
            DiscreteSlot::Dqn(a) => a.epsilon = eps,
        }
    }

    pub fn act_greedy(&self, state: &[T]) -> Result<usize> {
        match self {
            DiscreteSlot::Ppo(a) => a.act_greedy(state),
            DiscreteSlot::Dqn(a) => a.act_greedy(state),
        }
    }

    pub fn to_checkpoint(&self) -> Result<String> {
        match self {
            DiscreteSlot::Ppo(a) => a.to_checkpoint(),
            DiscreteSlot::Dqn(a) => a.to_checkpoint(),
        }
    }

    /// Restores whichever agent kind the file holds.
    pub fn from_checkpoint(text: &str) -> Result<Self> {
        match checkpoint_kind(text)?.as_str() {
            "ppo" => Ok(DiscreteSlot::Ppo(DiscretePpo::from_checkpoint(text)?)),
            "dqn" => Ok(DiscreteSlot::Dqn(DqnAgent::from_checkpoint(text)?)),
            other => Err(Error::Checkpoint(format!("unknown agent kind {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub mission_time: usize,
    pub sum_r_ch: f64,
    pub sum_r_traj: f64,
    pub success: bool,
    pub collected_bits: f64,
    pub residual_bits: f64,
}

/// Anything that can pick the hybrid action for a state.
pub trait Controller<T: Scalar> {
    fn act<R: Rng + ?Sized>(
        &mut self,
        env: &Env<T>,
        state: &EnvState<T>,
        rng: &mut R,
    ) -> Result<(AllocationAction, TrajectoryAction<T>)>;
}

/// Uniform over allocations and over the displacement box.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomController;

impl<T: Scalar> Controller<T> for RandomController {
    fn act<R: Rng + ?Sized>(
        &mut self,
        env: &Env<T>,
        _state: &EnvState<T>,
        rng: &mut R,
    ) -> Result<(AllocationAction, TrajectoryAction<T>)> {
        let a = AllocationAction(rng.random_range(0..env.n_actions()));
        let b = env.config().max_step().to_f64_lossy();
        let dx = rng.random_range(-b..=b);
        let dy = rng.random_range(-b..=b);
        Ok((a, TrajectoryAction { dx: T::lit(dx), dy: T::lit(dy) }))
    }
}

/// Fixed allocation, no movement.
#[derive(Clone, Copy, Debug)]
pub struct HoverController(pub AllocationAction);

impl<T: Scalar> Controller<T> for HoverController {
    fn act<R: Rng + ?Sized>(
        &mut self,
        _env: &Env<T>,
        _state: &EnvState<T>,
        _rng: &mut R,
    ) -> Result<(AllocationAction, TrajectoryAction<T>)> {
        Ok((self.0, TrajectoryAction::default()))
    }
}

/// Greedy (mode) actions of a trained agent pair.
pub struct GreedyController<'a, T> {
    pub discrete: &'a DiscreteSlot<T>,
    pub continuous: &'a ContinuousPpo<T>,
}

impl<T: Scalar> Controller<T> for GreedyController<'_, T> {
    fn act<R: Rng + ?Sized>(
        &mut self,
        env: &Env<T>,
        state: &EnvState<T>,
        _rng: &mut R,
    ) -> Result<(AllocationAction, TrajectoryAction<T>)> {
        let a = self.discrete.act_greedy(&env.state_vector_discrete(state))?;
        let [dx, dy] = self.continuous.act_greedy(&env.state_vector_continuous(state))?;
        Ok((AllocationAction(a as u64), TrajectoryAction { dx, dy }))
    }
}

/// Plays one episode with `controller`, optionally recording a trace.
pub fn simulate_episode<T: Scalar, C: Controller<T>, R: Rng + ?Sized>(
    env: &Env<T>,
    controller: &mut C,
    rng: &mut R,
    mut trace: Option<&mut Vec<TraceRow<T>>>,
) -> Result<EpisodeSummary> {
    let mut state = env.reset(rng);
    let mut summary = EpisodeSummary {
        mission_time: 0,
        sum_r_ch: 0.0,
        sum_r_traj: 0.0,
        success: false,
        collected_bits: 0.0,
        residual_bits: 0.0,
    };
    loop {
        let (a, m) = controller.act(env, &state, rng)?;
        let (next, out) = env.step(&state, a, m, rng)?;
        let collected: T = out.collected_bits.iter().copied().sum();
        summary.sum_r_ch += out.r_ch.to_f64_lossy();
        summary.sum_r_traj += out.r_traj.to_f64_lossy();
        summary.collected_bits += collected.to_f64_lossy();
        if let Some(rows) = trace.as_deref_mut() {
            rows.push(TraceRow {
                step: state.step,
                x_uav: next.uav_xy[0],
                y_uav: next.uav_xy[1],
                alloc_encoded: a.0,
                r_ch: out.r_ch,
                r_traj: out.r_traj,
                collected_total: collected,
                u_res: next.u_res.clone(),
            });
        }
        state = next;
        if out.done {
            summary.mission_time = state.step;
            summary.success = out.success;
            summary.residual_bits = state.u_res.iter().map(|u| u.to_f64_lossy()).sum();
            return Ok(summary);
        }
    }
}

/// Mission statistics of the uniform-random policy.
pub fn random_policy_baseline<T: Scalar, R: Rng + ?Sized>(
    env: &Env<T>,
    episodes: usize,
    rng: &mut R,
) -> Result<Vec<EpisodeSummary>> {
    (0..episodes).map(|_| simulate_episode(env, &mut RandomController, rng, None)).collect()
}

/// Checks that both agents fit the environment's state and action sizes.
pub fn check_dims<T: Scalar>(env: &Env<T>, discrete: &DiscreteSlot<T>, continuous: &ContinuousPpo<T>) -> Result<()> {
    let (d_in, d_out) = match discrete {
        DiscreteSlot::Ppo(a) => (a.state_dim(), a.head.n_actions),
        DiscreteSlot::Dqn(a) => (a.online().input_dim(), a.n_actions()),
    };
    if d_in != env.discrete_state_dim() {
        return Err(Error::Dimension { expected: env.discrete_state_dim(), got: d_in });
    }
    if d_out as u64 != env.n_actions() {
        return Err(Error::Dimension { expected: env.n_actions() as usize, got: d_out });
    }
    if continuous.state_dim() != env.continuous_state_dim() {
        return Err(Error::Dimension { expected: env.continuous_state_dim(), got: continuous.state_dim() });
    }
    Ok(())
}
