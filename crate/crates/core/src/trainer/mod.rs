//! Cascaded two-agent training loop: the allocation agent acts first, the
//! trajectory agent second, the combined action steps the environment and both
//! agents store their own transition. PPO slots update every `horizon` steps;
//! a DQN discrete slot trains from its replay buffer on its own schedule.

mod metrics;
mod rollout;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use metrics::{EvalRow, Metrics, MetricsRow, EVAL_HEADER, METRICS_HEADER};
pub use rollout::{
    check_dims, random_policy_baseline, simulate_episode, Controller, DiscreteSlot, EpisodeSummary, GreedyController,
    HoverController, RandomController, RolloutBuffer,
};

use crate::agents::{
    compute_advantages, ContinuousPpo, DqnAgent, DqnConfig, EpsilonSchedule, Experience, PolicyHead, PpoAgent,
    PpoConfig, Transition,
};
use crate::env::{AllocationAction, Env, EnvConfig, TrajectoryAction};
use crate::error::{Error, Result};
use crate::nn::{CategoricalHead, GaussianHead};
use crate::scalar::{s, Scalar};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscreteAlgo {
    #[default]
    Ppo,
    Dqn,
    DuelingDqn,
}

impl DiscreteAlgo {
    pub fn label(self) -> &'static str {
        match self {
            DiscreteAlgo::Ppo => "ppo-ppo",
            DiscreteAlgo::Dqn => "dqn-ppo",
            DiscreteAlgo::DuelingDqn => "dueling-dqn-ppo",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct TrainConfig<T> {
    pub episodes: usize,
    /// Environment steps between PPO update rounds.
    pub horizon: usize,
    pub epochs: usize,
    pub batch_size: usize,
    /// Greedy evaluation every this many episodes; 0 disables it.
    pub eval_period: usize,
    pub eval_episodes: usize,
    pub seed: u64,
    pub discrete_algo: DiscreteAlgo,
    pub epsilon: EpsilonSchedule,
    /// Gaussian sigma floor as a fraction of `t_slot * v_max`.
    pub sigma_floor_frac: T,
    pub ppo_discrete: PpoConfig<T>,
    pub ppo_continuous: PpoConfig<T>,
    pub dqn: DqnConfig<T>,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            episodes: 5_000,
            horizon: 2048,
            epochs: 10,
            batch_size: 64,
            eval_period: 10,
            eval_episodes: 5,
            seed: 0,
            discrete_algo: DiscreteAlgo::Ppo,
            epsilon: EpsilonSchedule::default(),
            sigma_floor_frac: s(1e-3),
            ppo_discrete: PpoConfig::discrete(),
            ppo_continuous: PpoConfig::continuous(),
            dqn: DqnConfig::default(),
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.batch_size > self.horizon {
            return Err(Error::Config("batch_size must satisfy 1 <= batch_size <= horizon".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be >= 1".into()));
        }
        if self.eval_period > 0 && self.eval_episodes == 0 {
            return Err(Error::Config("eval_episodes must be >= 1 when eval_period > 0".into()));
        }
        if !(self.sigma_floor_frac > T::zero()) {
            return Err(Error::Config("sigma_floor_frac must be > 0".into()));
        }
        self.epsilon.validate()?;
        self.ppo_discrete.validate()?;
        self.ppo_continuous.validate()?;
        self.dqn.validate()
    }
}

/// Mean losses of one update round. `None` where the slot has no such loss.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossReport {
    pub actor_d: Option<f64>,
    pub critic_d: Option<f64>,
    pub actor_c: Option<f64>,
    pub critic_c: Option<f64>,
}

#[derive(Default)]
struct Mean {
    sum: f64,
    n: usize,
}

impl Mean {
    fn add(&mut self, v: Option<f64>) {
        if let Some(v) = v {
            self.sum += v;
            self.n += 1;
        }
    }

    fn get(&self) -> Option<f64> {
        (self.n > 0).then(|| self.sum / self.n as f64)
    }
}

#[derive(Default)]
struct EpisodeLosses {
    actor_d: Mean,
    critic_d: Mean,
    actor_c: Mean,
    critic_c: Mean,
}

fn ppo_epoch_updates<T: Scalar, H: PolicyHead<T>>(
    agent: &mut PpoAgent<T, H>,
    seq: &[Transition<T, H::Action>],
    advantages: &[T],
    order: &[usize],
    batch_size: usize,
    actor: &mut Mean,
    critic: &mut Mean,
) -> Result<()> {
    for chunk in order.chunks(batch_size) {
        let batch: Vec<&Transition<T, H::Action>> = chunk.iter().map(|&i| &seq[i]).collect();
        let adv: Vec<T> = chunk.iter().map(|&i| advantages[i]).collect();
        let (a, c) = agent.update_batch(&batch, &adv)?;
        actor.add(Some(a.to_f64_lossy()));
        critic.add(Some(c.to_f64_lossy()));
    }
    Ok(())
}

/// Consumes the buffer: `epochs` passes of shuffled minibatch updates for each
/// PPO slot, then snapshot refresh and flush.
pub fn update_round<T: Scalar, R: Rng + ?Sized>(
    buffer: &mut RolloutBuffer<T>,
    discrete: &mut DiscreteSlot<T>,
    continuous: &mut ContinuousPpo<T>,
    cfg: &TrainConfig<T>,
    rng: &mut R,
) -> Result<LossReport> {
    if buffer.len() < cfg.horizon {
        return Err(Error::UnderfullBuffer { have: buffer.len(), need: cfg.horizon });
    }
    let adv_c = compute_advantages(&buffer.continuous, continuous.cfg.gamma, continuous.cfg.gae_lambda);
    let adv_d = match discrete {
        DiscreteSlot::Ppo(a) => compute_advantages(&buffer.discrete, a.cfg.gamma, a.cfg.gae_lambda),
        DiscreteSlot::Dqn(_) => Vec::new(),
    };
    let mut order_d: Vec<usize> = (0..buffer.discrete.len()).collect();
    let mut order_c: Vec<usize> = (0..buffer.continuous.len()).collect();
    let mut losses = EpisodeLosses::default();
    for _ in 0..cfg.epochs {
        order_d.shuffle(rng);
        order_c.shuffle(rng);
        if let DiscreteSlot::Ppo(a) = discrete {
            ppo_epoch_updates(
                a,
                &buffer.discrete,
                &adv_d,
                &order_d,
                cfg.batch_size,
                &mut losses.actor_d,
                &mut losses.critic_d,
            )?;
        }
        ppo_epoch_updates(
            continuous,
            &buffer.continuous,
            &adv_c,
            &order_c,
            cfg.batch_size,
            &mut losses.actor_c,
            &mut losses.critic_c,
        )?;
    }
    if let DiscreteSlot::Ppo(a) = discrete {
        a.sync_snapshots();
    }
    continuous.sync_snapshots();
    buffer.clear();
    Ok(LossReport {
        actor_d: losses.actor_d.get(),
        critic_d: losses.critic_d.get(),
        actor_c: losses.actor_c.get(),
        critic_c: losses.critic_c.get(),
    })
}

/// Builds the agent pair for an environment.
pub fn build_agents<T: Scalar, R: Rng + ?Sized>(
    env: &Env<T>,
    cfg: &TrainConfig<T>,
    rng: &mut R,
) -> Result<(DiscreteSlot<T>, ContinuousPpo<T>)> {
    let n_actions = usize::try_from(env.n_actions())
        .map_err(|_| Error::Config("discrete action space does not fit in memory".into()))?;
    let discrete = match cfg.discrete_algo {
        DiscreteAlgo::Ppo => DiscreteSlot::Ppo(PpoAgent::new(
            env.discrete_state_dim(),
            CategoricalHead { n_actions },
            cfg.ppo_discrete.clone(),
            rng,
        )?),
        algo => {
            let dqn = DqnConfig { dueling: algo == DiscreteAlgo::DuelingDqn, ..cfg.dqn.clone() };
            DiscreteSlot::Dqn(DqnAgent::new(env.discrete_state_dim(), n_actions, dqn, rng)?)
        }
    };
    let bound = env.config().max_step();
    let head = GaussianHead::new(bound, cfg.sigma_floor_frac * bound);
    let continuous = PpoAgent::new(env.continuous_state_dim(), head, cfg.ppo_continuous.clone(), rng)?;
    Ok((discrete, continuous))
}

/// Owns the environment, both agents, the rollout buffer and the random
/// streams of one training run.
pub struct Trainer<T> {
    pub env: Env<T>,
    pub cfg: TrainConfig<T>,
    pub discrete: DiscreteSlot<T>,
    pub continuous: ContinuousPpo<T>,
    pub buffer: RolloutBuffer<T>,
    env_rng: ChaCha8Rng,
    act_rng: ChaCha8Rng,
    update_rng: ChaCha8Rng,
    losses: EpisodeLosses,
    rounds: usize,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(id);
    r
}

impl<T: Scalar> Trainer<T> {
    pub fn new(env_cfg: EnvConfig<T>, cfg: TrainConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let env = Env::new(env_cfg)?;
        let mut init_rng = stream(cfg.seed, 0);
        let (discrete, continuous) = build_agents(&env, &cfg, &mut init_rng)?;
        Self::with_agents(env, cfg, discrete, continuous)
    }

    /// Uses caller-supplied agents; their dimensions must match `env`.
    pub fn with_agents(
        env: Env<T>,
        cfg: TrainConfig<T>,
        discrete: DiscreteSlot<T>,
        continuous: ContinuousPpo<T>,
    ) -> Result<Self> {
        cfg.validate()?;
        check_dims(&env, &discrete, &continuous)?;
        Ok(Self {
            env_rng: stream(cfg.seed, 1),
            act_rng: stream(cfg.seed, 2),
            update_rng: stream(cfg.seed, 3),
            env,
            cfg,
            discrete,
            continuous,
            buffer: RolloutBuffer::new(),
            losses: EpisodeLosses::default(),
            rounds: 0,
        })
    }

    /// Update rounds completed so far.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// One exploratory episode; stores transitions and runs update rounds
    /// whenever the buffer reaches the horizon.
    pub fn run_episode(&mut self) -> Result<EpisodeSummary> {
        let env = &self.env;
        let mut state = env.reset(&mut self.env_rng);
        let mut s_d = env.state_vector_discrete(&state);
        let mut s_c = env.state_vector_continuous(&state);
        let mut summary = EpisodeSummary {
            mission_time: 0,
            sum_r_ch: 0.0,
            sum_r_traj: 0.0,
            success: false,
            collected_bits: 0.0,
            residual_bits: 0.0,
        };
        loop {
            // discrete slot first; its allocation is fixed before the trajectory agent moves
            let (a_idx, d_logp, d_value) = match &self.discrete {
                DiscreteSlot::Ppo(a) => {
                    let act = a.act(&s_d, &mut self.act_rng)?;
                    (act.action, act.log_prob, act.value)
                }
                DiscreteSlot::Dqn(q) => (q.act(&s_d, &mut self.act_rng)?, T::zero(), T::zero()),
            };
            let c_act = self.continuous.act(&s_c, &mut self.act_rng)?;
            let [dx, dy] = c_act.action;
            let (next, out) =
                env.step(&state, AllocationAction(a_idx as u64), TrajectoryAction { dx, dy }, &mut self.env_rng)?;

            let ns_d = env.state_vector_discrete(&next);
            let ns_c = env.state_vector_continuous(&next);
            summary.sum_r_ch += out.r_ch.to_f64_lossy();
            summary.sum_r_traj += out.r_traj.to_f64_lossy();
            summary.collected_bits += out.collected_bits.iter().map(|c| c.to_f64_lossy()).sum::<f64>();

            match &mut self.discrete {
                DiscreteSlot::Ppo(a) => {
                    let old_next_value = if out.done { T::zero() } else { a.old_value(&ns_d)? };
                    self.buffer.discrete.push(Transition {
                        state: s_d,
                        action: a_idx,
                        reward: out.r_ch,
                        next_state: ns_d.clone(),
                        done: out.done,
                        old_value: d_value,
                        old_next_value,
                        old_log_prob: d_logp,
                    });
                }
                DiscreteSlot::Dqn(q) => {
                    q.observe(Experience {
                        state: s_d,
                        action: a_idx,
                        reward: out.r_ch,
                        next_state: ns_d.clone(),
                        done: out.done,
                    });
                    let loss = q.after_step(&mut self.update_rng)?;
                    self.losses.critic_d.add(loss.map(|l| l.to_f64_lossy()));
                }
            }
            let old_next_value = if out.done { T::zero() } else { self.continuous.old_value(&ns_c)? };
            self.buffer.continuous.push(Transition {
                state: s_c,
                action: c_act.action,
                reward: out.r_traj,
                next_state: ns_c.clone(),
                done: out.done,
                old_value: c_act.value,
                old_next_value,
                old_log_prob: c_act.log_prob,
            });

            if self.buffer.len() >= self.cfg.horizon {
                let report = update_round(
                    &mut self.buffer,
                    &mut self.discrete,
                    &mut self.continuous,
                    &self.cfg,
                    &mut self.update_rng,
                )?;
                self.rounds += 1;
                self.losses.actor_d.add(report.actor_d);
                self.losses.critic_d.add(report.critic_d);
                self.losses.actor_c.add(report.actor_c);
                self.losses.critic_c.add(report.critic_c);
            }

            state = next;
            s_d = ns_d;
            s_c = ns_c;
            if out.done {
                summary.mission_time = state.step;
                summary.success = out.success;
                summary.residual_bits = state.u_res.iter().map(|u| u.to_f64_lossy()).sum();
                return Ok(summary);
            }
        }
    }

    /// Greedy episodes on a private random stream; learning state is untouched.
    pub fn evaluate(&self, episodes: usize, stream_id: u64) -> Result<Vec<EpisodeSummary>> {
        let mut rng = stream(self.cfg.seed ^ 0x5eed_e7a1, stream_id);
        let mut ctl = GreedyController { discrete: &self.discrete, continuous: &self.continuous };
        (0..episodes).map(|_| simulate_episode(&self.env, &mut ctl, &mut rng, None)).collect()
    }

    /// Runs the configured number of episodes.
    pub fn train(&mut self) -> Result<Metrics> {
        self.train_with(|_, _| {})
    }

    /// Like [`Trainer::train`], calling `progress(episode, row)` after each episode.
    pub fn train_with<F: FnMut(usize, &MetricsRow)>(&mut self, mut progress: F) -> Result<Metrics> {
        let total = self.cfg.episodes;
        let mut metrics = Metrics::default();
        for ep in 0..total {
            let eps = self.cfg.epsilon.value(ep, total);
            self.discrete.set_epsilon(eps);
            self.losses = EpisodeLosses::default();
            let sum = self.run_episode()?;
            let row = MetricsRow {
                episode: ep,
                mission_time: sum.mission_time,
                success: sum.success,
                sum_r_ch: sum.sum_r_ch,
                sum_r_traj: sum.sum_r_traj,
                actor_loss_d: self.losses.actor_d.get(),
                critic_loss_d: self.losses.critic_d.get(),
                actor_loss_c: self.losses.actor_c.get(),
                critic_loss_c: self.losses.critic_c.get(),
                epsilon: eps,
            };
            progress(ep, &row);
            metrics.rows.push(row);
            if self.cfg.eval_period > 0 && (ep + 1) % self.cfg.eval_period == 0 {
                let runs = self.evaluate(self.cfg.eval_episodes, ep as u64)?;
                let n = runs.len() as f64;
                metrics.evals.push(EvalRow {
                    episode: ep,
                    mean_mission_time: runs.iter().map(|r| r.mission_time as f64).sum::<f64>() / n,
                    success_rate: runs.iter().filter(|r| r.success).count() as f64 / n,
                    mean_r_ch: runs.iter().map(|r| r.sum_r_ch).sum::<f64>() / n,
                    mean_r_traj: runs.iter().map(|r| r.sum_r_traj).sum::<f64>() / n,
                });
            }
        }
        Ok(metrics)
    }
}

/// Convenience wrapper: build a trainer and run it.
pub fn train<T: Scalar>(env_cfg: EnvConfig<T>, cfg: TrainConfig<T>) -> Result<Metrics> {
    Trainer::new(env_cfg, cfg)?.train()
}
