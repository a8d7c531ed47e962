//! Clipped-surrogate PPO with a one-step TD critic against a frozen snapshot.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::policy::PolicyHead;
use crate::error::{Error, Result};
use crate::nn::{Activation, Adam, CategoricalHead, GaussianHead, Grads, Mlp};
use crate::scalar::{s, Scalar};

/// One saved interaction step. `old_*` fields come from the snapshot networks
/// that were live when the step was taken.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar, A: Serialize + serde::de::DeserializeOwned")]
pub struct Transition<T, A> {
    pub state: Vec<T>,
    pub action: A,
    pub reward: T,
    pub next_state: Vec<T>,
    pub done: bool,
    /// `V_old(s)`.
    pub old_value: T,
    /// `V_old(s')`; ignored when `done`.
    pub old_next_value: T,
    /// `log pi_old(a | s)`.
    pub old_log_prob: T,
}

impl<T: Scalar, A> Transition<T, A> {
    /// Bootstrap target `r + gamma V_old(s')`, with no bootstrap at terminals.
    #[inline]
    pub fn td_target(&self, gamma: T) -> T {
        if self.done {
            self.reward
        } else {
            self.reward + gamma * self.old_next_value
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct PpoConfig<T> {
    pub clip: T,
    pub gamma: T,
    /// `Some(lambda)` switches the advantage estimator to GAE.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gae_lambda: Option<T>,
    pub entropy_coef: T,
    pub actor_lr: T,
    pub critic_lr: T,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_grad_norm: Option<T>,
    pub normalize_advantages: bool,
}

impl<T: Scalar> PpoConfig<T> {
    pub fn discrete() -> Self {
        Self {
            clip: s(0.2),
            gamma: s(0.99),
            gae_lambda: None,
            entropy_coef: s(0.005),
            actor_lr: s(3e-4),
            critic_lr: s(1e-3),
            hidden: vec![128, 128],
            activation: Activation::Tanh,
            max_grad_norm: Some(s(0.5)),
            normalize_advantages: true,
        }
    }

    pub fn continuous() -> Self {
        Self { entropy_coef: s(0.01), ..Self::discrete() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.clip > T::zero() && self.clip < T::one()) {
            return Err(Error::Config("ppo clip must lie in (0, 1)".into()));
        }
        if !(self.gamma > T::zero() && self.gamma <= T::one()) {
            return Err(Error::Config("ppo gamma must lie in (0, 1]".into()));
        }
        if let Some(l) = self.gae_lambda {
            if !(l >= T::zero() && l <= T::one()) {
                return Err(Error::Config("gae_lambda must lie in [0, 1]".into()));
            }
        }
        if !(self.actor_lr >= T::zero()) || !(self.critic_lr >= T::zero()) || !(self.entropy_coef >= T::zero()) {
            return Err(Error::Config("learning rates and entropy_coef must be >= 0".into()));
        }
        Ok(())
    }
}

/// What [`PpoAgent::act`] returns for the transition record.
#[derive(Clone, Debug, PartialEq)]
pub struct PpoAct<T, A> {
    pub action: A,
    pub log_prob: T,
    pub value: T,
}

/// Loss value with gradients for the live network it was computed on.
#[derive(Clone, Debug)]
pub struct LossGrads<T> {
    pub loss: T,
    pub grads: Grads<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar, H: PolicyHead<T>")]
pub struct PpoAgent<T, H> {
    pub cfg: PpoConfig<T>,
    pub head: H,
    actor: Mlp<T>,
    critic: Mlp<T>,
    old_actor: Mlp<T>,
    old_critic: Mlp<T>,
    actor_opt: Adam<T>,
    critic_opt: Adam<T>,
    /// Uniform-mixing rate used by exploratory acting (discrete heads only).
    pub epsilon: f64,
}

/// Channel-allocation agent.
pub type DiscretePpo<T> = PpoAgent<T, CategoricalHead>;
/// Trajectory agent.
pub type ContinuousPpo<T> = PpoAgent<T, GaussianHead<T>>;

impl<T: Scalar, H: PolicyHead<T>> PpoAgent<T, H> {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, head: H, cfg: PpoConfig<T>, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let mut actor_dims = vec![state_dim];
        actor_dims.extend(&cfg.hidden);
        let mut critic_dims = actor_dims.clone();
        actor_dims.push(head.n_outputs());
        critic_dims.push(1);
        let actor = Mlp::new(&actor_dims, cfg.activation, Activation::Linear, 0.01, rng)?;
        let critic = Mlp::new(&critic_dims, cfg.activation, Activation::Linear, 1.0, rng)?;
        Ok(Self {
            actor_opt: Adam::new(&actor, cfg.actor_lr),
            critic_opt: Adam::new(&critic, cfg.critic_lr),
            old_actor: actor.clone(),
            old_critic: critic.clone(),
            actor,
            critic,
            head,
            cfg,
            epsilon: 0.0,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.actor.input_dim()
    }

    pub fn actor(&self) -> &Mlp<T> {
        &self.actor
    }

    pub fn critic(&self) -> &Mlp<T> {
        &self.critic
    }

    pub fn old_actor(&self) -> &Mlp<T> {
        &self.old_actor
    }

    pub fn old_critic(&self) -> &Mlp<T> {
        &self.old_critic
    }

    pub fn actor_mut(&mut self) -> &mut Mlp<T> {
        &mut self.actor
    }

    pub fn critic_mut(&mut self) -> &mut Mlp<T> {
        &mut self.critic
    }

    /// Exploratory action from the snapshot policy plus the values the
    /// transition record needs.
    pub fn act<R: Rng + ?Sized>(&self, state: &[T], rng: &mut R) -> Result<PpoAct<T, H::Action>> {
        let out = self.old_actor.forward(state)?;
        let action = self.head.sample(&out, self.epsilon, rng);
        let log_prob = self.head.log_prob(&out, &action);
        let value = self.old_value(state)?;
        Ok(PpoAct { action, log_prob, value })
    }

    /// Mode of the snapshot policy.
    pub fn act_greedy(&self, state: &[T]) -> Result<H::Action> {
        Ok(self.head.greedy(&self.old_actor.forward(state)?))
    }

    /// `V_old(s)`.
    pub fn old_value(&self, state: &[T]) -> Result<T> {
        Ok(self.old_critic.forward(state)?[0])
    }

    /// `log pi(a|s)` under the live actor.
    pub fn log_prob(&self, state: &[T], action: &H::Action) -> Result<T> {
        Ok(self.head.log_prob(&self.actor.forward(state)?, action))
    }

    /// Mean squared TD error of the live critic against frozen targets.
    pub fn critic_loss(&mut self, batch: &[&Transition<T, H::Action>]) -> Result<LossGrads<T>> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let n = T::from_usize_lossy(batch.len());
        let mut grads = Grads::zeros_like(&self.critic);
        let mut loss = T::zero();
        for tr in batch {
            let v = self.critic.forward_train(&tr.state)?[0];
            let err = v - tr.td_target(self.cfg.gamma);
            loss += err * err;
            self.critic.backward_accumulate(&[s::<T>(2.0) * err / n], &mut grads)?;
        }
        Ok(LossGrads { loss: loss / n, grads })
    }

    /// Clipped surrogate minus the entropy bonus, averaged over the batch.
    /// `advantages` align with `batch` and are normalised here when configured.
    pub fn actor_loss(
        &mut self,
        batch: &[&Transition<T, H::Action>],
        advantages: &[T],
    ) -> Result<LossGrads<T>> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if advantages.len() != batch.len() {
            return Err(Error::Dimension { expected: batch.len(), got: advantages.len() });
        }
        let adv = if self.cfg.normalize_advantages {
            normalize(advantages)
        } else {
            advantages.to_vec()
        };
        let n = T::from_usize_lossy(batch.len());
        let (lo, hi) = (T::one() - self.cfg.clip, T::one() + self.cfg.clip);
        let mut grads = Grads::zeros_like(&self.actor);
        let mut loss = T::zero();
        for (tr, &a) in batch.iter().zip(&adv) {
            let out = self.actor.forward_train(&tr.state)?;
            let (logp, dlogp) = self.head.log_prob_grad(&out, &tr.action);
            let (entropy, dent) = self.head.entropy_grad(&out);
            let ratio = (logp - tr.old_log_prob).exp();
            let unclipped = ratio * a;
            let clipped = ratio.max(lo).min(hi) * a;
            // d(-min)/d(logp) is -ratio*A on the unclipped branch, zero on the clipped one
            let coef = if unclipped <= clipped { -unclipped / n } else { T::zero() };
            loss += -unclipped.min(clipped) - self.cfg.entropy_coef * entropy;
            let ent = self.cfg.entropy_coef / n;
            let g: Vec<T> = dlogp.iter().zip(&dent).map(|(&dl, &de)| coef * dl - ent * de).collect();
            self.actor.backward_accumulate(&g, &mut grads)?;
        }
        Ok(LossGrads { loss: loss / n, grads })
    }

    /// One optimiser step for actor and critic on the same batch; returns
    /// `(actor_loss, critic_loss)` measured before the step.
    pub fn update_batch(&mut self, batch: &[&Transition<T, H::Action>], advantages: &[T]) -> Result<(T, T)> {
        let mut a = self.actor_loss(batch, advantages)?;
        let mut c = self.critic_loss(batch)?;
        if let Some(max) = self.cfg.max_grad_norm {
            a.grads.clip_norm(max);
            c.grads.clip_norm(max);
        }
        self.actor_opt.step(&mut self.actor, &a.grads)?;
        self.critic_opt.step(&mut self.critic, &c.grads)?;
        Ok((a.loss, c.loss))
    }

    /// `theta' <- theta`, `phi' <- phi`.
    pub fn sync_snapshots(&mut self) {
        self.old_actor = self.actor.clone();
        self.old_critic = self.critic.clone();
    }

    pub fn set_learning_rates(&mut self, actor_lr: T, critic_lr: T) {
        self.cfg.actor_lr = actor_lr;
        self.cfg.critic_lr = critic_lr;
        self.actor_opt.lr = actor_lr;
        self.critic_opt.lr = critic_lr;
    }
}

/// Zero-mean, unit-variance copy. A constant input maps to all zeros.
pub fn normalize<T: Scalar>(xs: &[T]) -> Vec<T> {
    let n = T::from_usize_lossy(xs.len());
    let mean = xs.iter().copied().sum::<T>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / n;
    let sd = var.sqrt() + s(1e-8);
    xs.iter().map(|&x| (x - mean) / sd).collect()
}

/// Advantages for a time-ordered sequence of transitions.
///
/// With `lambda = None` this is the one-step TD error
/// `r + gamma V_old(s') - V_old(s)`; with `Some(lambda)` it is GAE, with the
/// recursion cut at terminals and at the end of the slice.
pub fn compute_advantages<T: Scalar, A>(seq: &[Transition<T, A>], gamma: T, lambda: Option<T>) -> Vec<T> {
    let deltas: Vec<T> = seq.iter().map(|t| t.td_target(gamma) - t.old_value).collect();
    let Some(lambda) = lambda else {
        return deltas;
    };
    let mut out = vec![T::zero(); seq.len()];
    let mut running = T::zero();
    for i in (0..seq.len()).rev() {
        if seq[i].done || i + 1 == seq.len() {
            running = T::zero();
        }
        running = deltas[i] + gamma * lambda * running;
        out[i] = running;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_cfg() -> PpoConfig<f64> {
        PpoConfig { hidden: vec![6], ..PpoConfig::discrete() }
    }

    fn agent() -> DiscretePpo<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        PpoAgent::new(3, CategoricalHead { n_actions: 4 }, small_cfg(), &mut rng).unwrap()
    }

    fn tr(state: Vec<f64>, action: usize, reward: f64, done: bool) -> Transition<f64, usize> {
        Transition {
            state: state.clone(),
            action,
            reward,
            next_state: state,
            done,
            old_value: 0.0,
            old_next_value: 0.0,
            old_log_prob: 0.0,
        }
    }

    #[test]
    fn critic_loss_zero_at_target() {
        let mut a = agent();
        let s0 = vec![0.1, 0.2, 0.3];
        let v = a.critic().forward(&s0).unwrap()[0];
        let mut t = tr(s0, 0, 0.0, false);
        t.old_next_value = 0.7;
        t.reward = v - 0.99 * 0.7;
        let l = a.critic_loss(&[&t]).unwrap();
        assert!(l.loss.abs() < 1e-24);
    }

    #[test]
    fn critic_loss_terminal_uses_reward_only() {
        let mut a = agent();
        for l in a.critic_mut().layers_mut() {
            l.weights.iter_mut().for_each(|w| *w = 0.0);
        }
        let mut t = tr(vec![1.0, 1.0, 1.0], 0, -1.0, true);
        t.old_next_value = 55.0;
        assert_eq!(a.critic_loss(&[&t]).unwrap().loss, 1.0);
    }

    #[test]
    fn empty_batches_rejected() {
        let mut a = agent();
        assert!(matches!(a.critic_loss(&[]), Err(Error::EmptyBatch)));
        assert!(matches!(a.actor_loss(&[], &[]), Err(Error::EmptyBatch)));
    }

    #[test]
    fn surrogate_vanishes_at_snapshot_with_normalised_advantages() {
        let mut a = PpoAgent::new(
            3,
            CategoricalHead { n_actions: 4 },
            PpoConfig { entropy_coef: 0.0, ..small_cfg() },
            &mut ChaCha8Rng::seed_from_u64(3),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let batch: Vec<Transition<f64, usize>> = (0..6)
            .map(|i| {
                let st = vec![i as f64 * 0.1, -0.2, 0.3];
                let act = a.act(&st, &mut rng).unwrap();
                Transition { old_log_prob: act.log_prob, ..tr(st, act.action, 0.0, false) }
            })
            .collect();
        let refs: Vec<_> = batch.iter().collect();
        let adv = [1.0, -2.0, 0.5, 3.0, 0.0, -1.0];
        let l = a.actor_loss(&refs, &adv).unwrap();
        assert!(l.loss.abs() < 1e-12);
    }

    #[test]
    fn advantages_one_step_and_gae() {
        let mut seq = vec![tr(vec![0.0], 0, 1.0, false), tr(vec![0.0], 0, 2.0, false), tr(vec![0.0], 0, 3.0, true)];
        for (i, t) in seq.iter_mut().enumerate() {
            t.old_value = i as f64;
            t.old_next_value = i as f64 + 1.0;
        }
        let one = compute_advantages(&seq, 0.5, None);
        assert_eq!(one, vec![1.0 + 0.5 - 0.0, 2.0 + 1.0 - 1.0, 3.0 - 2.0]);
        // lambda = 0 reproduces the one-step estimator
        assert_eq!(compute_advantages(&seq, 0.5, Some(0.0)), one);
        let gae = compute_advantages(&seq, 0.5, Some(1.0));
        assert!((gae[2] - one[2]).abs() < 1e-15);
        assert!((gae[1] - (one[1] + 0.5 * one[2])).abs() < 1e-15);
        assert!((gae[0] - (one[0] + 0.5 * gae[1])).abs() < 1e-15);
    }

    #[test]
    fn normalize_constant_is_zero() {
        assert!(normalize(&[2.0, 2.0, 2.0]).iter().all(|&v| v == 0.0));
        let z = normalize(&[1.0, 2.0, 3.0, 4.0]);
        assert!(z.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let bad = PpoConfig { clip: 1.5, ..small_cfg() };
        assert!(PpoAgent::new(3, CategoricalHead { n_actions: 2 }, bad, &mut rng).is_err());
    }
}
