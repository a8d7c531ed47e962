//! Deep Q-learning baselines (plain and dueling) with uniform replay and a
//! periodically synchronised target network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{argmax, Activation, Adam, Grads, Mlp};
use crate::scalar::{s, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Experience<T> {
    pub state: Vec<T>,
    pub action: usize,
    pub reward: T,
    pub next_state: Vec<T>,
    pub done: bool,
}

/// Fixed-capacity ring buffer; the oldest entry is overwritten first.
#[derive(Clone, Debug, Default)]
pub struct ReplayBuffer<T> {
    items: Vec<Experience<T>>,
    capacity: usize,
    next: usize,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        Self { items: Vec::with_capacity(capacity.min(1 << 16)), capacity, next: 0 }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn push(&mut self, e: Experience<T>) {
        if self.items.len() < self.capacity {
            self.items.push(e);
        } else {
            self.items[self.next] = e;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Uniform draw with replacement.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Experience<T>> {
        (0..n).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct DqnConfig<T> {
    pub gamma: T,
    pub lr: T,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    /// Transitions collected before the first update.
    pub warmup: usize,
    /// Updates between target-network syncs.
    pub sync_period: u64,
    /// Environment steps between updates.
    pub train_every: u64,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub dueling: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_grad_norm: Option<T>,
}

impl<T: Scalar> Default for DqnConfig<T> {
    fn default() -> Self {
        Self {
            gamma: s(0.99),
            lr: s(1e-3),
            batch_size: 64,
            buffer_capacity: 50_000,
            warmup: 1_000,
            sync_period: 500,
            train_every: 1,
            hidden: vec![128, 128],
            activation: Activation::Tanh,
            dueling: false,
            max_grad_norm: Some(s(10.0)),
        }
    }
}

impl<T: Scalar> DqnConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(Error::Config("dqn needs batch_size >= 1 and buffer_capacity >= batch_size".into()));
        }
        if self.sync_period == 0 || self.train_every == 0 {
            return Err(Error::Config("dqn sync_period and train_every must be >= 1".into()));
        }
        if !(self.gamma > T::zero() && self.gamma <= T::one()) {
            return Err(Error::Config("dqn gamma must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

/// `Q = V + A - mean(A)` from a `[V, A_0 .. A_{K-1}]` output.
pub fn dueling_q<T: Scalar>(out: &[T]) -> Vec<T> {
    let v = out[0];
    let adv = &out[1..];
    let mean = adv.iter().copied().sum::<T>() / T::from_usize_lossy(adv.len());
    adv.iter().map(|&a| v + a - mean).collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DqnAgent<T> {
    pub cfg: DqnConfig<T>,
    n_actions: usize,
    online: Mlp<T>,
    target: Mlp<T>,
    opt: Adam<T>,
    #[serde(skip)]
    replay: ReplayBuffer<T>,
    pub updates: u64,
    pub steps: u64,
    pub epsilon: f64,
}

impl<T: Scalar> DqnAgent<T> {
    pub fn new<R: Rng + ?Sized>(state_dim: usize, n_actions: usize, cfg: DqnConfig<T>, rng: &mut R) -> Result<Self> {
        cfg.validate()?;
        let mut dims = vec![state_dim];
        dims.extend(&cfg.hidden);
        dims.push(if cfg.dueling { n_actions + 1 } else { n_actions });
        let online = Mlp::new(&dims, cfg.activation, Activation::Linear, 1.0, rng)?;
        Ok(Self {
            n_actions,
            target: online.clone(),
            opt: Adam::new(&online, cfg.lr),
            online,
            replay: ReplayBuffer::new(cfg.buffer_capacity),
            cfg,
            updates: 0,
            steps: 0,
            epsilon: 0.0,
        })
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn online(&self) -> &Mlp<T> {
        &self.online
    }

    pub fn online_mut(&mut self) -> &mut Mlp<T> {
        &mut self.online
    }

    pub fn target(&self) -> &Mlp<T> {
        &self.target
    }

    pub fn replay(&self) -> &ReplayBuffer<T> {
        &self.replay
    }

    fn to_q(&self, out: Vec<T>) -> Vec<T> {
        if self.cfg.dueling {
            dueling_q(&out)
        } else {
            out
        }
    }

    pub fn q_values(&self, state: &[T]) -> Result<Vec<T>> {
        Ok(self.to_q(self.online.forward(state)?))
    }

    pub fn target_q_values(&self, state: &[T]) -> Result<Vec<T>> {
        Ok(self.to_q(self.target.forward(state)?))
    }

    /// Epsilon-greedy over `Q(s, .)`; ties go to the lowest index.
    pub fn act<R: Rng + ?Sized>(&self, state: &[T], rng: &mut R) -> Result<usize> {
        if self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon {
            return Ok(rng.random_range(0..self.n_actions));
        }
        self.act_greedy(state)
    }

    pub fn act_greedy(&self, state: &[T]) -> Result<usize> {
        Ok(argmax(&self.q_values(state)?))
    }

    pub fn observe(&mut self, e: Experience<T>) {
        self.replay.push(e);
    }

    /// Mean squared TD error against `r + gamma max_a' Q_target(s', a')`.
    pub fn td_loss(&mut self, batch: &[&Experience<T>]) -> Result<(T, Grads<T>)> {
        if batch.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let n = T::from_usize_lossy(batch.len());
        let k = T::from_usize_lossy(self.n_actions);
        let mut grads = Grads::zeros_like(&self.online);
        let mut loss = T::zero();
        for e in batch {
            let y = if e.done {
                e.reward
            } else {
                let next = self.target_q_values(&e.next_state)?;
                e.reward + self.cfg.gamma * next[argmax(&next)]
            };
            let out = self.online.forward_train(&e.state)?;
            let q = self.to_q(out.clone());
            let err = q[e.action] - y;
            loss += err * err;
            let dq = s::<T>(2.0) * err / n;
            let mut g = vec![T::zero(); out.len()];
            if self.cfg.dueling {
                g[0] = dq;
                for (j, gj) in g.iter_mut().enumerate().skip(1) {
                    let hit = if j - 1 == e.action { T::one() } else { T::zero() };
                    *gj = dq * (hit - T::one() / k);
                }
            } else {
                g[e.action] = dq;
            }
            self.online.backward_accumulate(&g, &mut grads)?;
        }
        Ok((loss / n, grads))
    }

    /// One gradient step on a replay minibatch; syncs the target every
    /// `sync_period` updates.
    pub fn update<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<T> {
        let need = self.cfg.batch_size;
        if self.replay.len() < need {
            return Err(Error::UnderfullBuffer { have: self.replay.len(), need });
        }
        let batch: Vec<Experience<T>> = self.replay.sample(need, rng).into_iter().cloned().collect();
        let refs: Vec<&Experience<T>> = batch.iter().collect();
        let (loss, mut grads) = self.td_loss(&refs)?;
        if let Some(max) = self.cfg.max_grad_norm {
            grads.clip_norm(max);
        }
        self.opt.step(&mut self.online, &grads)?;
        self.updates += 1;
        if self.updates % self.cfg.sync_period == 0 {
            self.sync_target();
        }
        Ok(loss)
    }

    /// Counts an environment step and trains when the schedule says so.
    pub fn after_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Option<T>> {
        self.steps += 1;
        let ready = self.replay.len() >= self.cfg.warmup.max(self.cfg.batch_size);
        if ready && self.steps % self.cfg.train_every == 0 {
            return self.update(rng).map(Some);
        }
        Ok(None)
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    pub fn set_learning_rate(&mut self, lr: T) {
        self.cfg.lr = lr;
        self.opt.lr = lr;
    }

    /// Replay contents are not checkpointed; a restored agent starts with an
    /// empty buffer of the configured capacity.
    pub(crate) fn restore_replay(&mut self) {
        self.replay = ReplayBuffer::new(self.cfg.buffer_capacity);
    }
}
