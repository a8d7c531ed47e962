use rand::Rng;

use super::codec::{action_count, decode_allocation, Allocation, AllocationAction};
use super::config::{ClampMode, EnvConfig, RewardMode};
use crate::channel::{self, FadingDraw};
use crate::error::{Error, Result};
use crate::scalar::{s, Scalar};

/// Commanded horizontal displacement for one slot, in metres.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrajectoryAction<T> {
    pub dx: T,
    pub dy: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvState<T> {
    /// Bits still waiting at each MDC.
    pub u_res: Vec<T>,
    pub uav_xy: [T; 2],
    /// Fading realisation for the upcoming slot.
    pub fading: FadingDraw<T>,
    /// Slots elapsed.
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome<T> {
    pub r_ch: T,
    pub r_traj: T,
    pub collected_bits: Vec<T>,
    pub done: bool,
    pub success: bool,
    /// UAV ended the slot outside `[0, L]²`.
    pub out_of_region: bool,
}

/// A validated scenario with its resolved MDC layout.
#[derive(Clone, Debug)]
pub struct Env<T> {
    cfg: EnvConfig<T>,
    positions: Vec<[T; 2]>,
    n_actions: u64,
    feature_offset: T,
    feature_scale: T,
    log_floor: T,
}

impl<T: Scalar> Env<T> {
    pub fn new(cfg: EnvConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let positions = cfg.mdc_positions.resolve(cfg.n_mdcs, cfg.area_m)?;
        let n_actions = action_count(cfg.n_mdcs, cfg.n_channels)?;
        let h = cfg.radio.uav_height_m;
        let l = cfg.area_m;
        let near = channel::large_scale_gain(&cfg.radio, h)?.log10();
        let far_d = (s::<T>(2.0) * l * l + h * h).sqrt();
        let far = channel::large_scale_gain(&cfg.radio, far_d)?.log10();
        Ok(Self {
            positions,
            n_actions,
            feature_offset: far,
            feature_scale: near - far,
            // gains more than 40 dB below the farthest point are all the same to the agents
            log_floor: far - s(4.0),
            cfg,
        })
    }

    #[inline]
    pub fn config(&self) -> &EnvConfig<T> {
        &self.cfg
    }

    #[inline]
    pub fn mdc_positions(&self) -> &[[T; 2]] {
        &self.positions
    }

    #[inline]
    pub fn n_actions(&self) -> u64 {
        self.n_actions
    }

    /// Length of the discrete agent's state vector, `N + N*M`.
    #[inline]
    pub fn discrete_state_dim(&self) -> usize {
        self.cfg.n_mdcs * (1 + self.cfg.n_channels)
    }

    /// Length of the trajectory agent's state vector, `N + N*M + 2`.
    #[inline]
    pub fn continuous_state_dim(&self) -> usize {
        self.discrete_state_dim() + 2
    }

    pub fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> EnvState<T> {
        EnvState {
            u_res: vec![self.cfg.data_size_bits; self.cfg.n_mdcs],
            uav_xy: self.cfg.uav_start(),
            fading: channel::sample_fading(&self.cfg.radio, rng, self.cfg.n_mdcs, self.cfg.n_channels),
            step: 0,
        }
    }

    pub fn is_terminal(&self, state: &EnvState<T>) -> bool {
        state.u_res.iter().all(|&u| u <= T::zero()) || state.step > self.cfg.t_max
    }

    pub fn decode(&self, action: AllocationAction) -> Result<Allocation> {
        decode_allocation(action, self.cfg.n_mdcs, self.cfg.n_channels)
    }

    /// Large-scale gain from every MDC to a UAV at `uav_xy`.
    pub fn large_scale_gains(&self, uav_xy: [T; 2]) -> Vec<T> {
        let h = self.cfg.radio.uav_height_m;
        self.positions
            .iter()
            .map(|&p| {
                let d = channel::distance(p, uav_xy, h);
                // d >= H >= 1, never fails
                channel::large_scale_gain(&self.cfg.radio, d).unwrap_or(T::zero())
            })
            .collect()
    }

    /// Rate of every MDC under `alloc` for the UAV position and fading in `state`.
    ///
    /// Unassigned and drained MDCs neither transmit nor interfere.
    pub fn slot_rates(&self, state: &EnvState<T>, alloc: &Allocation) -> Vec<T> {
        let radio = &self.cfg.radio;
        let betas = self.large_scale_gains(state.uav_xy);
        let mut rates = vec![T::zero(); self.cfg.n_mdcs];
        for ch in 1..=self.cfg.n_channels {
            let occupants: Vec<usize> = alloc
                .per_mdc
                .iter()
                .enumerate()
                .filter(|&(n, &c)| c == ch && state.u_res[n] > T::zero())
                .map(|(n, _)| n)
                .collect();
            if occupants.is_empty() {
                continue;
            }
            let cnrs: Vec<T> = occupants
                .iter()
                .map(|&n| {
                    let gain = channel::channel_gain(betas[n], state.fading.get(n, ch - 1));
                    channel::cnr(radio, gain)
                })
                .collect();
            for (k, &n) in occupants.iter().enumerate() {
                let g = channel::sinr(radio.tx_power_w, &cnrs, k);
                rates[n] = channel::rate(radio, g);
            }
        }
        rates
    }

    /// Applies the configured displacement limit.
    pub fn clamp_action(&self, a: TrajectoryAction<T>) -> TrajectoryAction<T> {
        let bound = self.cfg.max_step();
        let finite = |v: T| if v.is_finite() { v } else { T::zero() };
        let (dx, dy) = (finite(a.dx), finite(a.dy));
        match self.cfg.clamp_mode {
            ClampMode::PerAxis => TrajectoryAction {
                dx: dx.max(-bound).min(bound),
                dy: dy.max(-bound).min(bound),
            },
            ClampMode::Norm => {
                let norm = (dx * dx + dy * dy).sqrt();
                if norm > bound {
                    let k = bound / norm;
                    TrajectoryAction { dx: dx * k, dy: dy * k }
                } else {
                    TrajectoryAction { dx, dy }
                }
            }
        }
    }

    pub fn in_region(&self, xy: [T; 2]) -> bool {
        let l = self.cfg.area_m;
        xy.iter().all(|&c| c >= T::zero() && c <= l)
    }

    /// Advances one slot: move, transmit over the current fading, book rewards,
    /// redraw fading.
    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &EnvState<T>,
        a_ch: AllocationAction,
        a_traj: TrajectoryAction<T>,
        rng: &mut R,
    ) -> Result<(EnvState<T>, StepOutcome<T>)> {
        if self.is_terminal(state) {
            return Err(Error::TerminalState);
        }
        let cfg = &self.cfg;
        let alloc = self.decode(a_ch)?;
        let mv = self.clamp_action(a_traj);

        let mut next = state.clone();
        next.uav_xy = [state.uav_xy[0] + mv.dx, state.uav_xy[1] + mv.dy];

        let rates = self.slot_rates(&next, &alloc);
        let collected: Vec<T> = rates
            .iter()
            .zip(&state.u_res)
            .map(|(&r, &u)| u.min(cfg.t_slot * r))
            .collect();
        for (u, &c) in next.u_res.iter_mut().zip(&collected) {
            *u -= c;
        }

        next.step = state.step + 1;
        let success = next.u_res.iter().all(|&u| u <= T::zero());
        let failed = !success && next.step > cfg.t_max;

        let u = cfg.data_size_bits;
        let r_ch = if failed {
            cfg.r_fail
        } else {
            match cfg.reward_mode {
                RewardMode::Shaped => {
                    let total: T = collected.iter().copied().sum();
                    cfg.r_time + cfg.w_data() * total / u
                }
                RewardMode::Literal => {
                    let offered: T = rates.iter().map(|&r| cfg.t_slot * r).sum();
                    cfg.r_time / u * offered
                }
            }
        };
        let out_of_region = !self.in_region(next.uav_xy);
        let r_traj = if out_of_region { r_ch + cfg.r_penalty } else { r_ch };

        next.fading = channel::sample_fading(&cfg.radio, rng, cfg.n_mdcs, cfg.n_channels);

        Ok((
            next,
            StepOutcome {
                r_ch,
                r_traj,
                collected_bits: collected,
                done: success || failed,
                success,
                out_of_region,
            },
        ))
    }

    /// `[u_res / U ; normalised log-gains]`, length `N + N*M`.
    pub fn state_vector_discrete(&self, state: &EnvState<T>) -> Vec<T> {
        let mut out = Vec::with_capacity(self.continuous_state_dim());
        let u = self.cfg.data_size_bits;
        out.extend(state.u_res.iter().map(|&r| r / u));
        let betas = self.large_scale_gains(state.uav_xy);
        for (n, &beta) in betas.iter().enumerate() {
            for m in 0..self.cfg.n_channels {
                let g = channel::channel_gain(beta, state.fading.get(n, m));
                let lg = if g > T::zero() { g.log10().max(self.log_floor) } else { self.log_floor };
                out.push((lg - self.feature_offset) / self.feature_scale);
            }
        }
        out
    }

    /// Discrete state plus `(x/L, y/L)`.
    pub fn state_vector_continuous(&self, state: &EnvState<T>) -> Vec<T> {
        let mut out = self.state_vector_discrete(state);
        out.push(state.uav_xy[0] / self.cfg.area_m);
        out.push(state.uav_xy[1] / self.cfg.area_m);
        out
    }
}
