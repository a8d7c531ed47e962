use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::RadioConfig;
use crate::error::{Error, Result};
use crate::scalar::{s, Scalar};

/// How the discrete agent's reward turns collected data into a bonus.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RewardMode {
    /// `r_time + w_data * collected / U`: more data, higher reward.
    #[default]
    Shaped,
    /// `r_time / U * sum(t_slot * R)`, sign as printed. Kept for fidelity runs.
    Literal,
}

/// Limit applied to a commanded displacement before the UAV moves.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClampMode {
    /// Each axis independently in `[-t_slot v_max, t_slot v_max]`.
    #[default]
    PerAxis,
    /// Euclidean length at most `t_slot v_max`.
    Norm,
}

/// Where the MDCs sit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, bound = "T: Scalar")]
pub enum MdcPlacement<T> {
    Fixed(Vec<[T; 2]>),
    Uniform { uniform_seed: u64 },
}

impl<T: Scalar> MdcPlacement<T> {
    /// Resolves to concrete coordinates inside `[0, area]²`.
    pub fn resolve(&self, n: usize, area: T) -> Result<Vec<[T; 2]>> {
        match self {
            MdcPlacement::Fixed(p) => {
                if p.len() != n {
                    return Err(Error::Config(format!(
                        "mdc_positions lists {} positions for n_mdcs = {n}",
                        p.len()
                    )));
                }
                if let Some(bad) = p.iter().find(|xy| {
                    xy.iter().any(|&c| !(c >= T::zero() && c <= area))
                }) {
                    return Err(Error::Config(format!(
                        "MDC position ({}, {}) lies outside [0, {}]²",
                        bad[0], bad[1], area
                    )));
                }
                Ok(p.clone())
            }
            MdcPlacement::Uniform { uniform_seed } => Ok(uniform_positions(n, area, *uniform_seed)),
        }
    }
}

/// Seeded uniform placement over `[0, area]²`.
pub fn uniform_positions<T: Scalar>(n: usize, area: T, seed: u64) -> Vec<[T; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = area.to_f64_lossy();
    (0..n)
        .map(|_| {
            let x: f64 = rng.random::<f64>() * l;
            let y: f64 = rng.random::<f64>() * l;
            [T::lit(x), T::lit(y)]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct EnvConfig<T> {
    pub radio: RadioConfig<T>,
    pub n_mdcs: usize,
    pub n_channels: usize,
    pub area_m: T,
    pub v_max: T,
    pub t_slot: T,
    pub data_size_bits: T,
    pub t_max: usize,
    pub r_time: T,
    pub r_fail: T,
    pub r_penalty: T,
    #[serde(default)]
    pub reward_mode: RewardMode,
    /// Weight on the collected-data bonus; defaults to `|r_time|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_data: Option<T>,
    #[serde(default)]
    pub clamp_mode: ClampMode,
    pub mdc_positions: MdcPlacement<T>,
    /// Defaults to the centre of the area.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uav_start: Option<[T; 2]>,
}

impl<T: Scalar> Default for EnvConfig<T> {
    fn default() -> Self {
        Self {
            radio: RadioConfig::default(),
            n_mdcs: 5,
            n_channels: 3,
            area_m: s(200.0),
            v_max: s(10.0),
            t_slot: s(0.5),
            data_size_bits: s(50e6),
            t_max: 400,
            r_time: s(-1.0),
            r_fail: s(-400.0),
            r_penalty: s(-5.0),
            reward_mode: RewardMode::Shaped,
            w_data: None,
            clamp_mode: ClampMode::PerAxis,
            mdc_positions: MdcPlacement::Uniform { uniform_seed: 0 },
            uav_start: None,
        }
    }
}

impl<T: Scalar> EnvConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_mdcs == 0 || self.n_channels == 0 {
            return err("n_mdcs and n_channels must be >= 1");
        }
        if !(self.area_m > T::zero()) || !(self.v_max > T::zero()) || !(self.t_slot > T::zero()) {
            return err("area_m, v_max and t_slot must be > 0");
        }
        if !(self.data_size_bits > T::zero()) {
            return err("data_size_bits must be > 0");
        }
        if self.t_max == 0 {
            return err("t_max must be >= 1");
        }
        if !(self.r_time < T::zero()) || !(self.r_fail < self.r_time) || !(self.r_penalty < T::zero()) {
            return err("rewards must satisfy r_time < 0, r_fail < r_time, r_penalty < 0");
        }
        if let Some(w) = self.w_data {
            if !(w > T::zero()) {
                return err("w_data must be > 0");
            }
        }
        if let Some(start) = self.uav_start {
            if start.iter().any(|c| !c.is_finite()) {
                return err("uav_start must be finite");
            }
        }
        self.mdc_positions.resolve(self.n_mdcs, self.area_m)?;
        Ok(())
    }

    /// Per-axis displacement bound `t_slot * v_max`.
    #[inline]
    pub fn max_step(&self) -> T {
        self.t_slot * self.v_max
    }

    #[inline]
    pub fn w_data(&self) -> T {
        self.w_data.unwrap_or(self.r_time.abs())
    }

    #[inline]
    pub fn uav_start(&self) -> [T; 2] {
        let half = self.area_m / s(2.0);
        self.uav_start.unwrap_or([half, half])
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}
