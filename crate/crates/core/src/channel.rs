//! Air-to-ground radio layer: path loss, Rician block fading, CNR, SINR under
//! channel sharing and Shannon rate.
//!
//! Gains are handled as powers throughout (`|h|²`, `|g|²`); the LoS phasor is
//! fixed to unit magnitude and zero phase, since only magnitudes reach a rate.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{s, Scalar};

/// Radio constants shared by every MDC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct RadioConfig<T> {
    /// Power gain at the 1 m reference distance.
    pub beta0: T,
    /// Path-loss exponent, 2..=6.
    pub alpha: T,
    /// LoS-to-scatter power ratio. `inf` gives a deterministic channel.
    pub rician_k: T,
    pub bandwidth_hz: T,
    pub noise_power_w: T,
    pub tx_power_w: T,
    pub uav_height_m: T,
    /// Carrier frequency. Informational only; no equation reads it.
    pub carrier_hz: T,
}

impl<T: Scalar> Default for RadioConfig<T> {
    fn default() -> Self {
        Self {
            beta0: s(DEFAULT_BETA0),
            alpha: s(2.0),
            rician_k: s(10.0),
            bandwidth_hz: s(5e6),
            noise_power_w: s(5e-8),
            tx_power_w: s(5.0),
            uav_height_m: s(100.0),
            carrier_hz: s(28e9),
        }
    }
}

/// Default reference gain. With 5 MHz, 5e-8 W noise and 5 W transmit power this
/// puts the SNR of an MDC directly below the UAV (d = 100 m) at 0 dB.
pub const DEFAULT_BETA0: f64 = 500.0;

impl<T: Scalar> RadioConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta0", self.beta0),
            ("bandwidth_hz", self.bandwidth_hz),
            ("noise_power_w", self.noise_power_w),
            ("tx_power_w", self.tx_power_w),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::Config(format!("radio.{name} must be finite and > 0")));
            }
        }
        // The reference-distance regime (d >= 1 m) relies on H >= 1.
        if !(self.uav_height_m >= T::one()) || !self.uav_height_m.is_finite() {
            return Err(Error::Config("radio.uav_height_m must be finite and >= 1".into()));
        }
        if !(self.alpha >= s(2.0) && self.alpha <= s(6.0)) {
            return Err(Error::Config("radio.alpha must lie in [2, 6]".into()));
        }
        if !(self.rician_k >= T::zero()) {
            return Err(Error::Config("radio.rician_k must be >= 0".into()));
        }
        Ok(())
    }

    /// Noise power scaled by bandwidth, the CNR denominator.
    #[inline]
    pub fn noise_floor(&self) -> T {
        self.bandwidth_hz * self.noise_power_w
    }
}

/// Squared small-scale fading magnitudes, one per (MDC, channel) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct FadingDraw<T> {
    n_mdcs: usize,
    n_channels: usize,
    power: Vec<T>,
}

impl<T: Scalar> FadingDraw<T> {
    /// A draw with every entry equal to `value`.
    pub fn constant(n_mdcs: usize, n_channels: usize, value: T) -> Self {
        Self { n_mdcs, n_channels, power: vec![value; n_mdcs * n_channels] }
    }

    pub fn from_vec(n_mdcs: usize, n_channels: usize, power: Vec<T>) -> Result<Self> {
        if power.len() != n_mdcs * n_channels {
            return Err(Error::Dimension { expected: n_mdcs * n_channels, got: power.len() });
        }
        if power.iter().any(|&p| !(p >= T::zero())) {
            return Err(Error::Config("fading power must be >= 0".into()));
        }
        Ok(Self { n_mdcs, n_channels, power })
    }

    #[inline]
    pub fn n_mdcs(&self) -> usize {
        self.n_mdcs
    }

    #[inline]
    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    /// `|g|²` for MDC `mdc` on channel `channel` (both zero-based).
    #[inline]
    pub fn get(&self, mdc: usize, channel: usize) -> T {
        self.power[mdc * self.n_channels + channel]
    }

    /// Row-major (MDC-major) view.
    pub fn as_slice(&self) -> &[T] {
        &self.power
    }
}

/// 3-D distance between a ground MDC and the UAV flying at `height`.
#[inline]
pub fn distance<T: Scalar>(mdc_xy: [T; 2], uav_xy: [T; 2], height: T) -> T {
    let dx = mdc_xy[0] - uav_xy[0];
    let dy = mdc_xy[1] - uav_xy[1];
    (dx * dx + dy * dy + height * height).sqrt()
}

/// Large-scale gain `beta0 * d^-alpha`.
pub fn large_scale_gain<T: Scalar>(cfg: &RadioConfig<T>, d: T) -> Result<T> {
    if !(d > T::zero()) {
        return Err(Error::NonPositiveDistance(d.to_f64_lossy()));
    }
    Ok(cfg.beta0 * d.powf(-cfg.alpha))
}

/// Draws an `n x m` block of Rician fading powers.
///
/// Each entry is `|sqrt(K/(K+1)) + sqrt(1/(K+1)) * g~|²` with `g~` a unit-variance
/// circularly-symmetric complex Gaussian, so `E|g|² = 1` for every `K`.
pub fn sample_fading<T: Scalar, R: Rng + ?Sized>(
    cfg: &RadioConfig<T>,
    rng: &mut R,
    n: usize,
    m: usize,
) -> FadingDraw<T> {
    let k = cfg.rician_k.to_f64_lossy();
    if k.is_infinite() {
        return FadingDraw::constant(n, m, T::one());
    }
    let los = (k / (k + 1.0)).sqrt();
    let scatter = (1.0 / (k + 1.0)).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let power = (0..n * m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let a = los + scatter * re;
            let b = scatter * im;
            T::lit(a * a + b * b)
        })
        .collect();
    FadingDraw { n_mdcs: n, n_channels: m, power }
}

/// Channel power gain `|h|² = beta * |g|²`.
#[inline]
pub fn channel_gain<T: Scalar>(beta: T, fading_sq: T) -> T {
    beta * fading_sq
}

/// Channel-to-noise ratio `|h|² / (B sigma²)`.
#[inline]
pub fn cnr<T: Scalar>(cfg: &RadioConfig<T>, gain_sq: T) -> T {
    gain_sq / cfg.noise_floor()
}

/// SINR of `cnrs[target]` when every listed occupant transmits at `p_w` on the
/// same channel.
pub fn sinr<T: Scalar>(p_w: T, cnrs: &[T], target: usize) -> T {
    let interference: T = cnrs
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target)
        .map(|(_, &g)| p_w * g)
        .sum();
    p_w * cnrs[target] / (T::one() + interference)
}

/// Shannon rate `B log2(1 + sinr)` in bits per second.
#[inline]
pub fn rate<T: Scalar>(cfg: &RadioConfig<T>, sinr: T) -> T {
    cfg.bandwidth_hz * sinr.ln_1p() / T::LN_2()
}
