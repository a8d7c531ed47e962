//! Output heads: softmax-categorical for channel allocation and a diagonal
//! Gaussian for UAV displacement.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::mlp::{sigmoid, softplus};
use crate::scalar::{s, Scalar};

/// Numerically stable softmax.
pub fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn log_softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<T>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

/// Index of the largest value; the lowest index wins ties.
pub fn argmax<T: Scalar>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_categorical<T: Scalar, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u = T::lit(rng.random::<f64>());
    let mut acc = T::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left the total a hair under 1; fall back to the last supported action
    probs.iter().rposition(|&p| p > T::zero()).unwrap_or(probs.len() - 1)
}

/// With probability `eps` picks uniformly, otherwise samples `probs`.
pub fn categorical_sample_eps_greedy<T: Scalar, R: Rng + ?Sized>(probs: &[T], eps: f64, rng: &mut R) -> usize {
    if eps > 0.0 && rng.random::<f64>() < eps {
        rng.random_range(0..probs.len())
    } else {
        sample_categorical(probs, rng)
    }
}

/// Softmax policy over `n_actions` logits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoricalHead {
    pub n_actions: usize,
}

impl CategoricalHead {
    pub fn log_prob<T: Scalar>(&self, logits: &[T], action: usize) -> T {
        log_softmax(logits)[action]
    }

    /// `d log p(a) / d logits = onehot(a) - p`.
    pub fn log_prob_grad<T: Scalar>(&self, logits: &[T], action: usize) -> (T, Vec<T>) {
        let logp = log_softmax(logits);
        let mut g: Vec<T> = logp.iter().map(|&l| -l.exp()).collect();
        g[action] += T::one();
        (logp[action], g)
    }

    /// Entropy and its gradient with respect to the logits.
    pub fn entropy_grad<T: Scalar>(&self, logits: &[T]) -> (T, Vec<T>) {
        let logp = log_softmax(logits);
        let h: T = -logp.iter().map(|&l| l.exp() * l).sum::<T>();
        // dH/dz_j = -p_j (log p_j + H)
        let g = logp.iter().map(|&l| -l.exp() * (l + h)).collect();
        (h, g)
    }
}

/// Diagonal Gaussian over `(dx, dy)`.
///
/// The network emits four raw values `[m_x, m_y, s_x, s_y]`; the head maps them
/// to `mu = scale * m` and `sigma = scale * softplus(s) + sigma_floor`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GaussianHead<T> {
    pub scale: T,
    pub sigma_floor: T,
}

/// Sum of per-axis Normal log-densities.
pub fn gaussian_logprob<T: Scalar>(mu: &[T], sigma: &[T], action: &[T]) -> T {
    let half_log_2pi = s::<T>(0.5) * (s::<T>(2.0) * T::PI()).ln();
    mu.iter()
        .zip(sigma)
        .zip(action)
        .map(|((&m, &sd), &a)| {
            let z = (a - m) / sd;
            -s::<T>(0.5) * z * z - sd.ln() - half_log_2pi
        })
        .sum()
}

impl<T: Scalar> GaussianHead<T> {
    pub const OUTPUTS: usize = 4;

    pub fn new(scale: T, sigma_floor: T) -> Self {
        Self { scale, sigma_floor }
    }

    pub fn mu_sigma(&self, raw: &[T]) -> ([T; 2], [T; 2]) {
        let mu = [self.scale * raw[0], self.scale * raw[1]];
        let sigma = [
            self.scale * softplus(raw[2]) + self.sigma_floor,
            self.scale * softplus(raw[3]) + self.sigma_floor,
        ];
        (mu, sigma)
    }

    pub fn log_prob(&self, raw: &[T], action: [T; 2]) -> T {
        let (mu, sigma) = self.mu_sigma(raw);
        gaussian_logprob(&mu, &sigma, &action)
    }

    /// Log-density and its gradient with respect to the four raw outputs.
    pub fn log_prob_grad(&self, raw: &[T], action: [T; 2]) -> (T, Vec<T>) {
        let (mu, sigma) = self.mu_sigma(raw);
        let mut g = vec![T::zero(); 4];
        for k in 0..2 {
            let diff = action[k] - mu[k];
            let var = sigma[k] * sigma[k];
            g[k] = diff / var * self.scale;
            let dsigma = -T::one() / sigma[k] + diff * diff / (var * sigma[k]);
            g[2 + k] = dsigma * self.scale * sigmoid(raw[2 + k]);
        }
        (gaussian_logprob(&mu, &sigma, &action), g)
    }

    pub fn entropy_grad(&self, raw: &[T]) -> (T, Vec<T>) {
        let (_, sigma) = self.mu_sigma(raw);
        let c = s::<T>(0.5) * (s::<T>(2.0) * T::PI() * T::E()).ln();
        let h = sigma.iter().map(|&sd| c + sd.ln()).sum();
        let g = vec![
            T::zero(),
            T::zero(),
            self.scale * sigmoid(raw[2]) / sigma[0],
            self.scale * sigmoid(raw[3]) / sigma[1],
        ];
        (h, g)
    }

    pub fn sample<R: Rng + ?Sized>(&self, raw: &[T], rng: &mut R) -> [T; 2] {
        let (mu, sigma) = self.mu_sigma(raw);
        let zx: f64 = rng.sample(StandardNormal);
        let zy: f64 = rng.sample(StandardNormal);
        [mu[0] + sigma[0] * T::lit(zx), mu[1] + sigma[1] * T::lit(zy)]
    }
}
