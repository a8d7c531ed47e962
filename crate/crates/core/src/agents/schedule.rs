use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exploration rate that decays exponentially from `start` to `end` over the
/// first `decay_fraction` of the episode budget, then stays at `end`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        Self { start: 0.5, end: 0.02, decay_fraction: 0.4 }
    }
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.start) || !unit(self.end) || !unit(self.decay_fraction) {
            return Err(Error::Config("epsilon schedule values must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn value(&self, episode: usize, total_episodes: usize) -> f64 {
        let horizon = self.decay_fraction * total_episodes as f64;
        if horizon <= 0.0 || episode as f64 >= horizon {
            return self.end;
        }
        if self.start <= 0.0 || self.end <= 0.0 {
            // geometric interpolation is undefined at zero; fall back to linear
            let f = episode as f64 / horizon;
            return self.start + (self.end - self.start) * f;
        }
        self.start * (self.end / self.start).powf(episode as f64 / horizon)
    }
}
