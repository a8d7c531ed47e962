//! `scenario`: freeze a seeded MDC layout into a config fragment.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use uavdc_core::env::uniform_positions;

#[derive(Serialize)]
struct EnvFragment {
    n_mdcs: usize,
    n_channels: usize,
    area_m: f64,
    mdc_positions: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct Fragment {
    env: EnvFragment,
}

/// TOML text placing `n` MDCs uniformly in `[0, area]²`. Usable as `--config`.
pub fn scenario_toml(n: usize, m: usize, area: f64, seed: u64) -> Result<String> {
    if n == 0 || m == 0 {
        bail!("scenario needs n >= 1 and m >= 1");
    }
    if !(area > 0.0) || !area.is_finite() {
        bail!("scenario area must be finite and > 0");
    }
    let frag = Fragment {
        env: EnvFragment { n_mdcs: n, n_channels: m, area_m: area, mdc_positions: uniform_positions(n, area, seed) },
    };
    let body = toml::to_string(&frag).context("serialising scenario")?;
    Ok(format!("# scenario seed {seed}\n{body}"))
}

pub fn write_scenario(n: usize, m: usize, area: f64, seed: u64, out: &Path) -> Result<()> {
    let text = scenario_toml(n, m, area, seed)?;
    std::fs::write(out, text).with_context(|| format!("cannot write {}", out.display()))
}
