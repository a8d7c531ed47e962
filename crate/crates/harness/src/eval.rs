//! `eval`: greedy rollouts from a run directory's checkpoints.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uavdc_core::agents::ContinuousPpo;
use uavdc_core::env::{write_trace, Env};
use uavdc_core::trainer::{check_dims, simulate_episode, DiscreteSlot, EpisodeSummary, GreedyController};

use crate::config::Manifest;
use crate::run::{CONTINUOUS_CKPT, DISCRETE_CKPT, MANIFEST_FILE};

/// Plays `episodes` greedy episodes and writes the first one's trace.
pub fn eval_run(run_dir: &Path, episodes: usize, seed: u64, trace_out: &Path) -> Result<Vec<EpisodeSummary>> {
    let manifest = Manifest::read(&run_dir.join(MANIFEST_FILE))?;
    let read = |name: &str| {
        let p = run_dir.join(name);
        fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))
    };
    let discrete = DiscreteSlot::<f64>::from_checkpoint(&read(DISCRETE_CKPT)?)?;
    let continuous = ContinuousPpo::<f64>::from_checkpoint(&read(CONTINUOUS_CKPT)?)?;
    let env = Env::new(manifest.env)?;
    check_dims(&env, &discrete, &continuous).context("checkpoints do not match the manifest scenario")?;

    let mut ctl = GreedyController { discrete: &discrete, continuous: &continuous };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Vec::new();
    let mut out = Vec::with_capacity(episodes);
    for i in 0..episodes.max(1) {
        let rows = (i == 0).then_some(&mut trace);
        out.push(simulate_episode(&env, &mut ctl, &mut rng, rows)?);
    }
    let file = File::create(trace_out).with_context(|| format!("cannot write {}", trace_out.display()))?;
    write_trace(BufWriter::new(file), env.config().n_mdcs, &trace)?;
    Ok(out)
}
