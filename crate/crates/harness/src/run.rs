//! `run`: train one configuration over a seed list and write run artifacts.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use uavdc_core::trainer::{DiscreteAlgo, Metrics, MetricsRow, Trainer};
use walkdir::WalkDir;

use crate::config::{Experiment, Manifest, RunInfo};

pub const METRICS_FILE: &str = "metrics.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const DISCRETE_CKPT: &str = "discrete.ckpt.json";
pub const CONTINUOUS_CKPT: &str = "continuous.ckpt.json";
pub const COMPARISON_FILE: &str = "comparison.csv";

pub struct RunSpec {
    pub preset: String,
    pub algo: DiscreteAlgo,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub experiment: Experiment,
    /// Print progress every this many episodes; 0 is silent.
    pub progress_every: usize,
}

/// Where one seed's artifacts go.
pub fn seed_dir(out: &Path, algo: DiscreteAlgo, seed: u64) -> PathBuf {
    out.join(algo.label()).join(format!("seed-{seed}"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

/// Trains one seed and writes its directory. Returns the metrics.
pub fn run_seed(spec: &RunSpec, seed: u64) -> Result<(PathBuf, Metrics)> {
    let dir = seed_dir(&spec.out, spec.algo, seed);
    fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;

    let mut exp = spec.experiment.clone();
    exp.train.seed = seed;
    exp.train.discrete_algo = spec.algo;
    let manifest = Manifest {
        experiment: RunInfo {
            preset: Some(spec.preset.clone()),
            algo: Some(spec.algo.label().to_string()),
            seed: Some(seed),
            version: Some(env!("CARGO_PKG_VERSION").to_string()),
        },
        env: exp.env.clone(),
        train: exp.train.clone(),
    };
    let text = toml::to_string(&manifest).context("serialising manifest")?;
    fs::write(dir.join(MANIFEST_FILE), text).with_context(|| format!("cannot write manifest in {}", dir.display()))?;

    let mut trainer = Trainer::new(exp.env, exp.train)?;
    let every = spec.progress_every;
    let label = spec.algo.label();
    let metrics = trainer.train_with(|ep, row| {
        if every > 0 && (ep + 1) % every == 0 {
            eprintln!("[{label} seed {seed}] episode {} mission_time {}", ep + 1, row.mission_time);
        }
    })?;

    metrics.write_csv(create(&dir.join(METRICS_FILE))?)?;
    metrics.write_eval_csv(create(&dir.join(EVAL_FILE))?)?;
    fs::write(dir.join(DISCRETE_CKPT), trainer.discrete.to_checkpoint()?)?;
    fs::write(dir.join(CONTINUOUS_CKPT), trainer.continuous.to_checkpoint()?)?;
    Ok((dir, metrics))
}

pub struct RunReport {
    pub seed_dirs: Vec<PathBuf>,
    pub comparison: PathBuf,
}

/// Runs every seed, then rebuilds the merged comparison table over all runs
/// found under the output directory.
pub fn run(spec: &RunSpec) -> Result<RunReport> {
    if spec.seeds.is_empty() {
        bail!("seed list is empty");
    }
    let mut seed_dirs = Vec::new();
    for &seed in &spec.seeds {
        seed_dirs.push(run_seed(spec, seed)?.0);
    }
    let runs = discover_runs(&[spec.out.clone()])?;
    let comparison = spec.out.join(COMPARISON_FILE);
    write_comparison(&runs, &comparison)?;
    Ok(RunReport { seed_dirs, comparison })
}

/// A completed run read back from disk.
#[derive(Clone, Debug)]
pub struct RunData {
    pub dir: PathBuf,
    pub algo: String,
    pub seed: Option<u64>,
    pub rows: Vec<MetricsRow>,
}

/// Every directory under `roots` holding a metrics CSV, sorted by path.
pub fn discover_runs(roots: &[PathBuf]) -> Result<Vec<RunData>> {
    let mut runs = Vec::new();
    for root in roots {
        if !root.exists() {
            bail!("{} does not exist", root.display());
        }
        let mut found: Vec<PathBuf> = WalkDir::new(root)
            .into_iter()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().is_file() && e.file_name() == METRICS_FILE)
            .map(|e| e.path().to_path_buf())
            .collect();
        found.sort();
        for path in found {
            let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
            let manifest = dir.join(MANIFEST_FILE);
            let (algo, seed) = if manifest.is_file() {
                let m = Manifest::read(&manifest)?;
                (m.experiment.algo.unwrap_or_else(|| m.train.discrete_algo.label().to_string()), m.experiment.seed)
            } else {
                let name = dir.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (name, None)
            };
            let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
            let rows = Metrics::read_csv(file).with_context(|| format!("reading {}", path.display()))?;
            runs.push(RunData { dir, algo, seed, rows });
        }
    }
    if runs.is_empty() {
        let dirs: Vec<String> = roots.iter().map(|r| r.display().to_string()).collect();
        bail!("no runs found under {}", dirs.join(", "));
    }
    Ok(runs)
}

/// Episode x algorithm x seed table of the per-episode metrics.
pub fn write_comparison(runs: &[RunData], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["algorithm", "seed", "episode", "mission_time", "success", "sum_r_ch", "sum_r_traj"])?;
    for run in runs {
        let seed = run.seed.map(|s| s.to_string()).unwrap_or_default();
        for r in &run.rows {
            w.write_record([
                run.algo.clone(),
                seed.clone(),
                r.episode.to_string(),
                r.mission_time.to_string(),
                u8::from(r.success).to_string(),
                r.sum_r_ch.to_string(),
                r.sum_r_traj.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
