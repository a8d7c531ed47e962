//! `compare`: align runs, emit a plot-ready long table and per-algorithm summary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::run::{discover_runs, RunData};
use crate::stats::{mean, moving_average, tail, variance};

pub const LONG_FILE: &str = "long.csv";
pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Clone, Debug, PartialEq)]
pub struct AlgoSummary {
    pub algorithm: String,
    pub runs: usize,
    /// Mean over runs of the mission time over the final window.
    pub final_mean: f64,
    /// Mean over runs of the within-run variance over the final window.
    pub final_variance: f64,
    /// Share of final-window episodes that hit the step limit.
    pub timeout_rate: f64,
    /// Across-run variance at each episode, averaged over episodes.
    pub between_series_variance: f64,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub episodes: usize,
    /// Set when the runs had different lengths.
    pub truncated_from: Option<Vec<usize>>,
    pub summaries: Vec<AlgoSummary>,
}

pub struct CompareSpec {
    pub dirs: Vec<PathBuf>,
    pub out: PathBuf,
    pub window: usize,
    pub final_episodes: usize,
}

fn series(run: &RunData, n: usize, f: impl Fn(&uavdc_core::trainer::MetricsRow) -> f64) -> Vec<f64> {
    run.rows[..n].iter().map(f).collect()
}

pub fn summarize(runs: &[RunData], n: usize, final_episodes: usize) -> Vec<AlgoSummary> {
    let mut groups: BTreeMap<&str, Vec<&RunData>> = BTreeMap::new();
    for r in runs {
        groups.entry(r.algo.as_str()).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(algo, group)| {
            let times: Vec<Vec<f64>> = group.iter().map(|r| series(r, n, |x| x.mission_time as f64)).collect();
            let finals: Vec<&[f64]> = times.iter().map(|t| tail(t, final_episodes)).collect();
            let timeouts: Vec<f64> = group
                .iter()
                .map(|r| {
                    let rows = &r.rows[n.saturating_sub(final_episodes)..n];
                    rows.iter().filter(|x| !x.success).count() as f64 / rows.len().max(1) as f64
                })
                .collect();
            let between = if n == 0 {
                0.0
            } else {
                mean(&(0..n).map(|i| variance(&times.iter().map(|t| t[i]).collect::<Vec<_>>())).collect::<Vec<_>>())
            };
            AlgoSummary {
                algorithm: algo.to_string(),
                runs: group.len(),
                final_mean: mean(&finals.iter().map(|f| mean(f)).collect::<Vec<_>>()),
                final_variance: mean(&finals.iter().map(|f| variance(f)).collect::<Vec<_>>()),
                timeout_rate: mean(&timeouts),
                between_series_variance: between,
            }
        })
        .collect()
}

fn write_long(runs: &[RunData], n: usize, window: usize, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record(["run", "algorithm", "seed", "episode", "metric", "raw", "smoothed"])?;
    type Getter = fn(&uavdc_core::trainer::MetricsRow) -> f64;
    let metrics: [(&str, Getter); 3] = [
        ("mission_time", |r| r.mission_time as f64),
        ("sum_r_ch", |r| r.sum_r_ch),
        ("sum_r_traj", |r| r.sum_r_traj),
    ];
    for run in runs {
        let label = run.dir.display().to_string();
        let seed = run.seed.map(|s| s.to_string()).unwrap_or_default();
        for (name, get) in metrics {
            let raw = series(run, n, get);
            let smooth = moving_average(&raw, window);
            for (i, (r, s)) in raw.iter().zip(&smooth).enumerate() {
                w.write_record([
                    label.as_str(),
                    &run.algo,
                    &seed,
                    &i.to_string(),
                    name,
                    &r.to_string(),
                    &s.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_summary(summaries: &[AlgoSummary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))?;
    w.write_record([
        "algorithm",
        "runs",
        "final_mean_mission_time",
        "final_variance",
        "timeout_rate",
        "between_series_variance",
    ])?;
    for s in summaries {
        w.write_record([
            s.algorithm.clone(),
            s.runs.to_string(),
            s.final_mean.to_string(),
            s.final_variance.to_string(),
            s.timeout_rate.to_string(),
            s.between_series_variance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn compare(spec: &CompareSpec) -> Result<Comparison> {
    let runs = discover_runs(&spec.dirs)?;
    let lengths: Vec<usize> = runs.iter().map(|r| r.rows.len()).collect();
    let n = lengths.iter().copied().min().unwrap_or(0);
    let truncated_from = lengths.iter().any(|&l| l != n).then(|| lengths.clone());
    fs::create_dir_all(&spec.out).with_context(|| format!("cannot create {}", spec.out.display()))?;
    write_long(&runs, n, spec.window, &spec.out.join(LONG_FILE))?;
    let summaries = summarize(&runs, n, spec.final_episodes);
    write_summary(&summaries, &spec.out.join(SUMMARY_FILE))?;
    Ok(Comparison { episodes: n, truncated_from, summaries })
}
