use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use uavdc_harness::compare::{compare, CompareSpec, LONG_FILE, SUMMARY_FILE};
use uavdc_harness::config::{parse_algo, parse_overrides, resolve};
use uavdc_harness::eval::eval_run;
use uavdc_harness::run::{run, RunSpec};
use uavdc_harness::scenario::write_scenario;

#[derive(Parser)]
#[command(name = "uavdc", version, about = "UAV data-collection training harness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train over a seed list; remaining `--key value` pairs override config keys
    /// (e.g. `--train.episodes 200 --env.radio.beta0 250`).
    Run {
        #[arg(long)]
        preset: Option<String>,
        /// ppo-ppo, dqn-ppo or dueling-dqn-ppo.
        #[arg(long)]
        algo: Option<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// TOML file; relative names are also looked up on UAVDC_CONFIG_PATH.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Progress line every N episodes (0 = silent).
        #[arg(long, default_value_t = 100)]
        progress: usize,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, hide = true)]
        overrides: Vec<String>,
    },
    /// Align completed runs and write long-format and summary CSVs.
    Compare {
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        #[arg(long, default_value = "comparison")]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        window: usize,
        #[arg(long = "final", default_value_t = 500)]
        final_episodes: usize,
    },
    /// Write a seeded MDC layout as a config fragment.
    Scenario {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "area", default_value_t = 200.0)]
        area: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedy rollout from a run directory; writes the episode trace.
    Eval {
        run: PathBuf,
        #[arg(long, default_value_t = 1)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "trace.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Run { preset, algo, seeds, out, config, progress, overrides } => {
            let overrides = parse_overrides(&overrides)?;
            let resolved = resolve(preset.as_deref(), config.as_deref(), &overrides)?;
            let algo = match algo.or(resolved.info.algo.clone()) {
                Some(a) => parse_algo(&a)?,
                None => resolved.experiment.train.discrete_algo,
            };
            let seeds = if seeds.is_empty() {
                vec![resolved.info.seed.unwrap_or(resolved.experiment.train.seed)]
            } else {
                seeds
            };
            let spec = RunSpec {
                preset: resolved.preset,
                algo,
                seeds,
                out,
                experiment: resolved.experiment,
                progress_every: progress,
            };
            let report = run(&spec)?;
            for d in &report.seed_dirs {
                println!("{}", d.display());
            }
            println!("{}", report.comparison.display());
        }
        Cmd::Compare { dirs, out, window, final_episodes } => {
            let c = compare(&CompareSpec { dirs, out: out.clone(), window, final_episodes })?;
            if let Some(lengths) = &c.truncated_from {
                eprintln!("episode counts differ {lengths:?}; aligned to the shortest ({})", c.episodes);
            }
            println!("algorithm,runs,final_mean_mission_time,final_variance,timeout_rate,between_series_variance");
            for s in &c.summaries {
                println!(
                    "{},{},{:.3},{:.3},{:.4},{:.3}",
                    s.algorithm, s.runs, s.final_mean, s.final_variance, s.timeout_rate, s.between_series_variance
                );
            }
            println!("{}", out.join(LONG_FILE).display());
            println!("{}", out.join(SUMMARY_FILE).display());
        }
        Cmd::Scenario { n, m, area, seed, out } => {
            write_scenario(n, m, area, seed, &out)?;
            println!("{}", out.display());
        }
        Cmd::Eval { run, episodes, seed, out } => {
            let runs = eval_run(&run, episodes, seed, &out)?;
            println!("episode,mission_time,success,sum_r_ch,sum_r_traj");
            for (i, r) in runs.iter().enumerate() {
                println!("{i},{},{},{},{}", r.mission_time, u8::from(r.success), r.sum_r_ch, r.sum_r_traj);
            }
            println!("{}", out.display());
        }
    }
    Ok(())
}
