//! End-to-end checks of the `uavdc` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use uavdc_harness::compare::{compare, CompareSpec};
use uavdc_harness::config::Manifest;

const BIN: &str = env!("CARGO_BIN_EXE_uavdc");

/// Small networks and a short budget so each run takes well under a second.
const QUICK: [&str; 12] = [
    "--train.episodes",
    "4",
    "--train.horizon",
    "64",
    "--train.batch_size",
    "32",
    "--train.ppo_discrete.hidden",
    "[8]",
    "--train.ppo_continuous.hidden",
    "[8]",
    "--train.dqn.hidden",
    "[8]",
];

fn uavdc(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN).args(args).current_dir(cwd).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn err(out: &Output) -> String {
    assert!(!out.status.success(), "unexpected success");
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn quick_run(cwd: &Path, out: &str, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--preset", "fig-time-50M", "--out", out, "--progress", "0"];
    args.extend(extra);
    args.extend(QUICK);
    uavdc(&args, cwd)
}

#[test]
fn run_writes_per_seed_artifacts_and_merged_table() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&quick_run(tmp.path(), "runs", &["--algo", "ppo-ppo", "--seeds", "1,2,3"]));
    for seed in 1..=3 {
        let dir = tmp.path().join(format!("runs/ppo-ppo/seed-{seed}"));
        for f in ["metrics.csv", "eval.csv", "manifest.toml", "discrete.ckpt.json", "continuous.ckpt.json"] {
            assert!(dir.join(f).is_file(), "missing {f} for seed {seed}");
        }
        let m = Manifest::read(&dir.join("manifest.toml")).unwrap();
        assert_eq!(m.experiment.seed, Some(seed));
        assert_eq!(m.train.seed, seed);
        let text = fs::read_to_string(dir.join("metrics.csv")).unwrap();
        assert_eq!(text.lines().count(), 5);
    }
    let merged = fs::read_to_string(tmp.path().join("runs/comparison.csv")).unwrap();
    assert!(merged.starts_with("algorithm,seed,episode,"));
    assert_eq!(merged.lines().count(), 1 + 3 * 4);

    // a second algorithm into the same tree extends the merged table
    ok(&quick_run(tmp.path(), "runs", &["--algo", "dqn-ppo", "--seeds", "1"]));
    let merged = fs::read_to_string(tmp.path().join("runs/comparison.csv")).unwrap();
    assert_eq!(merged.lines().count(), 1 + 4 * 4);
    assert!(merged.lines().any(|l| l.starts_with("dqn-ppo,1,")));
}

#[test]
fn rerun_is_byte_identical_and_manifest_reproduces() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&quick_run(tmp.path(), "a", &["--seeds", "5"]));
    ok(&quick_run(tmp.path(), "b", &["--seeds", "5"]));
    let a = fs::read(tmp.path().join("a/ppo-ppo/seed-5/metrics.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/ppo-ppo/seed-5/metrics.csv")).unwrap();
    assert_eq!(a, b);
    let ma = fs::read(tmp.path().join("a/ppo-ppo/seed-5/manifest.toml")).unwrap();
    let mb = fs::read(tmp.path().join("b/ppo-ppo/seed-5/manifest.toml")).unwrap();
    assert_eq!(ma, mb);

    ok(&uavdc(&["run", "--config", "a/ppo-ppo/seed-5/manifest.toml", "--out", "c", "--progress", "0"], tmp.path()));
    let c = fs::read(tmp.path().join("c/ppo-ppo/seed-5/metrics.csv")).unwrap();
    assert_eq!(a, c);
}

#[test]
fn bad_inputs_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let e = err(&uavdc(&["run", "--preset", "fig-11", "--out", "x"], tmp.path()));
    assert!(e.contains("fig-time-50M") && e.contains("fig-time-50M-8u") && e.contains("custom"), "{e}");

    let e = err(&uavdc(&["run", "--out", "x", "--train.epochz", "3"], tmp.path()));
    assert!(e.contains("train.epochz"), "{e}");

    let e = err(&uavdc(&["run", "--out", "x", "--algo", "sarsa"], tmp.path()));
    assert!(e.contains("sarsa"), "{e}");

    fs::write(tmp.path().join("blocker"), "").unwrap();
    let e = err(&quick_run(tmp.path(), "blocker/out", &[]));
    assert!(e.contains("blocker"), "{e}");

    let e = err(&uavdc(&["run", "--config", "missing.toml", "--out", "x"], tmp.path()));
    assert!(e.contains("missing.toml"), "{e}");
}

#[test]
fn config_search_path() {
    let tmp = tempfile::tempdir().unwrap();
    let conf = tmp.path().join("conf");
    fs::create_dir(&conf).unwrap();
    fs::write(conf.join("tiny.toml"), "[train]\nepisodes = 2\n[env]\nn_mdcs = 2\n").unwrap();
    let mut args = vec!["run", "--config", "tiny.toml", "--out", "r", "--progress", "0"];
    args.extend(&QUICK[2..]);
    let out = Command::new(BIN).args(&args).current_dir(tmp.path()).env("UAVDC_CONFIG_PATH", &conf).output().unwrap();
    ok(&out);
    let m = Manifest::read(&tmp.path().join("r/ppo-ppo/seed-0/manifest.toml")).unwrap();
    assert_eq!(m.env.n_mdcs, 2);
    assert_eq!(m.train.episodes, 2);
}

#[test]
fn scenario_files() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = |seed: &str, name: &str| {
        ok(&uavdc(&["scenario", "--n", "5", "--m", "3", "--area", "200", "--seed", seed, "--out", name], tmp.path()));
        fs::read_to_string(tmp.path().join(name)).unwrap()
    };
    let a = gen("7", "a.toml");
    assert_eq!(a, gen("7", "b.toml"));
    assert_ne!(a, gen("8", "c.toml"));

    let table: toml::Table = toml::from_str(&a).unwrap();
    let pos = table["env"]["mdc_positions"].as_array().unwrap();
    assert_eq!(pos.len(), 5);
    for p in pos {
        for c in p.as_array().unwrap() {
            let v = c.as_float().unwrap();
            assert!((0.0..=200.0).contains(&v));
        }
    }
    // usable as a config
    let mut args = vec!["run", "--config", "a.toml", "--out", "r", "--progress", "0"];
    args.extend(QUICK);
    ok(&uavdc(&args, tmp.path()));
    let m = Manifest::read(&tmp.path().join("r/ppo-ppo/seed-0/manifest.toml")).unwrap();
    assert_eq!(toml::Value::try_from(&m.env.mdc_positions).unwrap().as_array().unwrap().len(), 5);

    err(&uavdc(&["scenario", "--n", "0", "--m", "3", "--out", "z.toml"], tmp.path()));
}

#[test]
fn eval_emits_trace() {
    let tmp = tempfile::tempdir().unwrap();
    for algo in ["ppo-ppo", "dueling-dqn-ppo"] {
        ok(&quick_run(tmp.path(), "r", &["--algo", algo, "--seeds", "2"]));
        let dir = format!("r/{algo}/seed-2");
        let stdout = ok(&uavdc(&["eval", &dir, "--episodes", "2", "--out", "trace.csv"], tmp.path()));
        assert_eq!(stdout.lines().count(), 4);
        let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
        let mut lines = trace.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,x_uav,y_uav,alloc_encoded,r_ch,r_traj,collected_total,u_res_0,u_res_1,u_res_2,u_res_3,u_res_4"
        );
        assert!(lines.count() >= 1);
    }
    err(&uavdc(&["eval", "nowhere"], tmp.path()));
}

#[test]
fn compare_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let e = err(&uavdc(&["compare", "."], tmp.path()));
    assert!(e.contains("no runs found"), "{e}");

    ok(&quick_run(tmp.path(), "r", &["--seeds", "1"]));
    let one = tmp.path().join("r/ppo-ppo/seed-1");
    let c = compare(&CompareSpec {
        dirs: vec![one.clone(), one.clone()],
        out: tmp.path().join("cmp"),
        window: 100,
        final_episodes: 500,
    })
    .unwrap();
    assert_eq!(c.summaries.len(), 1);
    assert_eq!(c.summaries[0].runs, 2);
    assert_eq!(c.summaries[0].between_series_variance, 0.0);
    assert!(c.truncated_from.is_none());

    // mismatched lengths are aligned to the shortest
    let mut args = vec!["run", "--preset", "fig-time-50M", "--out", "s", "--progress", "0", "--seeds", "1"];
    args.extend(QUICK);
    args[10] = "2";
    ok(&uavdc(&args, tmp.path()));
    let stdout = ok(&uavdc(&["compare", "r", "s", "--out", "cmp2"], tmp.path()));
    assert!(stdout.contains("ppo-ppo,2,"));
    let long = fs::read_to_string(tmp.path().join("cmp2/long.csv")).unwrap();
    assert!(long.starts_with("run,algorithm,seed,episode,metric,raw,smoothed"));
    // 2 runs x 3 metrics x 2 aligned episodes
    assert_eq!(long.lines().count(), 1 + 2 * 3 * 2);
    let summary = fs::read_to_string(tmp.path().join("cmp2/summary.csv")).unwrap();
    assert!(summary.contains("final_mean_mission_time"));
}
