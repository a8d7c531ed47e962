//! Experiment configuration: presets, TOML files and `--key value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};
use uavdc_core::env::EnvConfig;
use uavdc_core::trainer::{DiscreteAlgo, TrainConfig};

/// Colon-separated directories searched for relative `--config` paths.
pub const CONFIG_PATH_ENV: &str = "UAVDC_CONFIG_PATH";

pub const PRESETS: [&str; 6] =
    ["fig-time-50M", "fig-time-100M", "fig-reward-50M", "fig-reward-100M", "fig-time-50M-8u", "custom"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub env: EnvConfig<f64>,
    pub train: TrainConfig<f64>,
}

/// Run identity recorded at the top of a manifest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunInfo {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algo: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
}

/// Manifest layout: run identity plus the fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub experiment: RunInfo,
    pub env: EnvConfig<f64>,
    pub train: TrainConfig<f64>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn experiment(&self) -> Experiment {
        Experiment { env: self.env.clone(), train: self.train.clone() }
    }
}

pub fn parse_algo(s: &str) -> Result<DiscreteAlgo> {
    match s {
        "ppo-ppo" | "ppo" => Ok(DiscreteAlgo::Ppo),
        "dqn-ppo" | "dqn" => Ok(DiscreteAlgo::Dqn),
        "dueling-dqn-ppo" | "dueling-dqn" => Ok(DiscreteAlgo::DuelingDqn),
        other => bail!("unknown algorithm `{other}`; valid: ppo-ppo, dqn-ppo, dueling-dqn-ppo"),
    }
}

/// The scenario a figure tag stands for. Unlisted fields keep the crate defaults.
pub fn preset(name: &str) -> Result<Experiment> {
    let (n_mdcs, data_size_bits) = match name {
        "fig-time-50M" | "fig-reward-50M" | "custom" => (5, 50e6),
        "fig-time-100M" | "fig-reward-100M" => (5, 100e6),
        "fig-time-50M-8u" => (8, 50e6),
        other => bail!("unknown preset `{other}`; valid presets: {}", PRESETS.join(", ")),
    };
    let env = EnvConfig { n_mdcs, data_size_bits, ..EnvConfig::default() };
    Ok(Experiment { env, train: TrainConfig::default() })
}

/// Finds `name` as given, then under each directory of [`CONFIG_PATH_ENV`].
pub fn locate_config(name: &Path) -> Result<PathBuf> {
    if name.is_file() {
        return Ok(name.to_path_buf());
    }
    let mut searched = Vec::new();
    if name.is_relative() {
        if let Some(dirs) = std::env::var_os(CONFIG_PATH_ENV) {
            for dir in std::env::split_paths(&dirs) {
                let candidate = dir.join(name);
                if candidate.is_file() {
                    return Ok(candidate);
                }
                searched.push(dir.display().to_string());
            }
        }
    }
    if searched.is_empty() {
        bail!("config file {} not found", name.display())
    }
    bail!("config file {} not found (searched {})", name.display(), searched.join(", "))
}

/// Parses trailing `--key value` / `--key=value` pairs.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(key) = arg.strip_prefix("--") else {
            bail!("expected `--key value`, found `{arg}`");
        };
        if let Some((k, v)) = key.split_once('=') {
            out.push((k.to_string(), v.to_string()));
        } else {
            let v = it.next().ok_or_else(|| anyhow!("missing value for --{key}"))?;
            out.push((key.to_string(), v.clone()));
        }
    }
    Ok(out)
}

/// A TOML literal if it parses as one, otherwise a bare string.
fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn unknown(key: &str) -> anyhow::Error {
    anyhow!("unknown config key `{key}`")
}

/// Sets a dotted key inside `tree`. Intermediate tables must exist; a missing
/// leaf is inserted and left for deserialisation to accept or reject.
fn set_key(tree: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(unknown(key));
    }
    let (leaf, path) = parts.split_last().expect("split yields at least one part");
    let mut table = tree;
    for p in path {
        table = table.get_mut(*p).and_then(Value::as_table_mut).ok_or_else(|| unknown(key))?;
    }
    // Integer literals for float fields are fine in TOML files but not after a
    // round trip through `Value`; widen them to match the existing entry.
    let value = match (table.get(*leaf), value) {
        (Some(Value::Float(_)), Value::Integer(i)) => Value::Float(i as f64),
        (_, v) => v,
    };
    table.insert((*leaf).to_string(), value);
    Ok(())
}

/// Deep-merges `over` into `base`; tables merge, everything else replaces.
fn merge(base: &mut Table, over: Table, prefix: &str) -> Result<()> {
    for (k, v) in over {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o, &key)?,
            (Some(Value::Float(_)), Value::Integer(i)) => {
                base.insert(k, Value::Float(i as f64));
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
    Ok(())
}

/// Everything `run` needs after presets, files and overrides are applied.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub preset: String,
    pub info: RunInfo,
    pub experiment: Experiment,
}

/// Resolution order: preset, then config file, then `--key value` overrides.
///
/// A config file may carry an `[experiment]` table (as manifests do); its
/// `preset` replaces `preset_name` when no preset was given explicitly.
pub fn resolve(preset_name: Option<&str>, config: Option<&Path>, overrides: &[(String, String)]) -> Result<Resolved> {
    let mut file_tree = match config {
        Some(p) => {
            let path = locate_config(p)?;
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<Table>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => Table::new(),
    };
    let info: RunInfo = match file_tree.remove("experiment") {
        Some(v) => v.try_into().context("invalid [experiment] table")?,
        None => RunInfo::default(),
    };
    for k in file_tree.keys() {
        if k != "env" && k != "train" {
            return Err(unknown(k));
        }
    }
    let name = preset_name.map(str::to_string).or_else(|| info.preset.clone()).unwrap_or_else(|| "custom".into());
    let mut tree = Table::try_from(preset(&name)?).context("serialising preset")?;
    merge(&mut tree, file_tree, "")?;
    for (k, raw) in overrides {
        set_key(&mut tree, k, parse_value(raw))?;
    }
    let experiment: Experiment = Value::Table(tree).try_into().map_err(|e: toml::de::Error| {
        let msg = e.to_string();
        match overrides.iter().find(|(k, _)| msg.contains(&format!("`{}`", k.rsplit('.').next().unwrap_or(k)))) {
            Some((k, _)) if msg.contains("unknown field") => anyhow!("unknown config key `{k}`"),
            _ => anyhow!("invalid configuration: {msg}"),
        }
    })?;
    experiment.env.validate().context("invalid env configuration")?;
    experiment.train.validate().context("invalid train configuration")?;
    Ok(Resolved { preset: name, info, experiment })
}
