use std::io::{Read, Write};

use crate::error::Result;

/// One training episode.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub episode: usize,
    pub mission_time: usize,
    pub success: bool,
    pub sum_r_ch: f64,
    pub sum_r_traj: f64,
    pub actor_loss_d: Option<f64>,
    pub critic_loss_d: Option<f64>,
    pub actor_loss_c: Option<f64>,
    pub critic_loss_c: Option<f64>,
    pub epsilon: f64,
}

/// Greedy evaluation taken after `episode`.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub episode: usize,
    pub mean_mission_time: f64,
    pub success_rate: f64,
    pub mean_r_ch: f64,
    pub mean_r_traj: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub rows: Vec<MetricsRow>,
    pub evals: Vec<EvalRow>,
}

pub const METRICS_HEADER: [&str; 10] = [
    "episode",
    "mission_time",
    "success",
    "sum_r_ch",
    "sum_r_traj",
    "actor_loss_d",
    "critic_loss_d",
    "actor_loss_c",
    "critic_loss_c",
    "epsilon",
];

pub const EVAL_HEADER: [&str; 5] = ["episode", "mean_mission_time", "success_rate", "mean_r_ch", "mean_r_traj"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_opt(s: &str) -> Option<f64> {
    if s.is_empty() {
        None
    } else {
        s.parse().ok()
    }
}

impl Metrics {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(METRICS_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.episode.to_string(),
                r.mission_time.to_string(),
                u8::from(r.success).to_string(),
                r.sum_r_ch.to_string(),
                r.sum_r_traj.to_string(),
                opt(r.actor_loss_d),
                opt(r.critic_loss_d),
                opt(r.actor_loss_c),
                opt(r.critic_loss_c),
                r.epsilon.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_eval_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(EVAL_HEADER)?;
        for r in &self.evals {
            w.write_record([
                r.episode.to_string(),
                r.mean_mission_time.to_string(),
                r.success_rate.to_string(),
                r.mean_r_ch.to_string(),
                r.mean_r_traj.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads rows written by [`Metrics::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Vec<MetricsRow>> {
        let mut rd = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let f = |i: usize| rec.get(i).unwrap_or("");
            let num = |i: usize| -> f64 { f(i).parse().unwrap_or(f64::NAN) };
            rows.push(MetricsRow {
                episode: f(0).parse().unwrap_or(0),
                mission_time: f(1).parse().unwrap_or(0),
                success: f(2) == "1",
                sum_r_ch: num(3),
                sum_r_traj: num(4),
                actor_loss_d: parse_opt(f(5)),
                critic_loss_d: parse_opt(f(6)),
                actor_loss_c: parse_opt(f(7)),
                critic_loss_c: parse_opt(f(8)),
                epsilon: num(9),
            });
        }
        Ok(rows)
    }

    /// Reads rows written by [`Metrics::write_eval_csv`].
    pub fn read_eval_csv<R: Read>(input: R) -> Result<Vec<EvalRow>> {
        let mut rd = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let num = |i: usize| -> f64 { rec.get(i).and_then(|s| s.parse().ok()).unwrap_or(f64::NAN) };
            rows.push(EvalRow {
                episode: rec.get(0).and_then(|s| s.parse().ok()).unwrap_or(0),
                mean_mission_time: num(1),
                success_rate: num(2),
                mean_r_ch: num(3),
                mean_r_traj: num(4),
            });
        }
        Ok(rows)
    }
}
