//! Experiment plumbing around `uavdc-core`: presets and config resolution,
//! multi-seed runs with manifests and checkpoints, run comparison, scenario
//! files and greedy evaluation.

pub mod compare;
pub mod config;
pub mod eval;
pub mod run;
pub mod scenario;
pub mod stats;
