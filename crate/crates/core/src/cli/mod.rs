//! Configuration parsing, experiment commands and artifact output for the
//! `cqpolar` binary.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{parse_config, ChannelConfig, ChannelKind, CodeRule, ConfigError, CurveConfig, ExperimentConfig};
pub use runner::{artifact_hashes, config_hash, run, ArtifactRecord, Command, DecodeMode, RunOptions, RunSummary};
