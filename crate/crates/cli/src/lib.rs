//! Configuration parsing and run orchestration for the `mfglab` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, RunConfig};
pub use run::{exponents_report, run, Command, RunError, RunManifest};
