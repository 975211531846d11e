//! Scenario runner for `todaflow-core`: strict JSON configuration, CSV/JSON/SVG
//! artifacts and a hashed run manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod run;
pub mod svg;

pub use config::{load_config, parse_config, ConfigError, ConfigIssue, Formats, ScenarioConfig};
pub use run::{run_scenario, RunError, RunReport, RunStatus};
