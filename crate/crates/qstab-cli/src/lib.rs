//! Experiment harness around the `qstab` library: flat key-value configs,
//! a content-addressed graph cache, six scenario runners, and deterministic
//! CSV/JSON report emission.

pub mod cache;
pub mod config;
pub mod scenarios;
pub mod spaces;
pub mod tables;

pub use cache::{Cache, CACHE_ENV, CONSTRUCTION_VERSION};
pub use config::{parse_config, ConfigError, ExperimentConfig, Scenario};
pub use scenarios::{run_scenario, RunError, RunOptions, RunReport};
pub use spaces::{Space, SpaceSpec};
pub use tables::{emit_tables, load_report, report_dir};
