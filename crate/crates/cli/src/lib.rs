//! Command-line front end: one validated configuration per run, one directory of
//! result files per configuration.

pub mod config;
pub mod run;

pub use config::{max_boundary_value, ConfigError, Mode, RunConfig, Scheduling, SCHEMA_VERSION};
pub use run::{execute, print_summary, Outcome, RunError, SummaryRow};
