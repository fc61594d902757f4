//! Scenario runner for the cooperative dual-task space: robot description
//! files, declarative scenario configs, solver dispatch and CSV logs.
//!
//! The `cdts` binary wraps [`run::run_scenario`],
//! [`run::compare_stacked_vs_cooperative`] and [`scenario::Setup::load`].

pub mod error;
pub mod log;
pub mod robot;
pub mod run;
pub mod scenario;

pub use error::{SimError, SimResult};
pub use log::{export_csv, read_csv, RunLog};
pub use run::{compare_stacked_vs_cooperative, run_scenario, ComparisonReport, RunOptions};
pub use scenario::{Scenario, Setup};
