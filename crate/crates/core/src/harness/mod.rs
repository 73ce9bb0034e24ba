//! Scenario configuration, experiment driver, metrics and file formats.

pub mod config;
pub mod io;
pub mod metrics;
pub mod run;

pub use config::{Algorithm, DynamicConfig, ScenarioConfig};
pub use metrics::{write_metrics_csv, MetricsRow};
pub use run::{run_batches, run_on, run_scenario, Batch, ScenarioRun};
