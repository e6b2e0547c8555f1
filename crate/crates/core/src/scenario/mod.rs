//! Scenario files, the five-scheme experiments, metrics and CSV export.

pub mod config;
pub mod export;
pub mod metrics;
pub mod scheme;
pub mod sweep;
pub mod world;

use std::path::Path;

pub use config::Scenario;
pub use export::{export_metrics, export_sweep, export_violations};
pub use metrics::{run_scheme, MetricsReport, SchemeRun};
pub use scheme::Scheme;
pub use sweep::{sweep_content_categories, SweepRow, SweepTable};
pub use world::World;

use crate::error::Result;

/// Reads, resolves and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::load(path)
}
