//! Batch front-end: `run`, `mc`, `audit` and `info` over the protocol
//! registry, driven by a JSON config and command-line overrides.

pub mod commands;
pub mod config;
pub mod error;
pub mod registry;
pub mod report;

pub use commands::execute;
pub use config::{CommandKind, ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
pub use report::Report;

/// Environment variable holding the worker count for parallel loops.
pub const WORKERS_VAR: &str = "SHUFFLE_DP_WORKERS";

/// Size the global thread pool from `SHUFFLE_DP_WORKERS`, if set. Results do
/// not depend on the worker count.
pub fn configure_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
        .ok_or_else(|| CliError::config(WORKERS_VAR, format!("`{raw}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}
