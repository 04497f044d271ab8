//! Experiment orchestration for `causal-lab`: configs, pipelines, reports
//! and plot data.

pub mod config;
pub mod corpus;
pub mod error;
pub mod io;
pub mod oracle;
pub mod pipeline;
pub mod plot;
pub mod report;

pub use config::{ExperimentConfig, Op};
pub use error::{CliError, Result};
pub use pipeline::run_experiment;
pub use plot::emit_plot_data;
pub use report::{CheckRecord, Report, Status};

/// Sizes the global worker pool. Results do not depend on the count.
pub fn set_workers(workers: Option<usize>) -> Result<()> {
    if let Some(n) = workers.filter(|&n| n > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Argument(format!("worker pool: {e}")))?;
    }
    Ok(())
}
