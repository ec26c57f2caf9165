//! Command-line front end for the wgqed simulator: JSON run configs,
//! parallel parameter sweeps and figure pipelines writing CSV.

pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod grid;
pub mod output;
pub mod sweep;

use std::path::PathBuf;

use config::{Command, ExperimentConfig};
use error::{CliError, CliResult};

/// Executes a resolved config and writes its artifacts. Returns the paths
/// written.
pub fn run(cfg: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let artifacts = pool.install(|| match cfg.command {
        Command::Sweep => {
            let table = sweep::run_sweep(cfg)?;
            Ok(vec![output::Artifact::new("sweep.csv", table.to_csv())])
        }
        Command::Figures => figures::run_figures(&cfg.figures),
        _ => commands::run_single(cfg),
    })?;
    output::write_run(&cfg.out, cfg.command.name(), &cfg.to_value(), &artifacts)
}
