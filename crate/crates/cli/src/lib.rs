// SPDX-License-Identifier: Apache-2.0

//! Batch runner behind the `cohwalk` binary.

pub mod config;
pub mod experiments;
pub mod table;

use std::io::Write;
use std::path::Path;

pub use config::{validate, ConfigError, Experiment, ExperimentConfig};
pub use experiments::{run, RunError};
pub use table::ResultTable;

/// Exit status for configuration problems.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for physics-level aborts (e.g. inadequate truncation).
pub const EXIT_PHYSICS: i32 = 3;

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            _ => EXIT_PHYSICS,
        }
    }
}

/// Resolved config as pretty JSON, used as the CSV preamble.
pub fn preamble(config: &ExperimentConfig) -> String {
    let experiment = config.experiment.map_or("unset", Experiment::name);
    let body = serde_json::to_string_pretty(config).expect("config serializes");
    format!("cohwalk {experiment} {}\n{body}", env!("CARGO_PKG_VERSION"))
}

/// Write `table` with its config preamble to `path`.
pub fn write_output(
    config: &ExperimentConfig,
    table: &ResultTable,
    path: &Path,
) -> std::io::Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    table.write_csv(&preamble(config), &mut file)?;
    file.flush()
}
