// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cohwalk_cli::{run, write_output, Experiment, ExperimentConfig, EXIT_CONFIG};

/// Run one walk experiment and write its table as CSV.
#[derive(Parser, Debug)]
#[command(name = "cohwalk", version)]
struct Cli {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Destination CSV file.
    #[arg(long)]
    output: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Brillouin-zone sample count.
    #[arg(long)]
    k_grid: Option<usize>,
    /// Fixed cavity dimension for the Fock model.
    #[arg(long)]
    fock_dim: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let mut config = match ExperimentConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail(&e.to_string(), EXIT_CONFIG),
    };
    config.experiment = Some(cli.experiment);
    config.output = Some(cli.output.clone());
    if cli.workers.is_some() {
        config.workers = cli.workers;
    }
    if let Some(k) = cli.k_grid {
        config.k_grid = k;
    }
    if cli.fock_dim.is_some() {
        config.fock_dim = cli.fock_dim;
    }

    let table = match run(&config) {
        Ok(t) => t,
        Err(e) => return fail(&e.to_string(), e.exit_code()),
    };
    if let Err(e) = write_output(&config, &table, &cli.output) {
        return fail(&format!("cannot write {}: {e}", cli.output.display()), 1);
    }
    log::info!(
        "wrote {} rows to {}",
        table.rows().len(),
        cli.output.display()
    );
    ExitCode::SUCCESS
}

fn fail(message: &str, code: i32) -> ExitCode {
    eprintln!("cohwalk: {message}");
    ExitCode::from(code as u8)
}
