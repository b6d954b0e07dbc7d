//! `rgscope`: run, sweep and validate renormalization-group experiments.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

#[derive(Parser)]
#[command(name = "rgscope", version, about = "Renormalization-group asymptotics of 1D diffusion equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one RG iteration sequence and write records, profile and report.
    Run { config: PathBuf },
    /// Run every point of a parameter grid.
    Sweep {
        config: PathBuf,
        /// Concurrent grid points (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Effective coefficient and ε-convergence of the 1D homogenization problem.
    Homog { config: PathBuf },
    /// Run the acceptance suite.
    Validate {
        /// Comma-separated check names; all checks when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Concurrent checks (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Fraction of the stability bound used by every run.
        #[arg(long, default_value_t = 0.8)]
        dt_safety: f64,
        /// Print the available check names and exit.
        #[arg(long)]
        list: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => commands::run(&config),
        Command::Sweep { config, jobs } => commands::sweep(&config, jobs),
        Command::Homog { config } => commands::homog(&config),
        Command::Validate { list: true, .. } => {
            for name in rgscope_core::validation::check_names() {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Validate { only, jobs, dt_safety, .. } => commands::validate(&only, jobs, dt_safety),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rgscope: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
