//! `hparity`: solve, verify, sweep and export spectral parity operators.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config/usage error,
//! 3 numerical failure.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;

use config::CommonArgs;

#[derive(Debug, Parser)]
#[command(name = "hparity", version, about = "Hidden parity operators of 1D Hamiltonians H = p² + V(x)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the eigenproblem and write spectrum.csv
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Include eigenfunction samples φ_n(x_i) in spectrum.csv
        #[arg(long)]
        samples: bool,
    },
    /// Build P and Q, run every property check and write report.json
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Corrupt mode K with 1e-3 noise before building operators (negative control)
        #[arg(long, value_name = "K", hide = true)]
        perturb_mode: Option<usize>,
    },
    /// Grid-refinement study written to sweep.csv
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Interior point counts, e.g. 199,399,799
        #[arg(long, value_delimiter = ',', conflicts_with = "sweep_h")]
        sweep_n: Option<Vec<usize>>,
        /// Grid spacings, e.g. 0.08,0.04,0.02
        #[arg(long, value_delimiter = ',')]
        sweep_h: Option<Vec<f64>>,
    },
    /// Dump the parity kernel (and optionally triparity) as CSV
    ExportKernel {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write kernel_Q.csv
        #[arg(long)]
        with_q: bool,
        /// Also write header-free baselines kernel_P.txt / kernel_Q.txt
        #[arg(long)]
        text: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Verification,
    Config(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<hidden_parity::Error> for CliError {
    fn from(e: hidden_parity::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { common, samples } => commands::solve(&common, samples),
        Command::Verify {
            common,
            perturb_mode,
        } => commands::verify(&common, perturb_mode),
        Command::Sweep {
            common,
            sweep_n,
            sweep_h,
        } => commands::sweep(&common, sweep_n, sweep_h),
        Command::ExportKernel {
            common,
            with_q,
            text,
        } => commands::export_kernel(&common, with_q, text),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Verification => eprintln!("verification failed"),
                CliError::Config(msg) => eprintln!("error: {msg}"),
                CliError::Numerical(msg) => eprintln!("numerical failure: {msg}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
