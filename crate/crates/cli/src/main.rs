use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tcm_cli::commands::{cmd_bench, cmd_run, cmd_sweep, BenchArgs};
use tcm_cli::error::exit;
use tcm_cli::verify::{cmd_verify, Level};

#[derive(Parser)]
#[command(name = "tcm", version, about = "Pseudo-spectral tropical climate model solver and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration and write diagnostics.
    Run {
        config: PathBuf,
        /// Also write one two-column `time value` file per diagnostic.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    Verify {
        #[arg(long, default_value = "fast")]
        level: Level,
        /// Make the given criterion's tolerance impossible (fault injection).
        #[arg(long, value_name = "CRITERION")]
        tamper: Option<usize>,
    },
    /// Run a grid of (alpha, beta) cells in parallel.
    Sweep { spec: PathBuf },
    /// Estimate an inequality constant over a random ensemble.
    Bench {
        /// horizontal-l4, vertical-sup or interpolation.
        id: String,
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 5)]
        max_mode: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Exponent of the interpolation bench, in [5/4, 5/2).
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value = "bench_out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, emit_plot_data } => cmd_run(&config, emit_plot_data),
        Command::Verify { level, tamper } => cmd_verify(level, tamper),
        Command::Sweep { spec } => cmd_sweep(&spec),
        Command::Bench { id, n, samples, max_mode, seed, alpha, out } => {
            cmd_bench(&BenchArgs { id, n, samples, max_mode, seed, alpha, out })
        }
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
