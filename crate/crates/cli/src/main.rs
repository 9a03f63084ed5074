//! `strapnav`: generate datasets, run filters over them and compare runs.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 numerical
//! divergence.

mod compare;
mod config;
mod error;
mod io;
mod run;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use run::FilterKind;

#[derive(Parser)]
#[command(name = "strapnav", version, about = "Strapdown INS/GNSS batch toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate imu.csv, gnss.csv, truth.csv and meta.txt.
    Sim {
        /// Trajectory spec (key = value).
        #[arg(long)]
        traj: PathBuf,
        /// Sensor-error spec; error-free when omitted.
        #[arg(long)]
        err: Option<PathBuf>,
        /// GNSS spec; noiseless 1 Hz when omitted.
        #[arg(long)]
        gnss: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Run a filter over a dataset and write estimate.csv and metrics.csv.
    Run {
        #[arg(long, value_enum)]
        filter: Option<FilterKind>,
        /// Run configuration (key = value).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override one configuration key; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Compare the metrics of two or more runs.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
        /// Long-format CSV of values and deltas against the first run.
        #[arg(short, long, default_value = "compare.csv")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Sim { traj, err, gnss, seed, out } => simulate::cmd_sim(&traj, err.as_deref(), gnss.as_deref(), seed, &out),
        Cmd::Run { filter, config, overrides, input, out } => run::cmd_run(filter, config.as_deref(), &overrides, &input, &out),
        Cmd::Compare { dirs, out } => compare::cmd_compare(&dirs, &out).map(|table| print!("{table}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("strapnav: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
