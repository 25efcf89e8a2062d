//! `sinrsched`: generate SINR scheduling instances, run the schedulers and
//! baselines, query the exact oracles, calibrate the separation constant, and
//! drive reproducible experiment sweeps.
//!
//! Exit codes: 0 on success, 2 on parameter or parse errors, 3 when a result
//! fails its verification pass.

mod cache;
mod commands;
mod experiment;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sinrsched_core::Error as CoreError;

#[derive(Parser)]
#[command(name = "sinrsched", version, about = "Wireless link scheduling under the SINR model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// SINR parameters and output options shared by most subcommands. Parameters
/// left unset fall back to per-command defaults.
#[derive(Args, Debug, Clone)]
struct Globals {
    /// Path-loss exponent
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// SINR threshold
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Ambient noise
    #[arg(long, global = true)]
    noise: Option<f64>,
    /// RNG seed for randomized operations
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file
    Generate {
        #[command(subcommand)]
        family: commands::Family,
        #[command(flatten)]
        globals: Globals,
    },
    /// Partition an instance into feasible slots
    Schedule {
        file: PathBuf,
        #[command(flatten)]
        spec: commands::ScheduleSpec,
        #[command(flatten)]
        globals: Globals,
    },
    /// Find a heavy feasible subset via the conflict graph
    Capacity {
        file: PathBuf,
        #[arg(long, default_value = "auto")]
        gamma: String,
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
        #[arg(long, default_value_t = 0.8)]
        tau: f64,
        #[command(flatten)]
        cal: commands::CalibrationOpts,
        #[command(flatten)]
        globals: Globals,
    },
    /// Check feasibility of a link set and print the affectance report
    Feasible {
        file: PathBuf,
        /// Comma-separated link ids (all links when omitted)
        #[arg(long)]
        links: Option<String>,
        /// Threshold parameter p (defaults to the instance beta)
        #[arg(long)]
        p: Option<f64>,
        /// Power scheme: `uniform`, `linear`, `mean`, or `tau:<t>`
        #[arg(long, default_value = "uniform")]
        power: String,
        /// `normalized` or `exact`
        #[arg(long, default_value = "normalized")]
        mode: String,
        #[command(flatten)]
        globals: Globals,
    },
    /// Exact small-instance oracles
    Oracle {
        file: PathBuf,
        #[command(subcommand)]
        what: commands::OracleKind,
        #[command(flatten)]
        globals: Globals,
    },
    /// Calibrate the conflict-graph separation constant
    Calibrate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 64)]
        trials: u64,
        #[command(flatten)]
        cal: commands::CalibrationOpts,
        #[command(flatten)]
        globals: Globals,
    },
    /// Run an experiment sweep from a config file and write a CSV
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads (overrides the config)
        #[arg(long)]
        parallel: Option<usize>,
        /// Embed measured wall times in the CSV (breaks byte-for-byte
        /// reproducibility of the output)
        #[arg(long, default_value_t = false)]
        timings: bool,
        #[command(flatten)]
        globals: Globals,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate { family, globals } => commands::generate(family, &globals),
        Command::Schedule { file, spec, globals } => commands::schedule(&file, spec, &globals),
        Command::Capacity { file, gamma, delta, tau, cal, globals } => {
            commands::capacity(&file, &gamma, delta, tau, &cal, &globals)
        }
        Command::Feasible { file, links, p, power, mode, globals } => {
            commands::feasible(&file, links.as_deref(), p, &power, &mode, &globals)
        }
        Command::Oracle { file, what, globals } => commands::oracle(&file, what, &globals),
        Command::Calibrate { m, delta, tau, trials, cal, globals } => {
            commands::calibrate(m, delta, tau, trials, &cal, &globals)
        }
        Command::Experiment { config, parallel, timings, globals } => {
            experiment::run(&config, parallel, timings, &globals)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

pub(crate) fn exit_code(err: &CoreError) -> u8 {
    match err {
        CoreError::VerificationFailed(_) | CoreError::PartitionBound { .. } => 3,
        CoreError::Io(_) => 1,
        _ => 2,
    }
}
