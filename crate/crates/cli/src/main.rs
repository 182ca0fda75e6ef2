//! `sgdlab`: run SGD ensembles, assumption checks and probes from a JSON experiment file.
//!
//! Exit codes: 0 success, 1 a selected check failed, 2 configuration or I/O error,
//! 3 a point outside an objective's domain.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("domain error: theta = {theta:?} lies inside the excluded ball of radius {min_radius}")]
    Domain { theta: Vec<f64>, min_radius: f64 },
}

impl From<sgdlab_core::Error> for CliError {
    fn from(e: sgdlab_core::Error) -> Self {
        match e {
            sgdlab_core::Error::Domain { theta, min_radius } => Self::Domain { theta, min_radius },
            sgdlab_core::Error::Io(msg) => Self::Io(msg),
            other => Self::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io(_) => 2,
            Self::Domain { .. } => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sgdlab", version, about = "SGD with matrix-valued learning rates: ensembles, checks and probes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each overrides the matching config entry.
#[derive(Debug, Args)]
pub struct Common {
    /// Experiment configuration (JSON).
    pub config: PathBuf,
    /// Output directory (`output.directory`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write into an existing output directory (`output.force`).
    #[arg(long)]
    pub force: bool,
    /// Master seed (`run.master_seed`).
    #[arg(long, env = "SGDLAB_SEED")]
    pub seed: Option<u64>,
    /// Worker threads (`run.jobs`).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate an ensemble and write ensemble_report.json and checkpoints.csv.
    Run(Common),
    /// Run assumption checks and write one report per check.
    Check {
        #[command(flatten)]
        common: Common,
        /// Comma-separated subset of p1p2p3p4,descent,variance,gradbound,smoothness,radial,lemma4 (`checks.which`).
        #[arg(long, value_delimiter = ',')]
        which: Option<Vec<String>>,
    },
    /// Probe the radial gradient-to-envelope ratio and write radial_probe.json.
    ProbeRadial(Common),
    /// Classify the schedule's summability conditions and write schedule_report.json.
    ValidateSchedule(Common),
    /// Simulate full-resolution trajectories and write stopping_times.json.
    StoppingTimes(Common),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => commands::run(&c),
        Command::Check { common, which } => commands::check(&common, which),
        Command::ProbeRadial(c) => commands::probe_radial(&c),
        Command::ValidateSchedule(c) => commands::validate_schedule(&c),
        Command::StoppingTimes(c) => commands::stopping_times(&c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("sgdlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
