//! Command-line interface: argument parsing and exit-code mapping.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::harness::commands::{
    run_compare, run_evaluate, run_heatmap, run_train, CompareArgs, EvaluateArgs, HeatmapArgs,
    TrainArgs,
};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "reflectsim",
    version,
    about = "Simulator and training harness for mechanically steered reflector arrays"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Experiment configuration file; omitted means built-in defaults.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory; defaults under $REFLECTSIM_OUT (or ./runs).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train one arm and write logs plus a checkpoint.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        /// Arm to train: beam_focusing_ma | beam_focusing_sa | column_based_ma.
        #[arg(long)]
        algo: Option<String>,
        /// Override the training budget; 0 writes an initialized checkpoint.
        #[arg(long)]
        episodes: Option<usize>,
        /// Named budget: desk (300 episodes) | paper (3000 episodes).
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        seed: u64,
    },
    /// Run a checkpointed policy greedily and log per-user receive power.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 300)]
        steps: usize,
        /// Std-dev of user-position sensing noise, metres.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Render a coverage map as CSV plus a portable pixmap.
    Heatmap {
        #[command(flatten)]
        common: CommonArgs,
        /// Settle this policy on the evaluation users, then render.
        #[arg(long, value_name = "FILE", conflicts_with = "static_kind")]
        checkpoint: Option<PathBuf>,
        /// Render an untrained arm instead: flat | none.
        #[arg(long = "static", value_name = "KIND")]
        static_kind: Option<String>,
        /// Samples per axis.
        #[arg(long, default_value_t = 120)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train and evaluate every arm over shared seeds; write a summary table.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated seeds; omitted means the configured seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Override the per-arm training budget.
        #[arg(long)]
        episodes: Option<usize>,
        /// Named budget: desk (300 episodes) | paper (3000 episodes).
        #[arg(long)]
        profile: Option<String>,
    },
}

/// Run one parsed command; the outcome carries the summary line to print.
pub fn dispatch(cli: Cli) -> Result<crate::harness::commands::CommandOutcome> {
    match cli.command {
        Command::Train { common, algo, episodes, profile, seed } => run_train(&TrainArgs {
            config: common.config,
            algo,
            episodes,
            profile,
            seed,
            out: common.out,
        }),
        Command::Evaluate { common, checkpoint, steps, noise_sigma, seed } => {
            run_evaluate(&EvaluateArgs {
                config: common.config,
                checkpoint,
                steps,
                noise_sigma,
                seed,
                out: common.out,
            })
        }
        Command::Heatmap { common, checkpoint, static_kind, resolution, seed } => {
            run_heatmap(&HeatmapArgs {
                config: common.config,
                checkpoint,
                static_kind,
                resolution,
                seed,
                out: common.out,
            })
        }
        Command::Compare { common, seeds, episodes, profile } => run_compare(&CompareArgs {
            config: common.config,
            seeds,
            episodes,
            profile,
            out: common.out,
        }),
    }
}

/// Exit code for a failed command: 2 for configuration or argument problems,
/// 3 for checkpoint problems, 1 otherwise.
pub fn exit_code_for(error: &Error) -> i32 {
    match error {
        Error::InvalidConfiguration(_) | Error::InvalidArgument(_) => 2,
        Error::IncompatibleCheckpoint(_) | Error::MalformedFile(_) => 3,
        _ => 1,
    }
}

/// Full CLI entry point; returns the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}
