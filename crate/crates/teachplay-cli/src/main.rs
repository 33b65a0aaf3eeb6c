//! `teachplay` — variable-speed teaching-playback workbench.
//!
//! Pipeline: teach → augment (proposed | naive) → train → eval → report,
//! all driven by one TOML config. Exit codes: 0 success, 1 task error,
//! 2 configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use teachplay_cli::commands::{self, Mode};
use teachplay_cli::config::Experiment;

#[derive(Parser)]
#[command(name = "teachplay", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the command's seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `experiment.output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker-count cap. Execution is single-threaded, so any value is
    /// honored; the flag exists for config/script compatibility.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Proposed,
    Naive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Proposed => Mode::Proposed,
            ModeArg::Naive => Mode::Naive,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Teach one bilateral demonstration per training variant.
    Teach {
        #[command(flatten)]
        common: Common,
    },
    /// Build the training dataset (proposed playbacks or naive rescaling).
    Augment {
        #[command(flatten)]
        common: Common,
        /// Dataset construction mode.
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Train the policy on a dataset.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Evaluate a checkpoint over the label × variant grid.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: ModeArg,
    },
    /// Compare the proposed and naive evaluation reports.
    Report {
        #[command(flatten)]
        common: Common,
        /// Proposed-mode eval report (default: the config's output path).
        #[arg(long)]
        proposed: Option<PathBuf>,
        /// Naive-mode eval report (default: the config's output path).
        #[arg(long)]
        naive: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<Experiment, commands::CliError> {
    let mut exp = Experiment::load(&common.config)?;
    if let Some(out) = &common.out {
        exp.output_dir = out.clone();
    }
    Ok(exp)
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    match &cli.cmd {
        Cmd::Teach { common } => commands::cmd_teach(&load(common)?, common.seed),
        Cmd::Augment { common, mode } => {
            commands::cmd_augment(&load(common)?, (*mode).into(), common.seed)
        }
        Cmd::Train { common, mode } => {
            commands::cmd_train(&load(common)?, (*mode).into(), common.seed)
        }
        Cmd::Eval { common, mode } => {
            commands::cmd_eval(&load(common)?, (*mode).into(), common.seed)
        }
        Cmd::Report {
            common,
            proposed,
            naive,
        } => commands::cmd_report(&load(common)?, proposed.as_deref(), naive.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
