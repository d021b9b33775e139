//! Front end for `anfis-core`: argument parsing, file formats and the four
//! subcommands. The binary is a thin wrapper around [`run`].

pub mod commands;
pub mod error;
pub mod files;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, Result};
pub use files::{GenSpec, ModelFile, ReportFile};

#[derive(Debug, Parser)]
#[command(name = "anfis", version, about = "Neuro-fuzzy regression: train, predict, evaluate, generate data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model and write the model file and training report.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long)]
        out_report: PathBuf,
        /// Target column name; defaults to the last column.
        #[arg(long)]
        target: Option<String>,
    },
    /// Print one prediction per input row.
    Predict(PredictArgs),
    /// Print accuracy metrics of a model on labelled data.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Write a synthetic dataset described by a generator spec.
    GenData {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also save the planted teacher as a model file.
        #[arg(long)]
        out_teacher: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    pub data: Option<PathBuf>,
    /// Comma-separated feature values.
    #[arg(long, allow_hyphen_values = true)]
    pub input: Option<String>,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Train {
            config,
            data,
            out_model,
            out_report,
            target,
        } => commands::cmd_train(&config, &data, &out_model, &out_report, target.as_deref(), out),
        Command::Predict(a) => {
            commands::cmd_predict(&a.model, a.data.as_deref(), a.input.as_deref(), out)
        }
        Command::Evaluate { model, data } => commands::cmd_evaluate(&model, &data, out),
        Command::GenData {
            spec,
            rows,
            seed,
            out: path,
            out_teacher,
        } => commands::cmd_gen_data(&spec, rows, seed, &path, out_teacher.as_deref()),
    }
}
