//! `pml`: reports, golden-file checks and curve data for the contact and
//! projective models.
//!
//! Exit codes: 0 pass, 1 failed check (`--assert`, `--golden`), 2 usage or
//! precondition error.

mod cmd_connections;
mod cmd_fefferman;
mod cmd_kostant;
mod cmd_model;
mod cmd_pathgeom;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{CliError, Tolerances};

#[derive(Parser)]
#[command(name = "pml", version, about = "Parabolic model toolkit: Kostant tables, model curves, transfer and connection checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override, e.g. `--tol circle=1e-10` (repeatable).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Turn the command's invariant suite into the exit code.
    #[arg(long = "assert", global = true)]
    pub assert: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Chains and contact geodesics of the flat contact model.
    #[command(subcommand)]
    Model(cmd_model::ModelCommand),
    /// Kernel of the Kostant Laplacian and complex identities.
    #[command(subcommand)]
    Kostant(cmd_kostant::KostantCommand),
    /// The sp -> sl embedding and the curvature transfer.
    #[command(subcommand)]
    Fefferman(cmd_fefferman::FeffermanCommand),
    /// Chart-level affine connections.
    #[command(subcommand)]
    Connections(cmd_connections::ConnectionsCommand),
    /// Generalized path geometry axioms on the model flag space.
    #[command(subcommand)]
    Pathgeom(cmd_pathgeom::PathgeomCommand),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let tol = Tolerances::parse(&cli.common.tol)?;
    let common = &cli.common;
    match cli.command {
        Command::Model(c) => cmd_model::run(c, common, &tol),
        Command::Kostant(c) => cmd_kostant::run(c, common, &tol),
        Command::Fefferman(c) => cmd_fefferman::run(c, common, &tol),
        Command::Connections(c) => cmd_connections::run(c, common, &tol),
        Command::Pathgeom(c) => cmd_pathgeom::run(c, common, &tol),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
