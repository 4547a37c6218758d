//! `cyclic-ff`: train, evaluate and sweep graph networks trained by local
//! forward-forward objectives.

mod artifacts;
mod commands;
mod config;
mod dataset;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{SweepArgs, TrainArgs};
use error::CliError;

#[derive(Parser)]
#[command(name = "cyclic-ff", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Train one run per seed; writes checkpoint, metrics CSV and manifest.
    Train {
        #[arg(long, conflicts_with = "manifest")]
        config: Option<PathBuf>,
        /// Repeat a run recorded in a manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// `key=value` override, repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// `a..b` (inclusive) or `a,b,c`.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Test error of a saved checkpoint on the configured dataset.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Cross product of comma-separated `--set` lists, times seeds.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=V1,V2,...")]
        overrides: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Edge list, degrees, input widths and cyclicity of the configured graph.
    InspectGraph {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Write a small embeddings file showing the expected binary layout.
    ExportEmbeddingsTemplate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        n_per_class: usize,
        #[arg(long, default_value_t = 8)]
        dim: usize,
        #[arg(long, default_value_t = 2)]
        classes: usize,
    },
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Train {
            config,
            manifest,
            overrides,
            seed,
            seeds,
            out,
        } => commands::train(TrainArgs {
            config: config.as_deref(),
            manifest: manifest.as_deref(),
            overrides: &overrides,
            seed,
            seeds: seeds.as_deref(),
            out: &out,
        }),
        Cmd::Eval {
            checkpoint,
            config,
            overrides,
        } => commands::eval(&checkpoint, config.as_deref(), &overrides),
        Cmd::Sweep {
            config,
            overrides,
            seed,
            seeds,
            jobs,
            out,
        } => commands::sweep_cmd(SweepArgs {
            config: config.as_deref(),
            overrides: &overrides,
            seed,
            seeds: seeds.as_deref(),
            jobs,
            out: &out,
        }),
        Cmd::InspectGraph { config, overrides } => {
            commands::inspect_graph(config.as_deref(), &overrides)
        }
        Cmd::ExportEmbeddingsTemplate {
            out,
            n_per_class,
            dim,
            classes,
        } => commands::export_embeddings_template(&out, n_per_class, dim, classes),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
