//! `spinguide`: run spin-guide scenarios and parameter sweeps from TOML
//! configs and write plot-ready text files.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spinguide_core::FidelityConvention;

use commands::{Overrides, SweepKind};
use config::RunConfig;
use error::CliError;

#[derive(Parser)]
#[command(name = "spinguide", version, about)]
struct Cli {
    /// TOML config file (or a metadata.toml from an earlier run).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: outputs.directory or ./spinguide-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps [default: available parallelism].
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Keep every n-th time step in the density map.
    #[arg(long, global = true)]
    snapshot_stride: Option<usize>,
    /// Fidelity from the translated final state compared with the initial
    /// state (the default).
    #[arg(long, global = true, conflicts_with = "phase_matched")]
    literal: bool,
    /// Fidelity against the final guide mode including its velocity phase.
    #[arg(long, global = true)]
    phase_matched: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one scenario; writes density.txt, metrics.txt, metadata.toml.
    Run,
    /// Parameter sweep; writes sweep_<kind>.txt and metadata.toml.
    Sweep {
        #[arg(value_enum)]
        kind: KindArg,
    },
    /// Exit fractions of a two-arm superposition against its relative phase.
    Interfere,
    /// Continuum solver against the discrete chain at several spacings.
    ChainCompare,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Corner,
    Xjunction,
    Coupling,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let raw = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None if matches!(cli.command, Command::Run | Command::ChainCompare) => {
            return Err(CliError::Config(
                "--config is required for this command".into(),
            ))
        }
        None => RunConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| raw.outputs.directory.clone())
        .unwrap_or_else(|| PathBuf::from("spinguide-out"));
    let convention = if cli.phase_matched {
        Some(FidelityConvention::PhaseMatched)
    } else if cli.literal {
        Some(FidelityConvention::Literal)
    } else {
        None
    };
    let mut cfg = commands::resolve(
        raw,
        Overrides {
            snapshot_stride: cli.snapshot_stride,
            convention,
        },
    );
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Run => commands::run(&cfg, &out),
        Command::Sweep { kind } => {
            let kind = match kind {
                KindArg::Corner => SweepKind::Corner,
                KindArg::Xjunction => SweepKind::Xjunction,
                KindArg::Coupling => SweepKind::Coupling,
            };
            commands::resolve_sweep(&mut cfg, kind);
            commands::sweep(&cfg, kind, &out)
        }
        Command::Interfere => {
            commands::resolve_interfere(&mut cfg);
            commands::interfere(&cfg, &out)
        }
        Command::ChainCompare => {
            commands::resolve_chain(&mut cfg);
            commands::chain_compare_cmd(&cfg, &out)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
