//! `snnflow`: ingest captures, build histogram datasets, train and evaluate
//! the spiking classifier.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::AblationArg;
use config::{FileConfig, Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "snnflow", version, about = "Spiking-network traffic classification pipeline")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed for every random choice (required here or in the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker thread cap; results are identical for any value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn labeled captures (pcap or packet CSV) into packet CSV plus a flow index.
    Ingest {
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Window and histogram a packet CSV directory into an FH01 dataset.
    Featurize {
        /// Directory holding packets.csv and flows.csv.
        #[arg(long)]
        input: PathBuf,
    },
    /// Generate the four-class synthetic suite as packet CSV plus a flow index.
    Synth {
        #[arg(long)]
        flows_per_class: Option<usize>,
    },
    /// Train on a dataset; writes model.snn, epoch_log.csv and split.csv.
    Train {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate a checkpoint on the test partition and write report tables.
    Eval {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "none")]
        ablation: AblationArg,
        /// Evaluate every sample instead of the test partition.
        #[arg(long)]
        all: bool,
    },
    /// Finite-difference check of the analytic gradients.
    Gradcheck,
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.common.config.as_deref())?;
    let mut flags = Overrides {
        seed: cli.common.seed,
        threads: cli.common.threads,
        out: cli.common.out,
        ..Default::default()
    };
    match &cli.command {
        Command::Ingest { manifest } => flags.manifest = manifest.clone(),
        Command::Synth { flows_per_class } => flags.flows_per_class = *flows_per_class,
        Command::Train { dataset, epochs } => {
            flags.dataset = dataset.clone();
            flags.epochs = *epochs;
        }
        Command::Eval { dataset, .. } => flags.dataset = dataset.clone(),
        Command::Featurize { .. } | Command::Gradcheck => {}
    }
    let cfg = RunConfig::resolve(file, flags)?;
    configure_threads(cfg.threads)?;
    match cli.command {
        Command::Ingest { .. } => commands::ingest(&cfg),
        Command::Featurize { input } => commands::featurize_cmd(&cfg, &input),
        Command::Synth { .. } => commands::synth(&cfg),
        Command::Train { .. } => commands::train(&cfg),
        Command::Eval { checkpoint, ablation, all, .. } => commands::eval(&cfg, &checkpoint, ablation, all),
        Command::Gradcheck => commands::gradcheck_cmd(&cfg),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: Option<usize>) -> Result<()> {
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // one line, even for multi-line parser messages
            let msg = format!("{e:#}");
            eprintln!("error: {}", msg.split_whitespace().collect::<Vec<_>>().join(" "));
            ExitCode::FAILURE
        }
    }
}
