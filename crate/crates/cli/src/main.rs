//! `autolabel`: generate labels for an unlabeled time-series collection
//! from a small labeled subset, and validate them.

mod commands;
mod config;

use std::process::ExitCode;

use autolabel_core::Error;
use clap::{Parser, Subcommand};

use commands::{cmd_cluster, cmd_encode, cmd_evaluate, cmd_label, Outcome};
use config::{ConfigArgs, PipelineConfig, Precision};

#[derive(Debug, Parser)]
#[command(name = "autolabel", version, about)]
struct Cli {
    /// More log output (-v info, -vv debug)
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate labels for the training set
    #[command(args_override_self = true)]
    Label(ConfigArgs),
    /// Score classifiers trained on generated labels against true labels
    #[command(args_override_self = true)]
    Evaluate(ConfigArgs),
    /// Train the autoencoder and dump the compact sequences
    #[command(args_override_self = true)]
    Encode(ConfigArgs),
    /// Cluster the compact sequences and report the Hubert scores
    #[command(args_override_self = true)]
    Cluster(ConfigArgs),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io { .. } | Error::Parse { .. } | Error::Format(_) | Error::Config(_) | Error::Serde(_) => 2,
        Error::Contract(_) | Error::Shape(_) => 3,
        Error::Training { .. } => 4,
        Error::Numeric(_) => 1,
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("AUTOLABEL_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("AUTOLABEL_THREADS must be a positive integer, got '{value}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))
}

fn dispatch<F32, F64>(config: &PipelineConfig, f32_run: F32, f64_run: F64) -> Outcome<()>
where
    F32: FnOnce(&PipelineConfig) -> Outcome<()>,
    F64: FnOnce(&PipelineConfig) -> Outcome<()>,
{
    match config.precision {
        Precision::F32 => f32_run(config),
        Precision::F64 => f64_run(config),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Err(e) = configure_threads() {
        eprintln!("autolabel: {e}");
        return ExitCode::from(exit_code(&e));
    }
    let (args, name) = match &cli.command {
        Command::Label(a) => (a, "label"),
        Command::Evaluate(a) => (a, "evaluate"),
        Command::Encode(a) => (a, "encode"),
        Command::Cluster(a) => (a, "cluster"),
    };
    let config = match PipelineConfig::resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("autolabel {name}: reading the configuration: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let result = match cli.command {
        Command::Label(_) => dispatch(&config, cmd_label::<f32>, cmd_label::<f64>),
        Command::Evaluate(_) => dispatch(&config, cmd_evaluate::<f32>, cmd_evaluate::<f64>),
        Command::Encode(_) => dispatch(&config, cmd_encode::<f32>, cmd_encode::<f64>),
        Command::Cluster(_) => dispatch(&config, cmd_cluster::<f32>, cmd_cluster::<f64>),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("autolabel {name}: {}: {}", f.stage, f.error);
            ExitCode::from(exit_code(&f.error))
        }
    }
}
