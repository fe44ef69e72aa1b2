use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use idflow_cli::{parse_config, run, CliError, Command, ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "idflow", version, about = "Intrinsic density flow of open quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Dump the metric of the initial-state parameterization
    Qfm(Args),
    /// Flow records (IDQS, IDF, RIDF, rates) along time for each point
    Evolve(Args),
    /// Snapshot frames over the sampling plane
    Field(Args),
    /// Backflow and rate-sign interval reports
    Witness(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON experiment config; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated output formats (csv, json, svg)
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
    /// Worker threads
    #[arg(long, env = "IDFLOW_THREADS")]
    threads: Option<usize>,
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

fn classify(e: CliError) -> Failure {
    if e.is_usage() {
        Failure::Usage(e.into())
    } else {
        Failure::Runtime(e.into())
    }
}

fn load(path: Option<&PathBuf>) -> Result<ExperimentConfig, Failure> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))
        .map_err(Failure::Usage)?;
    parse_config(&text).map_err(classify)
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let (command, args) = match cli.command {
        Cmd::Qfm(a) => (Command::Qfm, a),
        Cmd::Evolve(a) => (Command::Evolve, a),
        Cmd::Field(a) => (Command::Field, a),
        Cmd::Witness(a) => (Command::Witness, a),
    };
    let config = load(args.config.as_ref())?;
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")
            .map_err(Failure::Runtime)?;
    }
    let out = args
        .out
        .or_else(|| config.outputs.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("idflow-out"));
    let formats = args.format.unwrap_or_else(|| config.outputs.formats.clone());
    let written = run(command, &config, &out, &formats).map_err(classify)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
