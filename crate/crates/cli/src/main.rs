use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use coreset_cli::commands::{self, emit, with_threads};
use coreset_cli::config::RunConfig;
use coreset_cli::exit;
use serde_json::json;

/// Build and certify coresets for (k,z)-clustering.
#[derive(Parser)]
#[command(name = "coreset", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic or lower-bound dataset
    Gen(Run),
    /// Build a coreset of a dataset
    Build(Run),
    /// Measure a coreset's empirical distortion
    Eval(Run),
    /// Weak-coreset check for subspace approximation
    Subspace(Run),
    /// Time every builder on a synthetic mixture
    Bench(Run),
}

#[derive(Args)]
struct Run {
    /// TOML file with any of the settings below
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

fn run(cli: Cli) -> Result<u8> {
    let (Command::Gen(r) | Command::Build(r) | Command::Eval(r) | Command::Subspace(r) | Command::Bench(r)) = &cli.command;
    let cfg = RunConfig::resolve(r.config.as_deref(), &r.flags)?;
    with_threads(cfg.threads, || -> Result<u8> {
        match &cli.command {
            Command::Gen(_) => {
                let summary = commands::gen(&cfg)?;
                emit(&cfg, &serde_json::to_value(summary)?)?;
            }
            Command::Build(_) => {
                let (s, sidecar) = commands::build(&cfg)?;
                eprintln!("built {} rows with {}", s.len(), s.meta().builder);
                emit(&cfg, &sidecar)?;
            }
            Command::Eval(_) => {
                let report = commands::eval(&cfg)?;
                emit(&cfg, &serde_json::to_value(&report)?)?;
                if !report.within_budget {
                    eprintln!("eps_emp {} exceeds budget {}", report.eps_emp, report.eps_budget.unwrap_or_default());
                    return Ok(exit::OVER_BUDGET);
                }
            }
            Command::Subspace(_) => {
                let report = commands::subspace(&cfg)?;
                emit(&cfg, &serde_json::to_value(report)?)?;
            }
            Command::Bench(_) => {
                let report = commands::bench(&cfg)?;
                emit(&cfg, &json!(report))?;
            }
        }
        Ok(exit::OK)
    })?
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::ERROR)
        }
    }
}
