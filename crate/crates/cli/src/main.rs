use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

mod experiment;
mod solve;

/// Places service function chains over a substrate network.
#[derive(Debug, Parser)]
#[command(name = "sfc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one chain request and write the deployment.
    Solve(solve::SolveArgs),
    /// Run a seeded arrival/departure experiment for each seed.
    Experiment(experiment::ExperimentArgs),
    /// Write a k-ary fat-tree as a network file.
    Topology(TopologyArgs),
}

#[derive(Debug, clap::Args)]
struct TopologyArgs {
    /// Even arity of the fat-tree.
    #[arg(long)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    host_cores: i64,
    #[arg(long, default_value_t = 1000)]
    link_mbps: u64,
    /// Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Outcome of a subcommand that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => solve::run(&args),
        Command::Experiment(args) => experiment::run(&args).map(|()| Verdict::Accepted),
        Command::Topology(args) => topology(&args).map(|()| Verdict::Accepted),
    };
    match outcome {
        Ok(Verdict::Accepted) => ExitCode::SUCCESS,
        Ok(Verdict::Rejected) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn topology(args: &TopologyArgs) -> Result<()> {
    let spec = sfc_core::simlab::TopologySpec::FatTree {
        k: args.k,
        host_cores: args.host_cores,
        link_mbps: args.link_mbps,
    };
    let net = spec.build()?;
    emit(args.out.as_deref(), net.to_json().as_bytes())
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Writes to `out`, or to stdout when absent.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
