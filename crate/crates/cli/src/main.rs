//! `retrograde` — historical semver analysis for npm-style registries.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod io;
mod manifest;

#[derive(Parser)]
#[command(
    name = "retrograde",
    version,
    about = "Ingest registry metadata, mine updates, time-travel resolutions, and compute ecosystem statistics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize, Clone)]
pub struct StoreArgs {
    /// Metadata store directory.
    #[arg(long, env = "RETROGRADE_STORE", default_value = "./store")]
    pub store: PathBuf,
}

#[derive(Args, Serialize, Clone)]
pub struct JobsArgs {
    /// Worker threads for parallel stages (0 uses all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

impl JobsArgs {
    pub fn pool(&self) -> anyhow::Result<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()?)
    }
}

#[derive(Args, Serialize, Clone)]
pub struct ManifestArgs {
    /// Where to write the run manifest (default: next to the primary output).
    #[arg(long)]
    pub run_manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest packument change documents into the store.
    Ingest(commands::ingest::IngestArgs),
    /// Ingest OSV security advisories into the store.
    Advisories(commands::advisories::AdvisoriesArgs),
    /// Mine updates from every package history in the store.
    Mine(commands::mine::MineArgs),
    /// Classify dependency constraints and tabulate usage by year.
    ClassifyConstraints(commands::classify::ClassifyArgs),
    /// Serve the time-traveling registry proxy.
    Serve(commands::serve::ServeArgs),
    /// Resolve a manifest's dependencies as of an instant.
    Resolve(commands::resolve::ResolveArgs),
    /// Compute technical lag for a resolved manifest.
    Lag(commands::lag::LagArgs),
    /// Classify how updates flow to downstream packages.
    Flow(commands::flow::FlowArgs),
    /// Classify what changed between version tarballs.
    Diff(commands::diff::DiffArgs),
    /// Emit CSV tables and SVG plots from analysis outputs.
    Report(commands::report::ReportArgs),
}

/// What a finished subcommand reports back: partial data errors make the
/// process exit 1 even though outputs were written.
pub struct Outcome {
    pub data_errors: u64,
}

impl Outcome {
    pub fn clean() -> Outcome {
        Outcome { data_errors: 0 }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest::run(args),
        Command::Advisories(args) => commands::advisories::run(args),
        Command::Mine(args) => commands::mine::run(args),
        Command::ClassifyConstraints(args) => commands::classify::run(args),
        Command::Serve(args) => commands::serve::run(args),
        Command::Resolve(args) => commands::resolve::run(args),
        Command::Lag(args) => commands::lag::run(args),
        Command::Flow(args) => commands::flow::run(args),
        Command::Diff(args) => commands::diff::run(args),
        Command::Report(args) => commands::report::run(args),
    };
    match result {
        Ok(outcome) if outcome.data_errors == 0 => ExitCode::SUCCESS,
        Ok(outcome) => {
            eprintln!("completed with {} data error(s), see report above", outcome.data_errors);
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
