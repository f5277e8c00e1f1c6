//! `retrograde advisories`: import OSV documents into the store.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use retrograde_core::store::Store;

use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct AdvisoriesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// OSV JSON files (single document, array, or NDJSON).
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

pub fn run(args: AdvisoriesArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("advisories", &args)?;
    let mut store = Store::open(&args.store.store).context("open store")?;

    let mut issues = 0u64;
    for input in &args.input {
        tracker.input(input);
        let docs = crate::io::read_json_values(input)?;
        let report = store.ingest_advisories(docs)?;
        tracker.count("documents", report.documents as u64);
        tracker.count("advisoriesIngested", report.advisories_ingested as u64);
        tracker.count("issues", report.issues.len() as u64);
        for issue in &report.issues {
            eprintln!("advisories: {issue}");
        }
        issues += report.issues.len() as u64;
    }
    store.close()?;

    eprintln!(
        "advisories: {} ingested, {} issue(s)",
        tracker.counters().get("advisoriesIngested").unwrap_or(&0),
        issues
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome { data_errors: issues })
}
