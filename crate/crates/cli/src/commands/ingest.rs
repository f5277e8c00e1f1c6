//! `retrograde ingest`: load packument change documents into the store.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use retrograde_core::store::Store;

use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct IngestArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// Change-feed poll responses or NDJSON packument dumps.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

/// A changes-feed poll response carries its rows under `results`;
/// anything else is treated as NDJSON of change rows or packuments.
fn load_documents(path: &std::path::Path) -> Result<Vec<serde_json::Value>> {
    let values = crate::io::read_json_values(path)?;
    let mut docs = Vec::new();
    for value in values {
        match value.get("results").and_then(|r| r.as_array()) {
            Some(rows) => docs.extend(rows.iter().cloned()),
            None => docs.push(value),
        }
    }
    Ok(docs)
}

pub fn run(args: IngestArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("ingest", &args)?;
    let mut store = Store::open(&args.store.store).context("open store")?;

    let mut data_errors = 0u64;
    for input in &args.input {
        tracker.input(input);
        let docs = load_documents(input)?;
        eprintln!("ingest: {} document(s) from {}", docs.len(), input.display());
        let mut progress = crate::io::Progress::new("ingest", docs.len());
        for chunk in docs.chunks(1_000) {
            let report = store.ingest_changes(chunk.to_vec())?;
            progress.tick(chunk.len());
            tracker.count("documents", report.documents as u64);
            tracker.count("versionsInserted", report.versions_inserted as u64);
            tracker.count("versionsUpdated", report.versions_updated as u64);
            tracker.count("tagEventsRecorded", report.tag_events_recorded as u64);
            tracker.count("tombstonesRecorded", report.tombstones_recorded as u64);
            tracker.count("versionsSkipped", report.skipped_versions.len() as u64);
            tracker.count("invalidDocuments", report.invalid_documents.len() as u64);
            for skipped in &report.skipped_versions {
                eprintln!(
                    "ingest: skipped {}@{}: {}",
                    skipped.package, skipped.version, skipped.reason
                );
            }
            for invalid in &report.invalid_documents {
                eprintln!("ingest: invalid document {}: {}", invalid.document, invalid.reason);
            }
            data_errors += report.data_errors() as u64;
        }
    }
    store.close()?;

    let counters = tracker.counters().clone();
    eprintln!(
        "ingest: {} inserted, {} updated, {} skipped",
        counters.get("versionsInserted").unwrap_or(&0),
        counters.get("versionsUpdated").unwrap_or(&0),
        counters.get("versionsSkipped").unwrap_or(&0),
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome { data_errors })
}
