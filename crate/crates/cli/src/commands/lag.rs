//! `retrograde lag`: out-of-date statistics for a resolved manifest.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use retrograde_core::analysis::compute_lag;
use retrograde_core::store::Store;

use crate::commands::resolve::resolve_manifest;
use crate::io::NdjsonWriter;
use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct LagArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// Manifest file with `dependencies` (package.json shape).
    #[arg(long)]
    pub manifest_file: PathBuf,
    /// Resolution instant T_P (RFC3339 or unix milliseconds).
    #[arg(long)]
    pub as_of: String,
    /// Also resolve the manifest's devDependencies.
    #[arg(long, default_value_t = false)]
    pub include_dev: bool,
    /// Per-dependency lag entries, one JSON record per line.
    #[arg(long, default_value = "lag.ndjson")]
    pub out: PathBuf,
    /// Summary document (percent out of date, mean days).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

pub fn run(args: LagArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("lag", &args)?;
    let store = Store::open(&args.store.store).context("open store")?;
    tracker.input(&args.store.store);
    tracker.input(&args.manifest_file);

    let graph = resolve_manifest(&store, &args.manifest_file, &args.as_of, args.include_dev)?;
    let report = compute_lag(&graph, &store);

    let mut writer = NdjsonWriter::create(&args.out)?;
    for entry in &report.entries {
        writer.write(entry)?;
    }
    writer.finish()?;
    tracker.output(&args.out);

    if let Some(summary_path) = &args.summary {
        std::fs::write(summary_path, serde_json::to_vec_pretty(&report.summary)?)
            .with_context(|| format!("write {}", summary_path.display()))?;
        tracker.output(summary_path);
    }

    tracker.set_count("dependencies", report.summary.dependencies as u64);
    tracker.set_count("outOfDate", report.summary.out_of_date as u64);
    eprintln!(
        "lag: {}/{} dependencies out of date ({:.2}%), mean {} day(s)",
        report.summary.out_of_date,
        report.summary.dependencies,
        report.summary.percent_out_of_date,
        report
            .summary
            .mean_out_of_date_days
            .map(|d| format!("{d:.2}"))
            .unwrap_or_else(|| "n/a".into()),
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome::clean())
}
