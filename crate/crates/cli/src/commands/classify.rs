//! `retrograde classify-constraints`: constraint categories, either as a
//! per-year usage table over the store or for raw constraint strings.

use std::io::BufRead;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use retrograde_core::analysis::constraint_usage_by_year;
use retrograde_core::semver::parse_constraint;
use retrograde_core::store::Store;

use crate::io::NdjsonWriter;
use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// Output table, one JSON record per line.
    #[arg(long, default_value = "constraint-usage.ndjson")]
    pub out: PathBuf,
    /// First year to include.
    #[arg(long)]
    pub from_year: Option<i32>,
    /// Last year to include.
    #[arg(long)]
    pub to_year: Option<i32>,
    /// Classify raw constraint strings (one per line) instead of the store.
    #[arg(long)]
    pub raw: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

#[derive(Serialize)]
struct RawRow<'a> {
    constraint: &'a str,
    category: &'a str,
    intervals: Vec<String>,
}

pub fn run(args: ClassifyArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("classify-constraints", &args)?;

    if let Some(raw_path) = &args.raw {
        tracker.input(raw_path);
        let file = std::fs::File::open(raw_path).with_context(|| format!("open {}", raw_path.display()))?;
        let mut writer = NdjsonWriter::create(&args.out)?;
        for line in std::io::BufReader::new(file).lines() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let parsed = parse_constraint(&line);
            writer.write(&RawRow {
                constraint: &line,
                category: parsed.category().label(),
                intervals: parsed.intervals().iter().map(|i| i.to_string()).collect(),
            })?;
        }
        let classified = writer.finish()?;
        tracker.output(&args.out);
        tracker.set_count("constraintsClassified", classified);
        eprintln!("classify-constraints: {classified} string(s) classified");
        tracker.write(args.manifest.run_manifest.as_deref())?;
        return Ok(Outcome::clean());
    }

    let store = Store::open(&args.store.store).context("open store")?;
    tracker.input(&args.store.store);

    let range = match (args.from_year, args.to_year) {
        (Some(a), Some(b)) => Some(a..=b),
        (Some(a), None) => Some(a..=9999),
        (None, Some(b)) => Some(0..=b),
        (None, None) => None,
    };
    let rows = constraint_usage_by_year(&store, range);

    let mut writer = NdjsonWriter::create(&args.out)?;
    let mut constraints = 0u64;
    for row in &rows {
        constraints += row.constraints as u64;
        writer.write(row)?;
    }
    writer.finish()?;

    tracker.output(&args.out);
    tracker.set_count("years", rows.len() as u64);
    tracker.set_count("constraints", constraints);
    eprintln!(
        "classify-constraints: {} year row(s), {} constraint(s)",
        rows.len(),
        constraints
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome::clean())
}
