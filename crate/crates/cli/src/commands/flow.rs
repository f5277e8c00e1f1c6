//! `retrograde flow`: classify how updates reached downstream packages.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use retrograde_core::analysis::{classify_flow, FlatDriver, FlowClassification, FlowError, FlowOptions};
use retrograde_core::miner::Update;
use retrograde_core::store::Store;

use crate::io::{read_ndjson, NdjsonWriter, Progress};
use crate::manifest::RunTracker;
use crate::{JobsArgs, ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct FlowArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// Mined updates to follow (NDJSON from `mine`).
    #[arg(long)]
    pub updates: PathBuf,
    /// Downstream package to observe (repeatable).
    #[arg(long = "downstream")]
    pub downstreams: Vec<String>,
    /// File of downstream package names, one per line.
    #[arg(long)]
    pub downstreams_file: Option<PathBuf>,
    /// Days to keep re-resolving after the update before censoring.
    #[arg(long, default_value_t = 90)]
    pub horizon_days: u32,
    /// Keep observing the downstream version that was latest at the
    /// update instant instead of tracking its new releases.
    #[arg(long, default_value_t = false)]
    pub frozen: bool,
    /// Flow outcomes, one JSON record per line.
    #[arg(long, default_value = "flows.ndjson")]
    pub out: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub jobs: JobsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ViolationRow {
    result: &'static str,
    upstream_package: String,
    to_version: String,
    downstream_package: String,
    reason: String,
}

enum RowOutcome {
    Flow(FlowClassification),
    Violation(ViolationRow),
}

pub fn run(args: FlowArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("flow", &args)?;
    let store = Store::open(&args.store.store).context("open store")?;
    tracker.input(&args.store.store);
    tracker.input(&args.updates);

    let updates: Vec<Update> = read_ndjson(&args.updates)?;
    let mut downstreams = args.downstreams.clone();
    if let Some(file) = &args.downstreams_file {
        tracker.input(file);
        let text = std::fs::read_to_string(file).with_context(|| format!("open {}", file.display()))?;
        downstreams.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    if downstreams.is_empty() {
        bail!("no downstream packages given: use --downstream or --downstreams-file");
    }

    let options = FlowOptions {
        horizon_days: args.horizon_days,
        frozen_downstream: args.frozen,
    };
    let pairs: Vec<(&Update, &String)> = updates
        .iter()
        .flat_map(|u| downstreams.iter().map(move |d| (u, d)))
        .collect();

    let pool = args.jobs.pool()?;
    let driver = FlatDriver { store: &store };
    let rows: Vec<RowOutcome> = pool.install(|| {
        pairs
            .par_iter()
            .map(|(update, downstream)| {
                match classify_flow(update, downstream, &store, &driver, &options) {
                    Ok(classification) => RowOutcome::Flow(classification),
                    Err(FlowError::PreconditionViolated { downstream, reason }) => {
                        RowOutcome::Violation(ViolationRow {
                            result: "precondition-violated",
                            upstream_package: update.package_name.clone(),
                            to_version: update.to_version.to_string(),
                            downstream_package: downstream,
                            reason,
                        })
                    }
                    Err(FlowError::Store(e)) => RowOutcome::Violation(ViolationRow {
                        result: "precondition-violated",
                        upstream_package: update.package_name.clone(),
                        to_version: update.to_version.to_string(),
                        downstream_package: downstream.to_string(),
                        reason: e.to_string(),
                    }),
                }
            })
            .collect()
    });

    let mut progress = Progress::new("flow", pairs.len());
    let mut writer = NdjsonWriter::create(&args.out)?;
    let mut classified = 0u64;
    let mut censored = 0u64;
    let mut violated = 0u64;
    let mut by_category: std::collections::BTreeMap<&'static str, u64> = Default::default();

    for row in &rows {
        progress.tick(1);
        match row {
            RowOutcome::Flow(FlowClassification::Classified(outcome)) => {
                classified += 1;
                let key = match outcome.category {
                    retrograde_core::analysis::FlowCategory::InstantNoIntervention => "instantNoIntervention",
                    retrograde_core::analysis::FlowCategory::DelayedWithIntervention => "delayedWithIntervention",
                    retrograde_core::analysis::FlowCategory::DelayedMiddleFix => "delayedMiddleFix",
                    retrograde_core::analysis::FlowCategory::DeletedDependency => "deletedDependency",
                };
                *by_category.entry(key).or_default() += 1;
                writer.write(&FlowClassification::Classified(outcome.clone()))?;
            }
            RowOutcome::Flow(censored_row @ FlowClassification::Censored { .. }) => {
                censored += 1;
                writer.write(censored_row)?;
            }
            RowOutcome::Violation(violation) => {
                violated += 1;
                writer.write(violation)?;
            }
        }
    }
    progress.finish();
    writer.finish()?;
    tracker.output(&args.out);

    tracker.set_count("pairs", pairs.len() as u64);
    tracker.set_count("classified", classified);
    tracker.set_count("censored", censored);
    tracker.set_count("preconditionViolated", violated);
    for (key, count) in &by_category {
        tracker.set_count(key, *count);
    }
    eprintln!(
        "flow: {} pair(s): {} classified, {} censored, {} precondition-violated",
        pairs.len(),
        classified,
        censored,
        violated
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome::clean())
}
