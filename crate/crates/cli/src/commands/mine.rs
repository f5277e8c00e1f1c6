//! `retrograde mine`: mine and classify updates for every package.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use retrograde_core::miner::{classify_security_effect, mine_updates, MiningReport, SecurityEffect};
use retrograde_core::store::Store;
use retrograde_core::UpdateKind;

use crate::io::{NdjsonWriter, Progress};
use crate::manifest::RunTracker;
use crate::{JobsArgs, ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct MineArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// Mined updates, one JSON record per line.
    #[arg(long, default_value = "updates.ndjson")]
    pub out: PathBuf,
    /// Rejected packages with reasons, one JSON record per line.
    #[arg(long)]
    pub rejected: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub jobs: JobsArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RejectedRow<'a> {
    package_name: &'a str,
    reason: &'a str,
}

pub fn run(args: MineArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("mine", &args)?;
    let store = Store::open(&args.store.store).context("open store")?;
    tracker.input(&args.store.store);

    let names: Vec<String> = store.package_names().map(String::from).collect();
    let pool = args.jobs.pool()?;
    let mut progress = Progress::new("mine", names.len());

    let reports: Vec<(String, MiningReport)> = pool.install(|| {
        names
            .par_iter()
            .map(|name| {
                let history = store.history(name).expect("listed package exists");
                let mut report = mine_updates(&history);
                let advisories = store.advisories_for(name);
                if !advisories.is_empty() {
                    for update in &mut report.updates {
                        update.security_effect = classify_security_effect(update, advisories);
                    }
                }
                (name.clone(), report)
            })
            .collect()
    });

    let mut writer = NdjsonWriter::create(&args.out)?;
    let mut rejected_writer = args.rejected.as_deref().map(NdjsonWriter::create).transpose()?;
    let mut rejected = 0u64;
    let mut introduces = 0u64;
    let mut patches = 0u64;
    let mut inter = 0u64;

    for (name, report) in &reports {
        progress.tick(1);
        if report.rejected {
            rejected += 1;
            if let Some(w) = rejected_writer.as_mut() {
                w.write(&RejectedRow {
                    package_name: name,
                    reason: report.rejection_reason.as_deref().unwrap_or(""),
                })?;
            }
            continue;
        }
        for update in &report.updates {
            match update.security_effect {
                SecurityEffect::IntroducesVuln => introduces += 1,
                SecurityEffect::PatchesVuln => patches += 1,
                SecurityEffect::None => {}
            }
            if update.kind == UpdateKind::InterGroup {
                inter += 1;
            }
            writer.write(update)?;
        }
    }
    progress.finish();

    let mined = writer.finish()?;
    if let Some(w) = rejected_writer {
        w.finish()?;
    }

    tracker.output(&args.out);
    if let Some(path) = &args.rejected {
        tracker.output(path);
    }
    tracker.set_count("packages", names.len() as u64);
    tracker.set_count("rejectedPackages", rejected);
    tracker.set_count("updatesMined", mined);
    tracker.set_count("interGroupUpdates", inter);
    tracker.set_count("introducesVuln", introduces);
    tracker.set_count("patchesVuln", patches);

    eprintln!(
        "mine: {} package(s), {} update(s), {} rejected",
        names.len(),
        mined,
        rejected
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome::clean())
}
