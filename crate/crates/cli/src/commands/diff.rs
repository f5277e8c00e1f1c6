//! `retrograde diff`: classify tarball content changes, for one pair or
//! for a whole mined-update corpus.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use serde::Serialize;

use retrograde_core::diff::{classify_labeled, ChangeClass, DiffOutcome};
use retrograde_core::miner::Update;
use retrograde_core::semver::IncrementType;

use crate::io::{read_ndjson, NdjsonWriter, Progress};
use crate::manifest::RunTracker;
use crate::{JobsArgs, ManifestArgs, Outcome};

#[derive(Args, Serialize, Clone)]
pub struct DiffArgs {
    /// Older tarball (single-pair mode).
    #[arg(long, requires = "to", conflicts_with = "updates")]
    pub from: Option<PathBuf>,
    /// Newer tarball (single-pair mode).
    #[arg(long, requires = "from", conflicts_with = "updates")]
    pub to: Option<PathBuf>,
    /// Mined updates to classify (batch mode; NDJSON from `mine`).
    #[arg(long, requires = "tarballs")]
    pub updates: Option<PathBuf>,
    /// Directory of tarballs named `{name}-{version}.tgz`, with `/` in
    /// scoped names replaced by `__`.
    #[arg(long)]
    pub tarballs: Option<PathBuf>,
    /// Classification records, one JSON object per line.
    #[arg(long, default_value = "diffs.ndjson")]
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
struct PairRow {
    package_name: String,
    from_version: String,
    to_version: String,
    increment: IncrementType,
    class: ChangeClass,
    changes: Vec<retrograde_core::diff::FileChange>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PairError {
    package_name: String,
    from_version: String,
    to_version: String,
    error: String,
}

pub fn tarball_file_name(package: &str, version: &str) -> String {
    format!("{}-{}.tgz", package.replace('/', "__"), version)
}

fn classify_pair(from: &Path, to: &Path) -> Result<DiffOutcome> {
    let from_file = File::open(from).with_context(|| format!("open {}", from.display()))?;
    let to_file = File::open(to).with_context(|| format!("open {}", to.display()))?;
    Ok(classify_labeled(
        from_file,
        &from.display().to_string(),
        to_file,
        &to.display().to_string(),
    )?)
}

pub fn run(args: DiffArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("diff", &args)?;

    if let (Some(from), Some(to)) = (&args.from, &args.to) {
        tracker.input(from);
        tracker.input(to);
        let outcome = classify_pair(from, to)?;
        let mut writer = NdjsonWriter::create(&args.out)?;
        writer.write(&outcome)?;
        writer.finish()?;
        tracker.output(&args.out);
        tracker.set_count("pairs", 1);
        println!("{}", outcome.class.label());
        tracker.write(args.manifest.run_manifest.as_deref())?;
        return Ok(Outcome::clean());
    }

    let (Some(updates_path), Some(tarball_dir)) = (&args.updates, &args.tarballs) else {
        bail!("either --from/--to or --updates/--tarballs is required");
    };
    tracker.input(updates_path);
    tracker.input(tarball_dir);

    let updates: Vec<Update> = read_ndjson(updates_path)?;
    let pool = args.jobs.pool()?;

    enum Row {
        Ok(PairRow),
        Missing(PairError),
        Corrupt(PairError),
    }

    let rows: Vec<Row> = pool.install(|| {
        updates
            .par_iter()
            .map(|update| {
                let from_path =
                    tarball_dir.join(tarball_file_name(&update.package_name, &update.from_version.to_string()));
                let to_path =
                    tarball_dir.join(tarball_file_name(&update.package_name, &update.to_version.to_string()));
                let describe = |error: String| PairError {
                    package_name: update.package_name.clone(),
                    from_version: update.from_version.to_string(),
                    to_version: update.to_version.to_string(),
                    error,
                };
                if !from_path.is_file() || !to_path.is_file() {
                    let missing = [&from_path, &to_path]
                        .iter()
                        .filter(|p| !p.is_file())
                        .map(|p| p.display().to_string())
                        .collect::<Vec<_>>()
                        .join(", ");
                    return Row::Missing(describe(format!("missing tarball(s): {missing}")));
                }
                match classify_pair(&from_path, &to_path) {
                    Ok(outcome) => Row::Ok(PairRow {
                        package_name: update.package_name.clone(),
                        from_version: update.from_version.to_string(),
                        to_version: update.to_version.to_string(),
                        increment: update.increment,
                        class: outcome.class,
                        changes: outcome.changes,
                    }),
                    Err(e) => Row::Corrupt(describe(format!("{e:#}"))),
                }
            })
            .collect()
    });

    let mut progress = Progress::new("diff", updates.len());
    let mut writer = NdjsonWriter::create(&args.out)?;
    let mut by_class: std::collections::BTreeMap<&'static str, u64> = Default::default();
    let mut missing = 0u64;
    let mut corrupt = 0u64;
    for row in &rows {
        progress.tick(1);
        match row {
            Row::Ok(pair) => {
                *by_class.entry(pair.class.label()).or_default() += 1;
                writer.write(pair)?;
            }
            Row::Missing(e) => {
                missing += 1;
                eprintln!(
                    "diff: {}@{} -> {}: {}",
                    e.package_name, e.from_version, e.to_version, e.error
                );
            }
            Row::Corrupt(e) => {
                corrupt += 1;
                eprintln!(
                    "diff: {}@{} -> {}: {}",
                    e.package_name, e.from_version, e.to_version, e.error
                );
            }
        }
    }
    progress.finish();
    writer.finish()?;
    tracker.output(&args.out);

    tracker.set_count("pairs", updates.len() as u64);
    tracker.set_count("missingTarballs", missing);
    tracker.set_count("corruptArchives", corrupt);
    for (class, count) in &by_class {
        tracker.set_count(class, *count);
    }
    eprintln!(
        "diff: {} pair(s) classified, {} missing, {} corrupt",
        updates.len() as u64 - missing - corrupt,
        missing,
        corrupt
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome {
        data_errors: missing + corrupt,
    })
}
