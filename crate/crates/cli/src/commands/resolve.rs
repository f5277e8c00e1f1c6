//! `retrograde resolve`: time-filtered flat resolution of a manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use retrograde_core::resolver::{graph_lines, lock_summary, resolve_with, ResolveOptions, ResolvedGraph};
use retrograde_core::semver::Constraint;
use retrograde_core::store::Store;
use retrograde_core::time::parse_ts;

use crate::io::NdjsonWriter;
use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct ResolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    /// Manifest file with `dependencies` (package.json shape).
    #[arg(long)]
    pub manifest_file: PathBuf,
    /// Resolution instant (RFC3339 or unix milliseconds).
    #[arg(long)]
    pub as_of: String,
    /// Also resolve the manifest's devDependencies.
    #[arg(long, default_value_t = false)]
    pub include_dev: bool,
    /// Graph output: node and edge records, one per line.
    #[arg(long, default_value = "graph.ndjson")]
    pub out: PathBuf,
    /// Lockfile-like summary document.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

/// Read root dependencies from a package.json-shaped manifest.
pub fn manifest_dependencies(path: &Path, include_dev: bool) -> Result<(String, BTreeMap<String, Constraint>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("open {}", path.display()))?;
    let doc: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("{}: malformed JSON", path.display()))?;
    let name = doc
        .get("name")
        .and_then(|n| n.as_str())
        .unwrap_or("root")
        .to_string();
    let mut deps = BTreeMap::new();
    let mut add_field = |field: &str| {
        if let Some(obj) = doc.get(field).and_then(|d| d.as_object()) {
            for (dep, value) in obj {
                let raw = value.as_str().map(String::from).unwrap_or_else(|| value.to_string());
                deps.insert(dep.clone(), raw.parse().expect("constraint parse is total"));
            }
        }
    };
    add_field("dependencies");
    if include_dev {
        add_field("devDependencies");
    }
    Ok((name, deps))
}

pub fn resolve_manifest(
    store: &Store,
    path: &Path,
    as_of: &str,
    include_dev: bool,
) -> Result<ResolvedGraph> {
    let (name, deps) = manifest_dependencies(path, include_dev)?;
    let as_of = parse_ts(as_of).map_err(|e| anyhow::anyhow!("--as-of: {e}"))?;
    let graph = resolve_with(
        &deps,
        as_of,
        store,
        &ResolveOptions {
            root_name: Some(name),
        },
    )?;
    Ok(graph)
}

pub fn run(args: ResolveArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("resolve", &args)?;
    let store = Store::open(&args.store.store).context("open store")?;
    tracker.input(&args.store.store);
    tracker.input(&args.manifest_file);

    let graph = resolve_manifest(&store, &args.manifest_file, &args.as_of, args.include_dev)?;

    let mut writer = NdjsonWriter::create(&args.out)?;
    for line in graph_lines(&graph) {
        writer.write(&line)?;
    }
    writer.finish()?;
    tracker.output(&args.out);

    if let Some(summary_path) = &args.summary {
        let summary = lock_summary(&graph, &store);
        std::fs::write(summary_path, serde_json::to_vec_pretty(&summary)?)
            .with_context(|| format!("write {}", summary_path.display()))?;
        tracker.output(summary_path);
    }

    tracker.set_count("nodes", graph.nodes.len() as u64);
    tracker.set_count("edges", graph.edges.len() as u64);
    eprintln!(
        "resolve: {} node(s), {} edge(s) as of {}",
        graph.nodes.len(),
        graph.edges.len(),
        args.as_of
    );
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome::clean())
}
