//! `retrograde report`: CSV tables and SVG plots from analysis outputs.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;
use serde_json::Value;

use retrograde_core::analysis::YearUsageRow;
use retrograde_core::diff::{content_distribution, ChangeClass};
use retrograde_core::miner::{update_type_distribution, MiningReport, SecurityEffect, Update};
use retrograde_core::report::{bar_svg, ecdf, ecdf_svg, stacked_bar_svg, Bar, EcdfPoint, StackedColumn};
use retrograde_core::semver::IncrementType;

use crate::io::{csv_float, read_ndjson, write_csv};
use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome};

#[derive(Args, Serialize, Clone)]
pub struct ReportArgs {
    /// Directory for the emitted tables and plots.
    #[arg(long, default_value = "reports")]
    pub out_dir: PathBuf,
    /// Year table from `classify-constraints`.
    #[arg(long)]
    pub usage: Option<PathBuf>,
    /// Mined updates from `mine`.
    #[arg(long)]
    pub updates: Option<PathBuf>,
    /// Lag entries from `lag`.
    #[arg(long)]
    pub lag: Option<PathBuf>,
    /// Lag summaries (one JSON object per run) for the percent table.
    #[arg(long)]
    pub lag_summaries: Option<PathBuf>,
    /// Flow outcomes from `flow`.
    #[arg(long)]
    pub flows: Option<PathBuf>,
    /// Classified tarball diffs from `diff`.
    #[arg(long)]
    pub diffs: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

fn write_ecdf_pair(
    dir: &Path,
    stem: &str,
    title: &str,
    x_label: &str,
    points: &[EcdfPoint],
    tracker: &mut RunTracker,
) -> Result<()> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let rows: Vec<Vec<String>> = points
        .iter()
        .map(|p| vec![csv_float(p.value), csv_float(p.fraction)])
        .collect();
    write_csv(&csv_path, &["value", "cumulativeFraction"], &rows)?;
    tracker.output(&csv_path);
    tracker.count("tablesWritten", 1);

    let svg_path = dir.join(format!("{stem}.svg"));
    std::fs::write(&svg_path, ecdf_svg(title, x_label, points))?;
    tracker.output(&svg_path);
    tracker.count("plotsWritten", 1);
    Ok(())
}

pub fn run(args: ReportArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("report", &args)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("create {}", args.out_dir.display()))?;
    let dir = args.out_dir.clone();

    if let Some(usage_path) = &args.usage {
        tracker.input(usage_path);
        let rows: Vec<YearUsageRow> = read_ndjson(usage_path)?;
        let csv_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    r.year.to_string(),
                    r.packages.to_string(),
                    r.constraints.to_string(),
                    csv_float(r.exact),
                    csv_float(r.bug),
                    csv_float(r.minor),
                    csv_float(r.geq),
                    csv_float(r.any),
                    csv_float(r.other),
                ]
            })
            .collect();
        let csv_path = dir.join("constraints_over_time.csv");
        write_csv(
            &csv_path,
            &["year", "packages", "constraints", "exact", "bug", "minor", "geq", "any", "other"],
            &csv_rows,
        )?;
        tracker.output(&csv_path);
        tracker.count("tablesWritten", 1);

        let columns: Vec<StackedColumn> = rows
            .iter()
            .map(|r| StackedColumn {
                label: r.year.to_string(),
                values: vec![r.exact, r.bug, r.minor, r.geq, r.any, r.other],
            })
            .collect();
        let svg_path = dir.join("constraints_over_time.svg");
        std::fs::write(
            &svg_path,
            stacked_bar_svg(
                "constraint categories per year",
                &["exact", "bug", "minor", "geq", "any", "other"],
                &columns,
            ),
        )?;
        tracker.output(&svg_path);
        tracker.count("plotsWritten", 1);
    }

    if let Some(updates_path) = &args.updates {
        tracker.input(updates_path);
        let updates: Vec<Update> = read_ndjson(updates_path)?;
        let report = MiningReport {
            updates,
            rejected: false,
            rejection_reason: None,
        };
        let reports = [report];
        let mut csv_rows = Vec::new();
        for segment in [
            SecurityEffect::None,
            SecurityEffect::IntroducesVuln,
            SecurityEffect::PatchesVuln,
        ] {
            for row in update_type_distribution(&reports, segment) {
                csv_rows.push(vec![
                    row.package_name.clone(),
                    segment.label().to_string(),
                    csv_float(row.bug),
                    csv_float(row.minor),
                    csv_float(row.major),
                    row.updates.to_string(),
                ]);
            }
        }
        let csv_path = dir.join("update_type_distribution.csv");
        write_csv(
            &csv_path,
            &["package", "segment", "bug", "minor", "major", "updates"],
            &csv_rows,
        )?;
        tracker.output(&csv_path);
        tracker.count("tablesWritten", 1);
    }

    if let Some(lag_path) = &args.lag {
        tracker.input(lag_path);
        let entries: Vec<Value> = read_ndjson(lag_path)?;
        let days: Vec<f64> = entries
            .iter()
            .filter_map(|e| e.get("outOfDateDays").and_then(Value::as_f64))
            .collect();
        write_ecdf_pair(
            &dir,
            "oldness_days_ecdf",
            "out-of-date time per dependency",
            "days out of date",
            &ecdf(&days),
            &mut tracker,
        )?;
    }

    if let Some(summaries_path) = &args.lag_summaries {
        tracker.input(summaries_path);
        let summaries: Vec<Value> = read_ndjson(summaries_path)?;
        let percents: Vec<f64> = summaries
            .iter()
            .filter_map(|s| s.get("percentOutOfDate").and_then(Value::as_f64))
            .collect();
        write_ecdf_pair(
            &dir,
            "oldness_percent_ecdf",
            "out-of-date dependencies per run",
            "percent of dependencies out of date",
            &ecdf(&percents),
            &mut tracker,
        )?;
    }

    if let Some(flows_path) = &args.flows {
        tracker.input(flows_path);
        let rows: Vec<Value> = read_ndjson(flows_path)?;
        let mut counts: std::collections::BTreeMap<String, u64> = Default::default();
        let mut unblock_days: Vec<f64> = Vec::new();
        for row in &rows {
            let result = row.get("result").and_then(Value::as_str).unwrap_or("unknown");
            let key = match result {
                "classified" => row
                    .get("category")
                    .and_then(Value::as_str)
                    .unwrap_or("unknown")
                    .to_string(),
                other => other.to_string(),
            };
            *counts.entry(key).or_default() += 1;
            if let Some(days) = row.get("daysToUnblock").and_then(Value::as_u64) {
                unblock_days.push(days as f64);
            }
        }
        // Percentages are over analyzed runs; precondition-violated pairs
        // never entered observation and only get a count.
        let analyzed: u64 = counts
            .iter()
            .filter(|(k, _)| k.as_str() != "precondition-violated")
            .map(|(_, n)| n)
            .sum();
        let csv_rows: Vec<Vec<String>> = counts
            .iter()
            .map(|(category, count)| {
                let percent = if category == "precondition-violated" {
                    String::new()
                } else {
                    csv_float(100.0 * *count as f64 / analyzed.max(1) as f64)
                };
                vec![category.clone(), count.to_string(), percent]
            })
            .collect();
        let csv_path = dir.join("flow_categories.csv");
        write_csv(&csv_path, &["category", "flows", "percentOfAnalyzed"], &csv_rows)?;
        tracker.output(&csv_path);
        tracker.count("tablesWritten", 1);

        let bars: Vec<Bar> = counts
            .iter()
            .filter(|(k, _)| k.as_str() != "precondition-violated")
            .map(|(category, count)| Bar {
                label: category.clone(),
                value: *count as f64,
            })
            .collect();
        let svg_path = dir.join("flow_categories.svg");
        std::fs::write(&svg_path, bar_svg("update flow categories", "flows", &bars))?;
        tracker.output(&svg_path);
        tracker.count("plotsWritten", 1);

        write_ecdf_pair(
            &dir,
            "delayed_update_days_ecdf",
            "time to unblock delayed flows",
            "days to unblock",
            &ecdf(&unblock_days),
            &mut tracker,
        )?;
    }

    if let Some(diffs_path) = &args.diffs {
        tracker.input(diffs_path);
        let rows: Vec<Value> = read_ndjson(diffs_path)?;
        let mut classified: Vec<(String, IncrementType, ChangeClass)> = Vec::new();
        for row in &rows {
            let package = row.get("packageName").and_then(Value::as_str);
            let increment = row
                .get("increment")
                .and_then(|v| serde_json::from_value::<IncrementType>(v.clone()).ok());
            let class = row
                .get("class")
                .and_then(|v| serde_json::from_value::<ChangeClass>(v.clone()).ok());
            if let (Some(package), Some(increment), Some(class)) = (package, increment, class) {
                classified.push((package.to_string(), increment, class));
            }
        }
        let csv_rows: Vec<Vec<String>> = content_distribution(&classified)
            .iter()
            .map(|row| {
                vec![
                    row.package_name.clone(),
                    row.increment.label().to_string(),
                    csv_float(row.code_only),
                    csv_float(row.deps_only),
                    csv_float(row.both),
                    csv_float(row.neither),
                    row.updates.to_string(),
                ]
            })
            .collect();
        let csv_path = dir.join("update_contents.csv");
        write_csv(
            &csv_path,
            &["package", "increment", "codeOnly", "depsOnly", "both", "neither", "updates"],
            &csv_rows,
        )?;
        tracker.output(&csv_path);
        tracker.count("tablesWritten", 1);
    }

    let tables = *tracker.counters().get("tablesWritten").unwrap_or(&0);
    let plots = *tracker.counters().get("plotsWritten").unwrap_or(&0);
    eprintln!("report: {tables} table(s), {plots} plot(s) in {}", dir.display());
    tracker.write(args.manifest.run_manifest.as_deref())?;
    Ok(Outcome::clean())
}
