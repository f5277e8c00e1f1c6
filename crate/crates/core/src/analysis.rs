//! Corpus statistics: constraint usage over time, technical lag of
//! resolved dependencies, and update-flow classification.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::miner::Update;
use crate::resolver::{resolve_with, ResolveError, ResolveOptions, ResolvedGraph};
use crate::semver::{compare_versions, Constraint, ConstraintCategory, Version};
use crate::store::{Store, VersionRecord};
use crate::time::{format_ts, Timestamp};

// ---------------------------------------------------------------------------
// Constraint usage by year
// ---------------------------------------------------------------------------

/// Percentages of dependency constraints in each category among the
/// representative releases of one calendar year. Sums to 100 when the
/// year has any constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct YearUsageRow {
    pub year: i32,
    pub packages: usize,
    pub constraints: usize,
    pub exact: f64,
    pub bug: f64,
    pub minor: f64,
    pub geq: f64,
    pub any: f64,
    pub other: f64,
}

impl YearUsageRow {
    pub fn percentage(&self, category: ConstraintCategory) -> f64 {
        match category {
            ConstraintCategory::Exact => self.exact,
            ConstraintCategory::Bug => self.bug,
            ConstraintCategory::Minor => self.minor,
            ConstraintCategory::Geq => self.geq,
            ConstraintCategory::Any => self.any,
            ConstraintCategory::Other => self.other,
        }
    }
}

/// Tabulate constraint-category usage per calendar year.
///
/// Each package contributes one representative per year: its most
/// recently published non-prerelease release that year (publish-time
/// ties broken by version order). Years with no releases yield no row.
pub fn constraint_usage_by_year(
    store: &Store,
    years: Option<std::ops::RangeInclusive<i32>>,
) -> Vec<YearUsageRow> {
    let mut counts: BTreeMap<i32, (usize, [usize; 6])> = BTreeMap::new();

    for name in store.package_names() {
        let history = store.history(name).expect("listed package exists");
        let mut representative: BTreeMap<i32, &VersionRecord> = BTreeMap::new();
        for record in &history.records {
            if record.version.is_prerelease() {
                continue;
            }
            let year = record.published_at.year();
            if let Some(range) = &years {
                if !range.contains(&year) {
                    continue;
                }
            }
            let replace = match representative.get(&year) {
                Some(current) => {
                    (record.published_at, &record.version)
                        > (current.published_at, &current.version)
                }
                None => true,
            };
            if replace {
                representative.insert(year, record);
            }
        }
        for (year, record) in representative {
            let entry = counts.entry(year).or_insert((0, [0; 6]));
            entry.0 += 1;
            for constraint in record.dependencies.values() {
                let idx = ConstraintCategory::ALL
                    .iter()
                    .position(|c| *c == constraint.category())
                    .expect("category is total");
                entry.1[idx] += 1;
            }
        }
    }

    counts
        .into_iter()
        .map(|(year, (packages, by_category))| {
            let total: usize = by_category.iter().sum();
            let pct = |i: usize| {
                if total == 0 {
                    0.0
                } else {
                    100.0 * by_category[i] as f64 / total as f64
                }
            };
            YearUsageRow {
                year,
                packages,
                constraints: total,
                exact: pct(0),
                bug: pct(1),
                minor: pct(2),
                geq: pct(3),
                any: pct(4),
                other: pct(5),
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Technical lag
// ---------------------------------------------------------------------------

/// Out-of-date assessment for one resolved dependency.
///
/// With the graph resolved at `T_P`, a dependency resolved to `V_D`
/// published at `T_D` is out of date iff some newer version `V_D'` was
/// published strictly between `T_D` and `T_P`; both inequalities are
/// strict. The out-of-date time spans to the newest such publication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LagEntry {
    pub dependency_name: String,
    pub resolved_version: Version,
    #[serde(with = "crate::time::ts_serde")]
    pub resolved_at: Timestamp,
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_ts_serde"
    )]
    pub newest_eligible_at: Option<Timestamp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_of_date_days: Option<f64>,
}

mod opt_ts_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &Option<Timestamp>, s: S) -> Result<S::Ok, S::Error> {
        match ts {
            Some(t) => s.serialize_some(&format_ts(*t)),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Timestamp>, D::Error> {
        let text: Option<String> = serde::Deserialize::deserialize(d)?;
        match text {
            Some(t) => crate::time::parse_ts(&t)
                .map(Some)
                .map_err(serde::de::Error::custom),
            None => Ok(None),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LagSummary {
    pub dependencies: usize,
    pub out_of_date: usize,
    pub percent_out_of_date: f64,
    /// Mean of `out_of_date_days` over out-of-date entries only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_out_of_date_days: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagReport {
    pub entries: Vec<LagEntry>,
    pub summary: LagSummary,
}

const MILLIS_PER_DAY: f64 = 86_400_000.0;

/// Compute per-dependency technical lag for a resolved graph.
pub fn compute_lag(graph: &ResolvedGraph, store: &Store) -> LagReport {
    let t_p = graph.as_of;
    let mut entries: Vec<LagEntry> = Vec::new();

    for node in &graph.nodes {
        let t_d = node.published_at;
        let newer = store
            .history(&node.name)
            .ok()
            .map(|h| {
                h.records
                    .iter()
                    .filter(|r| !r.version.is_prerelease())
                    .filter(|r| r.published_at > t_d && r.published_at < t_p)
                    .filter(|r| {
                        compare_versions(&node.version, &r.version) == std::cmp::Ordering::Less
                    })
                    .map(|r| r.published_at)
                    .max()
            })
            .unwrap_or(None);

        let out_of_date_days = newer
            .map(|t| (t.timestamp_millis() - t_d.timestamp_millis()) as f64 / MILLIS_PER_DAY);

        entries.push(LagEntry {
            dependency_name: node.name.clone(),
            resolved_version: node.version.clone(),
            resolved_at: t_d,
            newest_eligible_at: newer,
            out_of_date_days,
        });
    }

    entries.sort_by(|a, b| {
        a.dependency_name
            .cmp(&b.dependency_name)
            .then_with(|| compare_versions(&a.resolved_version, &b.resolved_version))
    });

    let out_of_date: Vec<f64> = entries
        .iter()
        .filter_map(|e| e.out_of_date_days)
        .collect();
    let summary = LagSummary {
        dependencies: entries.len(),
        out_of_date: out_of_date.len(),
        percent_out_of_date: if entries.is_empty() {
            0.0
        } else {
            100.0 * out_of_date.len() as f64 / entries.len() as f64
        },
        mean_out_of_date_days: if out_of_date.is_empty() {
            None
        } else {
            Some(out_of_date.iter().sum::<f64>() / out_of_date.len() as f64)
        },
    };

    LagReport { entries, summary }
}

// ---------------------------------------------------------------------------
// Update flows
// ---------------------------------------------------------------------------

/// How an upstream update reached (or failed to reach) a downstream
/// package's resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowCategory {
    /// The first re-resolution after the update already contains it.
    InstantNoIntervention,
    /// Adoption required a new downstream release.
    DelayedWithIntervention,
    /// Adoption arrived without a downstream release, via a publication
    /// on the constraint path.
    DelayedMiddleFix,
    /// The dependency left the downstream graph before adoption.
    DeletedDependency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FlowOutcome {
    pub upstream_update: Update,
    pub downstream_package: String,
    pub category: FlowCategory,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub days_to_unblock: Option<u32>,
}

/// Result of observing one (update, downstream) pair. Runs that neither
/// adopt nor delete within the horizon are censored, which is an
/// observation limit rather than a flow category.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum FlowClassification {
    Classified(FlowOutcome),
    Censored {
        upstream_update: Update,
        downstream_package: String,
        horizon_days: u32,
    },
}

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("precondition violated for {downstream:?}: {reason}")]
    PreconditionViolated { downstream: String, reason: String },
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

#[derive(Debug, Clone)]
pub struct FlowOptions {
    pub horizon_days: u32,
    /// Observe the downstream version that was latest at the update
    /// instant for the whole run instead of tracking new releases.
    pub frozen_downstream: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            horizon_days: 90,
            frozen_downstream: false,
        }
    }
}

/// A resolution driver: how downstream manifests get resolved at an
/// instant. The flat resolver implements it; a proxy-backed real client
/// could implement the same interface.
pub trait ResolveDriver {
    fn resolve_graph(
        &self,
        root_name: &str,
        root_deps: &BTreeMap<String, Constraint>,
        as_of: Timestamp,
    ) -> Result<ResolvedGraph, ResolveError>;
}

/// Driver backed by the in-process flat resolver.
pub struct FlatDriver<'a> {
    pub store: &'a Store,
}

impl ResolveDriver for FlatDriver<'_> {
    fn resolve_graph(
        &self,
        root_name: &str,
        root_deps: &BTreeMap<String, Constraint>,
        as_of: Timestamp,
    ) -> Result<ResolvedGraph, ResolveError> {
        resolve_with(
            root_deps,
            as_of,
            self.store,
            &ResolveOptions {
                root_name: Some(root_name.to_string()),
            },
        )
    }
}

fn latest_release_at(store: &Store, name: &str, t: Timestamp) -> Option<VersionRecord> {
    store.history_as_of(name, t).ok().and_then(|h| {
        h.records
            .iter()
            .filter(|r| !r.version.is_prerelease())
            .max_by(|a, b| compare_versions(&a.version, &b.version))
            .cloned()
    })
}

fn published_in_window(store: &Store, name: &str, after: Timestamp, upto: Timestamp) -> bool {
    store
        .history(name)
        .map(|h| {
            h.records
                .iter()
                .filter(|r| !r.version.is_prerelease())
                .any(|r| r.published_at > after && r.published_at <= upto)
        })
        .unwrap_or(false)
}

fn adopted(graph: &ResolvedGraph, update: &Update) -> bool {
    graph.versions_of(&update.package_name).iter().any(|v| {
        compare_versions(v, &update.to_version) != std::cmp::Ordering::Less
    })
}

/// Observe how `update` flows into `downstream`.
///
/// The downstream package must have resolved to the update's source
/// version immediately before the update was published. Resolution is
/// then re-run at the update instant and in one-day steps from it until
/// the update is adopted, the dependency disappears, or the horizon runs
/// out.
pub fn classify_flow(
    update: &Update,
    downstream: &str,
    store: &Store,
    driver: &dyn ResolveDriver,
    options: &FlowOptions,
) -> Result<FlowClassification, FlowError> {
    let just_before = update.to_at - Duration::milliseconds(1);

    let before_record = latest_release_at(store, downstream, just_before).ok_or_else(|| {
        FlowError::PreconditionViolated {
            downstream: downstream.to_string(),
            reason: "no downstream release published before the update".into(),
        }
    })?;
    let before_graph = driver
        .resolve_graph(downstream, &before_record.dependencies, just_before)
        .map_err(|e| FlowError::PreconditionViolated {
            downstream: downstream.to_string(),
            reason: format!("downstream did not resolve before the update: {e}"),
        })?;
    if before_graph
        .node(&update.package_name, &update.from_version)
        .is_none()
    {
        return Err(FlowError::PreconditionViolated {
            downstream: downstream.to_string(),
            reason: format!(
                "downstream was not up to date: expected {}@{} in the pre-update graph",
                update.package_name, update.from_version
            ),
        });
    }

    for day in 0..=options.horizon_days {
        let at = update.to_at + Duration::days(i64::from(day));
        let manifest = if options.frozen_downstream {
            before_record.clone()
        } else {
            match latest_release_at(store, downstream, at) {
                Some(r) => r,
                None => before_record.clone(),
            }
        };
        let graph = match driver.resolve_graph(downstream, &manifest.dependencies, at) {
            Ok(g) => g,
            // A transiently unsatisfiable day is observed as "not yet
            // adopted" rather than aborting the run.
            Err(_) => continue,
        };

        if !graph.contains_package(&update.package_name) {
            return Ok(FlowClassification::Classified(FlowOutcome {
                upstream_update: update.clone(),
                downstream_package: downstream.to_string(),
                category: FlowCategory::DeletedDependency,
                days_to_unblock: Some(day),
            }));
        }

        if adopted(&graph, update) {
            if day == 0 {
                return Ok(FlowClassification::Classified(FlowOutcome {
                    upstream_update: update.clone(),
                    downstream_package: downstream.to_string(),
                    category: FlowCategory::InstantNoIntervention,
                    days_to_unblock: None,
                }));
            }
            // Publication events are the only observable intervention
            // signal: late adoption without a downstream release means a
            // package on the constraint path unblocked it.
            let downstream_intervened = published_in_window(store, downstream, update.to_at, at);
            let category = if downstream_intervened {
                FlowCategory::DelayedWithIntervention
            } else {
                FlowCategory::DelayedMiddleFix
            };
            return Ok(FlowClassification::Classified(FlowOutcome {
                upstream_update: update.clone(),
                downstream_package: downstream.to_string(),
                category,
                days_to_unblock: Some(day),
            }));
        }
    }

    Ok(FlowClassification::Censored {
        upstream_update: update.clone(),
        downstream_package: downstream.to_string(),
        horizon_days: options.horizon_days,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::{SecurityEffect, UpdateKind};
    use crate::semver::{increment_type, parse_constraint, parse_version};
    use crate::store::Store;
    use crate::time::parse_ts;
    use serde_json::json;
    use tempfile::TempDir;

    fn t(s: &str) -> Timestamp {
        parse_ts(s).unwrap()
    }

    #[allow(clippy::type_complexity)]
    fn packument(name: &str, versions: &[(&str, &str, &[(&str, &str)])]) -> serde_json::Value {
        let mut vmap = serde_json::Map::new();
        let mut tmap = serde_json::Map::new();
        for (ver, at, deps) in versions {
            let dep_obj: serde_json::Map<String, serde_json::Value> =
                deps.iter().map(|(d, c)| (d.to_string(), json!(c))).collect();
            vmap.insert(
                ver.to_string(),
                json!({"name": name, "version": ver, "dependencies": dep_obj}),
            );
            tmap.insert(ver.to_string(), json!(at));
        }
        json!({"name": name, "versions": vmap, "time": tmap})
    }

    fn store_with(dir: &TempDir, docs: Vec<serde_json::Value>) -> Store {
        let mut store = Store::open(dir.path()).unwrap();
        let report = store.ingest_changes(docs).unwrap();
        assert_eq!(report.data_errors(), 0);
        store
    }

    fn update(pkg: &str, from: (&str, &str), to: (&str, &str)) -> Update {
        let from_v = parse_version(from.0).unwrap();
        let to_v = parse_version(to.0).unwrap();
        Update {
            package_name: pkg.to_string(),
            increment: increment_type(&from_v, &to_v).unwrap(),
            from_version: from_v,
            to_version: to_v,
            from_at: t(from.1),
            to_at: t(to.1),
            security_effect: SecurityEffect::None,
            kind: UpdateKind::IntraGroup,
        }
    }

    mod usage {
        use super::*;

        #[test]
        fn splits_categories_within_a_year() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![packument(
                    "p",
                    &[("1.0.0", "2020-05-01T00:00:00Z", &[("a", "^1.0.0"), ("b", "=2.0.0")])],
                )],
            );
            let rows = constraint_usage_by_year(&store, None);
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].year, 2020);
            assert_eq!(rows[0].minor, 50.0);
            assert_eq!(rows[0].exact, 50.0);
            assert_eq!(rows[0].constraints, 2);
        }

        #[test]
        fn only_latest_release_of_the_year_counts() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![packument(
                    "p",
                    &[
                        ("1.0.0", "2021-01-01T00:00:00Z", &[("a", "=1.0.0")]),
                        ("1.1.0", "2021-06-01T00:00:00Z", &[("a", "=1.0.0")]),
                        ("1.2.0", "2021-12-01T00:00:00Z", &[("a", "^2.0.0")]),
                    ],
                )],
            );
            let rows = constraint_usage_by_year(&store, None);
            assert_eq!(rows.len(), 1);
            assert_eq!(rows[0].minor, 100.0);
            assert_eq!(rows[0].exact, 0.0);
        }

        #[test]
        fn empty_years_are_absent_and_ranges_filter() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![packument(
                    "p",
                    &[
                        ("1.0.0", "2019-01-01T00:00:00Z", &[("a", "*")]),
                        ("2.0.0", "2021-01-01T00:00:00Z", &[("a", "*")]),
                    ],
                )],
            );
            let rows = constraint_usage_by_year(&store, None);
            assert_eq!(rows.iter().map(|r| r.year).collect::<Vec<_>>(), vec![2019, 2021]);
            let filtered = constraint_usage_by_year(&store, Some(2021..=2021));
            assert_eq!(filtered.len(), 1);
            assert_eq!(filtered[0].year, 2021);
        }

        #[test]
        fn prerelease_only_years_are_absent() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![packument("p", &[("1.0.0-rc.1", "2020-01-01T00:00:00Z", &[("a", "*")])])],
            );
            assert!(constraint_usage_by_year(&store, None).is_empty());
        }
    }

    mod lag {
        use super::*;
        use crate::resolver::resolve;
        use std::collections::BTreeMap;

        #[test]
        fn ten_day_scenario() {
            // dep resolved at day 0; newer version at day 10; T_P at day 30.
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        &[("1.0.0", "2020-01-31T00:00:00Z", &[("dep", "=1.0.0")])],
                    ),
                    packument(
                        "dep",
                        &[
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("1.0.1", "2020-01-11T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let root: BTreeMap<String, Constraint> =
                [("dep".to_string(), parse_constraint("=1.0.0"))].into();
            let graph = resolve(&root, t("2020-01-31T00:00:00Z"), &store).unwrap();
            let report = compute_lag(&graph, &store);
            assert_eq!(report.entries.len(), 1);
            assert_eq!(report.entries[0].out_of_date_days, Some(10.0));
            assert_eq!(
                report.entries[0].newest_eligible_at,
                Some(t("2020-01-11T00:00:00Z"))
            );
            assert_eq!(report.summary.out_of_date, 1);
            assert_eq!(report.summary.mean_out_of_date_days, Some(10.0));
        }

        #[test]
        fn newest_version_is_not_out_of_date() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![packument("dep", &[("1.0.0", "2020-01-01T00:00:00Z", &[])])],
            );
            let root: BTreeMap<String, Constraint> =
                [("dep".to_string(), parse_constraint("^1.0.0"))].into();
            let graph = resolve(&root, t("2020-06-01T00:00:00Z"), &store).unwrap();
            let report = compute_lag(&graph, &store);
            assert_eq!(report.entries[0].out_of_date_days, None);
            assert_eq!(report.summary.percent_out_of_date, 0.0);
            assert_eq!(report.summary.mean_out_of_date_days, None);
        }

        #[test]
        fn versions_at_or_after_tp_do_not_count() {
            let dir = TempDir::new().unwrap();
            let t_p = "2020-02-01T00:00:00Z";
            let store = store_with(
                &dir,
                vec![packument(
                    "dep",
                    &[
                        ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                        // Published exactly at T_P: excluded by the strict bound.
                        ("1.0.1", t_p, &[]),
                        ("1.0.2", "2020-03-01T00:00:00Z", &[]),
                    ],
                )],
            );
            let root: BTreeMap<String, Constraint> =
                [("dep".to_string(), parse_constraint("=1.0.0"))].into();
            let graph = resolve(&root, t(t_p), &store).unwrap();
            let report = compute_lag(&graph, &store);
            assert_eq!(report.entries[0].out_of_date_days, None);
        }

        #[test]
        fn publication_at_td_does_not_count() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![packument(
                    "dep",
                    &[
                        ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                        ("1.0.1", "2020-01-01T00:00:00Z", &[]),
                    ],
                )],
            );
            let root: BTreeMap<String, Constraint> =
                [("dep".to_string(), parse_constraint("=1.0.0"))].into();
            let graph = resolve(&root, t("2020-06-01T00:00:00Z"), &store).unwrap();
            let report = compute_lag(&graph, &store);
            // 1.0.1 was published at the same instant as 1.0.0 (T_D' > T_D fails).
            assert_eq!(report.entries[0].out_of_date_days, None);
        }
    }

    mod flow {
        use super::*;

        fn run(
            store: &Store,
            update: &Update,
            downstream: &str,
            horizon: u32,
        ) -> FlowClassification {
            let driver = FlatDriver { store };
            classify_flow(
                update,
                downstream,
                store,
                &driver,
                &FlowOptions {
                    horizon_days: horizon,
                    frozen_downstream: false,
                },
            )
            .unwrap()
        }

        #[test]
        fn instant_flow_through_flexible_constraint() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        &[("1.0.0", "2020-01-05T00:00:00Z", &[("dep", "^1.0.0")])],
                    ),
                    packument(
                        "dep",
                        &[
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("1.0.1", "2020-02-01T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let u = update("dep", ("1.0.0", "2020-01-01T00:00:00Z"), ("1.0.1", "2020-02-01T00:00:00Z"));
            match run(&store, &u, "down", 30) {
                FlowClassification::Classified(o) => {
                    assert_eq!(o.category, FlowCategory::InstantNoIntervention);
                    assert_eq!(o.days_to_unblock, None);
                }
                other => panic!("unexpected {other:?}"),
            }
        }

        #[test]
        fn delayed_with_downstream_intervention() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        &[
                            ("1.0.0", "2020-01-05T00:00:00Z", &[("dep", "=1.0.0")]),
                            // Three days after the update, downstream re-pins.
                            ("1.0.1", "2020-02-04T00:00:00Z", &[("dep", "=1.0.1")]),
                        ],
                    ),
                    packument(
                        "dep",
                        &[
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("1.0.1", "2020-02-01T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let u = update("dep", ("1.0.0", "2020-01-01T00:00:00Z"), ("1.0.1", "2020-02-01T00:00:00Z"));
            match run(&store, &u, "down", 30) {
                FlowClassification::Classified(o) => {
                    assert_eq!(o.category, FlowCategory::DelayedWithIntervention);
                    assert_eq!(o.days_to_unblock, Some(3));
                }
                other => panic!("unexpected {other:?}"),
            }
        }

        #[test]
        fn delayed_middle_fix() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        &[("1.0.0", "2020-01-05T00:00:00Z", &[("mid", "^1.0.0")])],
                    ),
                    packument(
                        "mid",
                        &[
                            ("1.0.0", "2020-01-02T00:00:00Z", &[("dep", "=1.0.0")]),
                            // One day after dep 2.0.0, mid widens its pin.
                            ("1.1.0", "2020-02-02T00:00:00Z", &[("dep", "^2.0.0")]),
                        ],
                    ),
                    packument(
                        "dep",
                        &[
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("2.0.0", "2020-02-01T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let u = update("dep", ("1.0.0", "2020-01-01T00:00:00Z"), ("2.0.0", "2020-02-01T00:00:00Z"));
            match run(&store, &u, "down", 30) {
                FlowClassification::Classified(o) => {
                    assert_eq!(o.category, FlowCategory::DelayedMiddleFix);
                    assert_eq!(o.days_to_unblock, Some(1));
                }
                other => panic!("unexpected {other:?}"),
            }

            // The unblocking publication sits on the constraint path.
            let driver = FlatDriver { store: &store };
            let graph = driver
                .resolve_graph(
                    "down",
                    &[("mid".to_string(), parse_constraint("^1.0.0"))].into(),
                    t("2020-02-02T00:00:00Z"),
                )
                .unwrap();
            let path = graph.path_packages_to("dep");
            assert!(path.contains("mid"));
        }

        #[test]
        fn deleted_dependency() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        &[
                            ("1.0.0", "2020-01-05T00:00:00Z", &[("dep", "=1.0.0")]),
                            // Two days after the update the dependency is gone.
                            ("2.0.0", "2020-02-03T00:00:00Z", &[]),
                        ],
                    ),
                    packument(
                        "dep",
                        &[
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("1.1.0", "2020-02-01T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let u = update("dep", ("1.0.0", "2020-01-01T00:00:00Z"), ("1.1.0", "2020-02-01T00:00:00Z"));
            match run(&store, &u, "down", 30) {
                FlowClassification::Classified(o) => {
                    assert_eq!(o.category, FlowCategory::DeletedDependency);
                    assert_eq!(o.days_to_unblock, Some(2));
                }
                other => panic!("unexpected {other:?}"),
            }
        }

        #[test]
        fn censored_when_never_adopted() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        &[("1.0.0", "2020-01-05T00:00:00Z", &[("dep", "=1.0.0")])],
                    ),
                    packument(
                        "dep",
                        &[
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("1.1.0", "2020-02-01T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let u = update("dep", ("1.0.0", "2020-01-01T00:00:00Z"), ("1.1.0", "2020-02-01T00:00:00Z"));
            match run(&store, &u, "down", 5) {
                FlowClassification::Censored { horizon_days, .. } => assert_eq!(horizon_days, 5),
                other => panic!("unexpected {other:?}"),
            }
        }

        #[test]
        fn precondition_violated_when_not_up_to_date() {
            let dir = TempDir::new().unwrap();
            let store = store_with(
                &dir,
                vec![
                    packument(
                        "down",
                        // Pinned to an older version than the update's source.
                        &[("1.0.0", "2020-01-05T00:00:00Z", &[("dep", "=0.9.0")])],
                    ),
                    packument(
                        "dep",
                        &[
                            ("0.9.0", "2019-12-01T00:00:00Z", &[]),
                            ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                            ("1.0.1", "2020-02-01T00:00:00Z", &[]),
                        ],
                    ),
                ],
            );
            let u = update("dep", ("1.0.0", "2020-01-01T00:00:00Z"), ("1.0.1", "2020-02-01T00:00:00Z"));
            let driver = FlatDriver { store: &store };
            let err = classify_flow(&u, "down", &store, &driver, &FlowOptions::default()).unwrap_err();
            assert!(matches!(err, FlowError::PreconditionViolated { .. }));
        }
    }
}
