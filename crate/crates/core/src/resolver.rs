//! Deterministic time-filtered flat dependency resolution.
//!
//! This resolver deliberately does not imitate a real npm client: every
//! dependency edge independently selects the highest non-prerelease
//! version satisfying its constraint among versions published no later
//! than the resolution instant, with no cross-edge unification or
//! hoisting. Graphs are tagged `resolverKind = "flat-approx"` to make the
//! approximation explicit; experiments that need full fidelity should
//! drive a real client through the proxy instead.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::semver::{compare_versions, Constraint, Version};
use crate::store::Store;
use crate::time::{format_ts, Timestamp};

pub const RESOLVER_KIND: &str = "flat-approx";

/// A resolved node: one selected version of one package.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphNode {
    pub name: String,
    pub version: Version,
    #[serde(with = "crate::time::ts_serde")]
    pub published_at: Timestamp,
}

/// A constraint edge from a resolved node (or the root manifest) to the
/// node selected for it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphEdge {
    /// `None` for edges leaving the root manifest.
    pub from: Option<NodeRef>,
    pub dependency_name: String,
    pub constraint: Constraint,
    pub to: NodeRef,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NodeRef {
    pub name: String,
    pub version: Version,
}

/// A time-stamped flat resolution of a root manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedGraph {
    #[serde(with = "crate::time::ts_serde")]
    pub as_of: Timestamp,
    pub resolver_kind: String,
    pub root: String,
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

impl ResolvedGraph {
    pub fn node(&self, name: &str, version: &Version) -> Option<&GraphNode> {
        self.nodes
            .iter()
            .find(|n| n.name == name && &n.version == version)
    }

    pub fn versions_of(&self, name: &str) -> Vec<&Version> {
        self.nodes
            .iter()
            .filter(|n| n.name == name)
            .map(|n| &n.version)
            .collect()
    }

    pub fn contains_package(&self, name: &str) -> bool {
        self.nodes.iter().any(|n| n.name == name)
    }

    /// Package names on some constraint path from the root to any node of
    /// `target`: the ancestors of `target` in the edge relation.
    pub fn path_packages_to(&self, target: &str) -> BTreeSet<String> {
        let mut reaches: BTreeSet<NodeRef> = self
            .nodes
            .iter()
            .filter(|n| n.name == target)
            .map(|n| NodeRef {
                name: n.name.clone(),
                version: n.version.clone(),
            })
            .collect();
        loop {
            let mut grew = false;
            for edge in &self.edges {
                if reaches.contains(&edge.to) {
                    if let Some(from) = &edge.from {
                        if reaches.insert(from.clone()) {
                            grew = true;
                        }
                    }
                }
            }
            if !grew {
                break;
            }
        }
        reaches.into_iter().map(|r| r.name).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsatisfiableReason {
    /// No version published by the resolution instant satisfies the
    /// constraint.
    NoSatisfyingVersion,
    /// The constraint is not version-range syntax (URL, tag, alias, ...).
    UnsupportedConstraintSyntax,
}

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("unknown package {0:?}")]
    UnknownPackage(String),
    #[error(
        "unsatisfiable dependency {name:?} {constraint:?} as of {}: {reason:?} (available: {})",
        format_ts(*.as_of),
        available.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
    )]
    UnsatisfiableDependency {
        name: String,
        constraint: String,
        as_of: Timestamp,
        reason: UnsatisfiableReason,
        available: Vec<Version>,
    },
    #[error(transparent)]
    Store(#[from] crate::store::StoreError),
}

/// Options for [`resolve`]. Dev dependencies are only ever considered at
/// the root, and only when asked for.
#[derive(Debug, Clone, Default)]
pub struct ResolveOptions {
    pub root_name: Option<String>,
}

/// Resolve `root_deps` against the store state as of `as_of`.
///
/// Breadth-first over dependency edges; each edge independently selects
/// the highest satisfying non-prerelease version published by `as_of`.
/// Already-resolved (name, version) nodes are revisited without
/// re-expansion, which closes dependency cycles.
pub fn resolve(
    root_deps: &BTreeMap<String, Constraint>,
    as_of: Timestamp,
    store: &Store,
) -> Result<ResolvedGraph, ResolveError> {
    resolve_with(root_deps, as_of, store, &ResolveOptions::default())
}

pub fn resolve_with(
    root_deps: &BTreeMap<String, Constraint>,
    as_of: Timestamp,
    store: &Store,
    options: &ResolveOptions,
) -> Result<ResolvedGraph, ResolveError> {
    let mut nodes: BTreeMap<NodeRef, Timestamp> = BTreeMap::new();
    let mut edges: BTreeSet<GraphEdge> = BTreeSet::new();
    let mut queue: VecDeque<(Option<NodeRef>, String, Constraint)> = root_deps
        .iter()
        .map(|(name, c)| (None, name.clone(), c.clone()))
        .collect();

    while let Some((from, dep_name, constraint)) = queue.pop_front() {
        let selected = select_version(store, &dep_name, &constraint, as_of)?;
        let node_ref = NodeRef {
            name: dep_name.clone(),
            version: selected.version.clone(),
        };
        let edge = GraphEdge {
            from,
            dependency_name: dep_name,
            constraint,
            to: node_ref.clone(),
        };
        edges.insert(edge);

        if nodes.contains_key(&node_ref) {
            continue;
        }
        nodes.insert(node_ref.clone(), selected.published_at);

        for (child, child_constraint) in &selected.dependencies {
            queue.push_back((Some(node_ref.clone()), child.clone(), child_constraint.clone()));
        }
    }

    let mut node_list: Vec<GraphNode> = nodes
        .into_iter()
        .map(|(r, published_at)| GraphNode {
            name: r.name,
            version: r.version,
            published_at,
        })
        .collect();
    node_list.sort();
    let edge_list: Vec<GraphEdge> = edges.into_iter().collect();

    Ok(ResolvedGraph {
        as_of,
        resolver_kind: RESOLVER_KIND.to_string(),
        root: options.root_name.clone().unwrap_or_else(|| "root".to_string()),
        nodes: node_list,
        edges: edge_list,
    })
}

struct Selected {
    version: Version,
    published_at: Timestamp,
    dependencies: BTreeMap<String, Constraint>,
}

fn select_version(
    store: &Store,
    name: &str,
    constraint: &Constraint,
    as_of: Timestamp,
) -> Result<Selected, ResolveError> {
    let history = match store.history_as_of(name, as_of) {
        Ok(h) => h,
        Err(crate::store::StoreError::UnknownPackage(p)) => {
            return Err(ResolveError::UnknownPackage(p))
        }
        Err(e) => return Err(e.into()),
    };

    let available: Vec<&crate::store::VersionRecord> = history
        .records
        .iter()
        .filter(|r| !r.version.is_prerelease())
        .collect();

    if !constraint.is_interval_syntax() {
        return Err(ResolveError::UnsatisfiableDependency {
            name: name.to_string(),
            constraint: constraint.raw().to_string(),
            as_of,
            reason: UnsatisfiableReason::UnsupportedConstraintSyntax,
            available: available.iter().map(|r| r.version.clone()).collect(),
        });
    }

    let best = available
        .iter()
        .filter(|r| constraint.satisfies(&r.version))
        .max_by(|a, b| compare_versions(&a.version, &b.version));

    match best {
        Some(record) => Ok(Selected {
            version: record.version.clone(),
            published_at: record.published_at,
            dependencies: record.dependencies.clone(),
        }),
        None => Err(ResolveError::UnsatisfiableDependency {
            name: name.to_string(),
            constraint: constraint.raw().to_string(),
            as_of,
            reason: UnsatisfiableReason::NoSatisfyingVersion,
            available: available.iter().map(|r| r.version.clone()).collect(),
        }),
    }
}

/// NDJSON record stream for a resolved graph: one line per node, then one
/// per edge, in stable order.
#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum GraphLine {
    Node(GraphNode),
    Edge(GraphEdge),
}

pub fn graph_lines(graph: &ResolvedGraph) -> Vec<GraphLine> {
    let mut lines: Vec<GraphLine> = graph.nodes.iter().cloned().map(GraphLine::Node).collect();
    lines.extend(graph.edges.iter().cloned().map(GraphLine::Edge));
    lines
}

/// Lockfile-like summary: the selected version set keyed by package name,
/// with each selection's own dependency constraints.
pub fn lock_summary(graph: &ResolvedGraph, store: &Store) -> serde_json::Value {
    let mut packages = serde_json::Map::new();
    for node in &graph.nodes {
        let deps: BTreeMap<String, String> = store
            .history(&node.name)
            .ok()
            .and_then(|h| h.record_for(&node.version).cloned())
            .map(|r| {
                r.dependencies
                    .iter()
                    .map(|(k, v)| (k.clone(), v.raw().to_string()))
                    .collect()
            })
            .unwrap_or_default();
        packages.insert(
            format!("{}@{}", node.name, node.version),
            serde_json::json!({
                "version": node.version.to_string(),
                "publishedAt": format_ts(node.published_at),
                "dependencies": deps,
            }),
        );
    }
    serde_json::json!({
        "asOf": format_ts(graph.as_of),
        "resolverKind": graph.resolver_kind,
        "root": graph.root,
        "packages": packages,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semver::parse_constraint;
    use crate::store::Store;
    use crate::time::parse_ts;
    use serde_json::json;
    use tempfile::TempDir;

    fn t(s: &str) -> Timestamp {
        parse_ts(s).unwrap()
    }

    fn deps(pairs: &[(&str, &str)]) -> BTreeMap<String, Constraint> {
        pairs
            .iter()
            .map(|(n, c)| (n.to_string(), parse_constraint(c)))
            .collect()
    }

    #[allow(clippy::type_complexity)]
    fn fixture_store(dir: &TempDir, packages: &[(&str, &[(&str, &str, &[(&str, &str)])])]) -> Store {
        let mut store = Store::open(dir.path()).unwrap();
        let docs: Vec<serde_json::Value> = packages
            .iter()
            .map(|(name, versions)| {
                let mut vmap = serde_json::Map::new();
                let mut tmap = serde_json::Map::new();
                for (ver, at, vdeps) in versions.iter() {
                    let dep_obj: serde_json::Map<String, serde_json::Value> = vdeps
                        .iter()
                        .map(|(d, c)| (d.to_string(), json!(c)))
                        .collect();
                    vmap.insert(
                        ver.to_string(),
                        json!({"name": name, "version": ver, "dependencies": dep_obj}),
                    );
                    tmap.insert(ver.to_string(), json!(at));
                }
                json!({"name": name, "versions": vmap, "time": tmap})
            })
            .collect();
        store.ingest_changes(docs).unwrap();
        store
    }

    #[test]
    fn selects_highest_satisfying_version() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(
            &dir,
            &[(
                "a",
                &[
                    ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                    ("1.1.0", "2020-02-01T00:00:00Z", &[]),
                    ("2.0.0", "2020-03-01T00:00:00Z", &[]),
                ],
            )],
        );
        let graph = resolve(&deps(&[("a", "^1.0.0")]), t("2020-12-01T00:00:00Z"), &store).unwrap();
        assert_eq!(graph.nodes.len(), 1);
        assert_eq!(graph.nodes[0].version.to_string(), "1.1.0");
        assert_eq!(graph.resolver_kind, "flat-approx");
    }

    #[test]
    fn empty_root_resolves_to_empty_graph() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(&dir, &[]);
        let graph = resolve(&BTreeMap::new(), t("2020-01-01T00:00:00Z"), &store).unwrap();
        assert!(graph.nodes.is_empty());
        assert!(graph.edges.is_empty());
    }

    #[test]
    fn time_filter_can_make_constraints_unsatisfiable() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(
            &dir,
            &[(
                "a",
                &[
                    ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                    ("2.0.0", "2021-01-01T00:00:00Z", &[]),
                ],
            )],
        );
        let err = resolve(&deps(&[("a", "^2.0.0")]), t("2020-06-01T00:00:00Z"), &store).unwrap_err();
        match err {
            ResolveError::UnsatisfiableDependency {
                name,
                reason,
                available,
                ..
            } => {
                assert_eq!(name, "a");
                assert_eq!(reason, UnsatisfiableReason::NoSatisfyingVersion);
                assert_eq!(available.len(), 1);
                assert_eq!(available[0].to_string(), "1.0.0");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn transitive_resolution_walks_dependencies() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(
            &dir,
            &[
                ("a", &[("1.0.0", "2020-01-01T00:00:00Z", &[("b", "^1.0.0")])]),
                (
                    "b",
                    &[
                        ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                        ("1.2.0", "2020-02-01T00:00:00Z", &[]),
                    ],
                ),
            ],
        );
        let graph = resolve(&deps(&[("a", "*")]), t("2020-06-01T00:00:00Z"), &store).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        assert_eq!(graph.versions_of("b")[0].to_string(), "1.2.0");
        assert_eq!(graph.edges.len(), 2);
        // Every edge's target satisfies its constraint.
        for e in &graph.edges {
            assert!(e.constraint.satisfies(&e.to.version));
        }
    }

    #[test]
    fn cycles_terminate() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(
            &dir,
            &[
                ("a", &[("1.0.0", "2020-01-01T00:00:00Z", &[("b", "^1.0.0")])]),
                ("b", &[("1.0.0", "2020-01-01T00:00:00Z", &[("a", "^1.0.0")])]),
            ],
        );
        let graph = resolve(&deps(&[("a", "^1.0.0")]), t("2020-06-01T00:00:00Z"), &store).unwrap();
        assert_eq!(graph.nodes.len(), 2);
        assert_eq!(graph.edges.len(), 3);
    }

    #[test]
    fn unsupported_syntax_has_distinct_reason() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(&dir, &[("a", &[("1.0.0", "2020-01-01T00:00:00Z", &[])])]);
        let err = resolve(
            &deps(&[("a", "git+https://example.com/a.git")]),
            t("2020-06-01T00:00:00Z"),
            &store,
        )
        .unwrap_err();
        match err {
            ResolveError::UnsatisfiableDependency { reason, .. } => {
                assert_eq!(reason, UnsatisfiableReason::UnsupportedConstraintSyntax)
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_package_is_reported() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(&dir, &[]);
        let err = resolve(&deps(&[("ghost", "^1.0.0")]), t("2020-01-01T00:00:00Z"), &store)
            .unwrap_err();
        assert!(matches!(err, ResolveError::UnknownPackage(p) if p == "ghost"));
    }

    #[test]
    fn prereleases_are_never_selected() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(
            &dir,
            &[(
                "a",
                &[
                    ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                    ("1.1.0-rc.1", "2020-02-01T00:00:00Z", &[]),
                ],
            )],
        );
        let graph = resolve(&deps(&[("a", "*")]), t("2020-06-01T00:00:00Z"), &store).unwrap();
        assert_eq!(graph.nodes[0].version.to_string(), "1.0.0");
    }

    #[test]
    fn chosen_versions_nondecreasing_in_as_of() {
        let dir = TempDir::new().unwrap();
        let store = fixture_store(
            &dir,
            &[(
                "a",
                &[
                    ("1.0.0", "2020-01-01T00:00:00Z", &[]),
                    ("1.1.0", "2020-03-01T00:00:00Z", &[]),
                    ("1.2.0", "2020-05-01T00:00:00Z", &[]),
                ],
            )],
        );
        let root = deps(&[("a", "^1.0.0")]);
        let mut last: Option<Version> = None;
        for when in [
            "2020-01-15T00:00:00Z",
            "2020-03-15T00:00:00Z",
            "2020-05-15T00:00:00Z",
        ] {
            let graph = resolve(&root, t(when), &store).unwrap();
            let chosen = graph.nodes[0].version.clone();
            if let Some(prev) = &last {
                assert!(compare_versions(prev, &chosen) != std::cmp::Ordering::Greater);
            }
            last = Some(chosen);
        }
    }
}
