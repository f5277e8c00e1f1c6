//! Property and oracle-equivalence tests across the core modules.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use retrograde_core::miner::{mine_updates, UpdateKind};
use retrograde_core::semver::{compare_versions, parse_constraint, parse_version, satisfies, Version};
use retrograde_core::store::Store;
use retrograde_core::time::from_millis;
use retrograde_testkit::gen;
use retrograde_testkit::oracle::{oracle_mine, oracle_satisfies, template_constraint, OracleEdge};

fn version_strategy() -> impl Strategy<Value = Version> {
    let id = prop_oneof![
        (0u64..20).prop_map(|n| n.to_string()),
        "[a-z]{1,6}".prop_map(String::from),
    ];
    (
        0u64..50,
        0u64..50,
        0u64..50,
        proptest::collection::vec(id, 0..3),
        proptest::option::of("[0-9a-zA-Z]{1,8}"),
    )
        .prop_map(|(major, minor, bug, pre, build)| {
            let refs: Vec<&str> = pre.iter().map(String::as_str).collect();
            let mut v = Version::new(major, minor, bug).with_prerelease(&refs);
            v.build = build;
            v
        })
}

proptest! {
    #[test]
    fn parse_render_roundtrip(v in version_strategy()) {
        let rendered = v.to_string();
        let reparsed = parse_version(&rendered).expect("rendered versions parse");
        prop_assert_eq!(reparsed, v);
    }

    #[test]
    fn order_is_antisymmetric_and_total(a in version_strategy(), b in version_strategy()) {
        let ab = compare_versions(&a, &b);
        let ba = compare_versions(&b, &a);
        prop_assert_eq!(ab, ba.reverse());
    }

    #[test]
    fn order_is_transitive(a in version_strategy(), b in version_strategy(), c in version_strategy()) {
        let mut sorted = [a, b, c];
        sorted.sort_by(compare_versions);
        prop_assert_ne!(compare_versions(&sorted[0], &sorted[1]), Ordering::Greater);
        prop_assert_ne!(compare_versions(&sorted[1], &sorted[2]), Ordering::Greater);
        prop_assert_ne!(compare_versions(&sorted[0], &sorted[2]), Ordering::Greater);
    }

    #[test]
    fn classification_is_total_and_deterministic(raw in "\\PC{0,24}") {
        let first = parse_constraint(&raw);
        let second = parse_constraint(&raw);
        prop_assert_eq!(first.category(), second.category());
        prop_assert_eq!(first.intervals(), second.intervals());
        // Exactly one category: the type system guarantees one value;
        // assert the label is one of the six.
        let labels = ["exact", "bug", "minor", "geq", "any", "other"];
        prop_assert!(labels.contains(&first.category().label()));
    }

    #[test]
    fn build_metadata_never_affects_ordering(a in version_strategy(), b in "[0-9a-zA-Z]{1,8}") {
        let mut with_build = a.clone();
        with_build.build = Some(b);
        prop_assert_eq!(compare_versions(&a, &with_build), Ordering::Equal);
    }
}

#[test]
fn roundtrip_ten_thousand_seeded_versions() {
    let mut rng = gen::rng(101);
    for _ in 0..10_000 {
        let v = gen::random_version(&mut rng, true);
        assert_eq!(parse_version(&v.to_string()).unwrap(), v);
    }
}

#[test]
fn satisfaction_matches_triple_arithmetic_oracle() {
    let mut rng = gen::rng(7);
    let mut checked = 0;
    for _ in 0..10_000 {
        let (category, base) = gen::random_template(&mut rng);
        let raw = template_constraint(category, &base);
        let constraint = parse_constraint(&raw);
        assert_eq!(constraint.category(), category, "{raw}");
        let v = gen::random_version(&mut rng, true);
        let expected = oracle_satisfies(category, &base, &v);
        assert_eq!(
            satisfies(&v, &constraint),
            expected,
            "version {v} against {raw}"
        );
        checked += 1;
    }
    assert_eq!(checked, 10_000);
}

#[test]
fn tilde_and_caret_upper_bounds_are_excluded() {
    let mut rng = gen::rng(11);
    for _ in 0..2_000 {
        let base = gen::random_version(&mut rng, false);
        let (a, b, c) = base.triple();

        let tilde = parse_constraint(&format!("~{base}"));
        assert!(!satisfies(&Version::new(a, b + 1, 0), &tilde));

        let caret = parse_constraint(&format!("^{base}"));
        let upper = if a > 0 {
            Version::new(a + 1, 0, 0)
        } else if b > 0 {
            Version::new(0, b + 1, 0)
        } else {
            Version::new(0, 0, c + 1)
        };
        assert!(!satisfies(&upper, &caret), "^{base} must exclude {upper}");
    }
}

#[test]
fn miner_matches_exhaustive_oracle() {
    let mut rng = gen::rng(23);
    for case in 0..400 {
        let history = gen::random_history(&mut rng, 8, 3);
        let report = mine_updates(&history);
        let expected = oracle_mine(&history);
        match expected {
            None => assert!(report.rejected, "case {case}: oracle rejects, miner accepted"),
            Some(edges) => {
                assert!(!report.rejected, "case {case}: oracle accepts, miner rejected");
                let mined: std::collections::BTreeSet<OracleEdge> = report
                    .updates
                    .iter()
                    .map(|u| OracleEdge {
                        from: u.from_version.clone(),
                        to: u.to_version.clone(),
                        inter_group: u.kind == UpdateKind::InterGroup,
                    })
                    .collect();
                assert_eq!(mined, edges, "case {case}");
            }
        }
    }
}

#[test]
fn mined_updates_are_chronological_and_unique_targets() {
    let mut rng = gen::rng(29);
    for _ in 0..400 {
        let history = gen::random_history(&mut rng, 10, 4);
        let report = mine_updates(&history);
        let mut intra_targets = std::collections::BTreeSet::new();
        for u in &report.updates {
            assert!(u.from_at <= u.to_at);
            assert_eq!(compare_versions(&u.from_version, &u.to_version), Ordering::Less);
            assert!(!u.from_version.is_prerelease() && !u.to_version.is_prerelease());
            if u.kind == UpdateKind::IntraGroup {
                assert!(
                    intra_targets.insert(u.to_version.clone()),
                    "{} targeted twice",
                    u.to_version
                );
            }
        }
        // Determinism: a second run yields the identical report.
        assert_eq!(mine_updates(&history), report);
    }
}

#[test]
fn store_history_is_monotone_in_time() {
    let dir = tempfile::TempDir::new().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    let docs = retrograde_core::synth::synth_packuments(&retrograde_core::synth::SynthConfig {
        seed: 5,
        packages: 30,
        versions_per_package: 10,
    });
    store.ingest_changes(docs).unwrap();

    let mut rng = gen::rng(31);
    let names: Vec<String> = store.package_names().map(String::from).collect();
    for _ in 0..1_000 {
        let name = &names[rng.gen_range(0..names.len())];
        let t1 = from_millis(1_500_000_000_000 + rng.gen_range(0..200i64) * 86_400_000);
        let t2 = t1 + chrono::Duration::days(rng.gen_range(0..100i64));
        let early = store.history_as_of(name, t1).unwrap();
        let late = store.history_as_of(name, t2).unwrap();
        let late_versions: std::collections::BTreeSet<_> =
            late.versions().cloned().collect();
        for v in early.versions() {
            assert!(late_versions.contains(v), "{name}@{v} vanished between instants");
        }
    }
}

#[test]
fn ingestion_is_idempotent_on_random_corpora() {
    let docs = retrograde_core::synth::synth_packuments(&retrograde_core::synth::SynthConfig {
        seed: 13,
        packages: 20,
        versions_per_package: 8,
    });

    let dir = tempfile::TempDir::new().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    store.ingest_changes(docs.clone()).unwrap();
    let once: Vec<_> = store
        .package_names()
        .map(|n| store.history(n).unwrap())
        .collect();
    let report = store.ingest_changes(docs).unwrap();
    assert_eq!(report.versions_inserted, 0);
    assert_eq!(report.versions_updated, 0);
    assert_eq!(report.tombstones_recorded, 0);
    let twice: Vec<_> = store
        .package_names()
        .map(|n| store.history(n).unwrap())
        .collect();
    assert_eq!(once, twice);
}

#[test]
fn resolver_matches_maximal_selection_oracle() {
    use retrograde_core::resolver::resolve;
    use retrograde_testkit::oracle::{oracle_resolve, OracleNode, OracleResolve};

    let mut rng = gen::rng(37);
    let as_of = from_millis(1_500_000_000_000 + 200 * 86_400_000);
    for case in 0..100 {
        let (registry, root) = gen::random_registry(&mut rng, 6, 5);
        let dir = tempfile::TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes(gen::registry_packuments(&registry))
            .unwrap();

        let expected = oracle_resolve(&registry, &root, as_of);
        let actual = resolve(&root, as_of, &store);
        match (expected, actual) {
            (OracleResolve::Failed, Err(_)) => {}
            (OracleResolve::Failed, Ok(g)) => {
                panic!("case {case}: oracle failed, resolver produced {} nodes", g.nodes.len())
            }
            (OracleResolve::Graph { nodes, .. }, Ok(graph)) => {
                let actual_nodes: std::collections::BTreeSet<OracleNode> = graph
                    .nodes
                    .iter()
                    .map(|n| OracleNode {
                        name: n.name.clone(),
                        version: n.version.clone(),
                    })
                    .collect();
                assert_eq!(actual_nodes, nodes, "case {case}");
            }
            (OracleResolve::Graph { .. }, Err(e)) => {
                panic!("case {case}: oracle resolved, resolver failed with {e}")
            }
        }
    }
}

#[test]
fn lag_entries_keep_strict_bounds() {
    use retrograde_core::analysis::compute_lag;
    use retrograde_core::resolver::resolve;

    let mut rng = gen::rng(41);
    for _ in 0..60 {
        let (registry, root) = gen::random_registry(&mut rng, 5, 4);
        let dir = tempfile::TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes(gen::registry_packuments(&registry))
            .unwrap();
        let as_of = from_millis(1_500_000_000_000 + rng.gen_range(50..400i64) * 86_400_000);
        let Ok(graph) = resolve(&root, as_of, &store) else {
            continue;
        };
        let report = compute_lag(&graph, &store);
        for entry in &report.entries {
            assert_eq!(entry.out_of_date_days.is_some(), entry.newest_eligible_at.is_some());
            if let Some(newest) = entry.newest_eligible_at {
                assert!(entry.resolved_at < newest, "T_D < T_D' violated");
                assert!(newest < as_of, "T_D' < T_P violated");
                assert!(entry.out_of_date_days.unwrap() > 0.0);
            }
        }
    }
}

#[test]
fn usage_rows_sum_to_one_hundred() {
    use retrograde_core::analysis::constraint_usage_by_year;

    let dir = tempfile::TempDir::new().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    let docs = retrograde_core::synth::synth_packuments(&retrograde_core::synth::SynthConfig {
        seed: 43,
        packages: 40,
        versions_per_package: 6,
    });
    store.ingest_changes(docs).unwrap();
    for row in constraint_usage_by_year(&store, None) {
        if row.constraints > 0 {
            let total = row.exact + row.bug + row.minor + row.geq + row.any + row.other;
            assert!((total - 100.0).abs() < 1e-9, "year {}: {total}", row.year);
        }
    }
}

#[test]
fn two_node_flow_blocking_matches_constraint_flexibility() {
    use retrograde_core::analysis::{classify_flow, FlatDriver, FlowCategory, FlowClassification, FlowOptions};
    use retrograde_core::miner::{SecurityEffect, Update};
    use retrograde_core::semver::{increment_type, IncrementType};
    use retrograde_testkit::PackumentBuilder;

    // Every (constraint category, increment type) pairing on a two-node
    // fixture: the flow is instant exactly when the constraint accepts
    // the increment.
    let cases = [
        ("~1.0.0", IncrementType::Bug, true),
        ("~1.0.0", IncrementType::Minor, false),
        ("~1.0.0", IncrementType::Major, false),
        ("^1.0.0", IncrementType::Bug, true),
        ("^1.0.0", IncrementType::Minor, true),
        ("^1.0.0", IncrementType::Major, false),
        (">=1.0.0", IncrementType::Bug, true),
        (">=1.0.0", IncrementType::Minor, true),
        (">=1.0.0", IncrementType::Major, true),
        ("=1.0.0", IncrementType::Bug, false),
        ("*", IncrementType::Major, true),
    ];

    for (constraint, increment, expect_instant) in cases {
        let to_version = match increment {
            IncrementType::Bug => "1.0.1",
            IncrementType::Minor => "1.1.0",
            IncrementType::Major => "2.0.0",
        };
        let dir = tempfile::TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes([
                PackumentBuilder::new("down")
                    .version("1.0.0", "2020-01-02T00:00:00Z", &[("dep", constraint)])
                    .build(),
                PackumentBuilder::new("dep")
                    .version("1.0.0", "2020-01-01T00:00:00Z", &[])
                    .version(to_version, "2020-02-01T00:00:00Z", &[])
                    .build(),
            ])
            .unwrap();

        let from = parse_version("1.0.0").unwrap();
        let to = parse_version(to_version).unwrap();
        let update = Update {
            package_name: "dep".into(),
            increment: increment_type(&from, &to).unwrap(),
            from_version: from,
            to_version: to,
            from_at: retrograde_core::time::parse_ts("2020-01-01T00:00:00Z").unwrap(),
            to_at: retrograde_core::time::parse_ts("2020-02-01T00:00:00Z").unwrap(),
            security_effect: SecurityEffect::None,
            kind: UpdateKind::IntraGroup,
        };
        let driver = FlatDriver { store: &store };
        let result = classify_flow(
            &update,
            "down",
            &store,
            &driver,
            &FlowOptions {
                horizon_days: 3,
                frozen_downstream: false,
            },
        )
        .unwrap();
        let instant = matches!(
            &result,
            FlowClassification::Classified(o) if o.category == FlowCategory::InstantNoIntervention
        );
        assert_eq!(
            instant, expect_instant,
            "constraint {constraint} with {increment:?} update"
        );
    }
}

#[test]
fn distribution_is_permutation_invariant() {
    use retrograde_core::miner::{update_type_distribution, MiningReport, SecurityEffect};

    let mut rng = gen::rng(47);
    let mut reports: Vec<MiningReport> = (0..20)
        .map(|_| mine_updates(&gen::random_history(&mut rng, 8, 3)))
        .collect();
    let forward = update_type_distribution(&reports, SecurityEffect::None);
    reports.reverse();
    let backward = update_type_distribution(&reports, SecurityEffect::None);
    assert_eq!(forward, backward);
}

#[test]
fn resolver_root_deps_map_order_is_irrelevant() {
    use retrograde_core::resolver::resolve;

    let dir = tempfile::TempDir::new().unwrap();
    let mut store = Store::open(dir.path()).unwrap();
    store
        .ingest_changes([
            retrograde_testkit::PackumentBuilder::new("a")
                .version("1.0.0", "2020-01-01T00:00:00Z", &[])
                .build(),
            retrograde_testkit::PackumentBuilder::new("b")
                .version("1.0.0", "2020-01-01T00:00:00Z", &[])
                .build(),
        ])
        .unwrap();
    let as_of = retrograde_core::time::parse_ts("2020-06-01T00:00:00Z").unwrap();
    let mut forward = BTreeMap::new();
    forward.insert("a".to_string(), parse_constraint("^1.0.0"));
    forward.insert("b".to_string(), parse_constraint("^1.0.0"));
    let graph_a = resolve(&forward, as_of, &store).unwrap();
    let mut reverse = BTreeMap::new();
    reverse.insert("b".to_string(), parse_constraint("^1.0.0"));
    reverse.insert("a".to_string(), parse_constraint("^1.0.0"));
    let graph_b = resolve(&reverse, as_of, &store).unwrap();
    assert_eq!(graph_a, graph_b);
}
