//! Seeded random generators for oracle-equivalence runs.

use std::collections::BTreeMap;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use retrograde_core::semver::{parse_constraint, Constraint, ConstraintCategory, Version};
use retrograde_core::store::{PackageHistory, VersionRecord};
use retrograde_core::time::{from_millis, Timestamp};

use crate::oracle::OracleRegistry;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const PRE_TAGS: [&str; 3] = ["alpha", "beta", "rc"];

pub fn random_version(rng: &mut ChaCha8Rng, with_prerelease: bool) -> Version {
    let mut v = Version::new(
        rng.gen_range(0..5),
        rng.gen_range(0..5),
        rng.gen_range(0..6),
    );
    if with_prerelease && rng.gen_bool(0.25) {
        let tag = PRE_TAGS[rng.gen_range(0..PRE_TAGS.len())];
        if rng.gen_bool(0.5) {
            let n = rng.gen_range(0..3u64).to_string();
            v = v.with_prerelease(&[tag, &n]);
        } else {
            v = v.with_prerelease(&[tag]);
        }
    }
    v
}

pub const TEMPLATE_CATEGORIES: [ConstraintCategory; 5] = [
    ConstraintCategory::Exact,
    ConstraintCategory::Bug,
    ConstraintCategory::Minor,
    ConstraintCategory::Geq,
    ConstraintCategory::Any,
];

pub fn random_template(rng: &mut ChaCha8Rng) -> (ConstraintCategory, Version) {
    let category = TEMPLATE_CATEGORIES[rng.gen_range(0..TEMPLATE_CATEGORIES.len())];
    let base = random_version(rng, true);
    (category, base)
}

/// A history of up to `max_versions` releases over up to `max_majors`
/// majors, timestamps shuffled arbitrarily (so intra-group chronology
/// violations occur regularly).
pub fn random_history(rng: &mut ChaCha8Rng, max_versions: usize, max_majors: u64) -> PackageHistory {
    let count = rng.gen_range(1..=max_versions);
    let mut versions: Vec<Version> = Vec::new();
    let mut guard = 0;
    while versions.len() < count && guard < 200 {
        guard += 1;
        let mut v = Version::new(
            rng.gen_range(0..max_majors),
            rng.gen_range(0..3),
            rng.gen_range(0..3),
        );
        if rng.gen_bool(0.1) {
            v = v.with_prerelease(&["rc"]);
        }
        if !versions.contains(&v) {
            versions.push(v);
        }
    }

    let mut records: Vec<VersionRecord> = versions
        .into_iter()
        .map(|version| {
            let at: Timestamp = from_millis(1_500_000_000_000 + rng.gen_range(0..50i64) * 3_600_000);
            VersionRecord {
                package_name: "gen".to_string(),
                version,
                published_at: at,
                dependencies: BTreeMap::new(),
                tarball_url: None,
                deleted: false,
            }
        })
        .collect();
    records.sort_by(|a, b| {
        a.published_at
            .cmp(&b.published_at)
            .then_with(|| a.version.cmp(&b.version))
    });
    PackageHistory {
        package_name: "gen".to_string(),
        records,
        dist_tag_events: Vec::new(),
    }
}

const GEN_CONSTRAINTS: [&str; 8] = [
    "^1.0.0", "~1.1.0", ">=1.0.0", "*", "=1.2.0", "^2.0.0", "1.x", ">=0.1.0 <2.0.0",
];

/// A small registry: up to `max_packages` packages with up to
/// `max_versions` versions each, timestamps spread over a year, with
/// random dependency edges among earlier-named packages.
pub fn random_registry(
    rng: &mut ChaCha8Rng,
    max_packages: usize,
    max_versions: usize,
) -> (OracleRegistry, BTreeMap<String, Constraint>) {
    let package_count = rng.gen_range(1..=max_packages);
    let mut registry: OracleRegistry = BTreeMap::new();

    for p in 0..package_count {
        let name = format!("pkg{p}");
        let version_count = rng.gen_range(1..=max_versions);
        let mut versions = Vec::new();
        for _ in 0..version_count {
            let version = Version::new(rng.gen_range(0..3), rng.gen_range(0..3), rng.gen_range(0..3));
            if versions.iter().any(|(v, _, _)| *v == version) {
                continue;
            }
            let at = from_millis(1_500_000_000_000 + rng.gen_range(0..365i64) * 86_400_000);
            let mut deps = BTreeMap::new();
            // Depend only on lower-numbered packages; cycles are exercised
            // by dedicated fixtures.
            if p > 0 {
                for _ in 0..rng.gen_range(0..3usize) {
                    let target = format!("pkg{}", rng.gen_range(0..p));
                    let raw = GEN_CONSTRAINTS[rng.gen_range(0..GEN_CONSTRAINTS.len())];
                    deps.insert(target, parse_constraint(raw));
                }
            }
            versions.push((version, at, deps));
        }
        versions.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        registry.insert(name, versions);
    }

    let mut root = BTreeMap::new();
    for _ in 0..rng.gen_range(1..=3usize) {
        let target = format!("pkg{}", rng.gen_range(0..package_count));
        let raw = GEN_CONSTRAINTS[rng.gen_range(0..GEN_CONSTRAINTS.len())];
        root.insert(target, parse_constraint(raw));
    }
    (registry, root)
}

/// Registry fixtures as packument documents for store ingestion.
pub fn registry_packuments(registry: &OracleRegistry) -> Vec<serde_json::Value> {
    registry
        .iter()
        .map(|(name, versions)| {
            let mut builder = crate::fixtures::PackumentBuilder::new(name);
            for (version, at, deps) in versions {
                let dep_pairs: Vec<(String, String)> = deps
                    .iter()
                    .map(|(d, c)| (d.clone(), c.raw().to_string()))
                    .collect();
                let dep_refs: Vec<(&str, &str)> = dep_pairs
                    .iter()
                    .map(|(d, c)| (d.as_str(), c.as_str()))
                    .collect();
                builder = builder.version(
                    &version.to_string(),
                    &retrograde_core::time::format_ts(*at),
                    &dep_refs,
                );
            }
            builder.build()
        })
        .collect()
}
