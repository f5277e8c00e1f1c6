//! Update mining: extract chronologically and numerically consistent
//! updates from a package's publish history and classify each one.
//!
//! Versions are grouped by major component. Within a group, publish
//! order must agree with version order (otherwise the whole package is
//! rejected); consecutive versions of a group form intra-group updates.
//! Numerically adjacent groups are bridged by one inter-group update,
//! from the latest version of the older group published no later than
//! the newer group's first release.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::advisory::Advisory;
use crate::semver::{compare_versions, increment_type, IncrementType, Version};
use crate::store::{PackageHistory, VersionRecord};
use crate::time::Timestamp;

/// Whether an update crosses a security advisory boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecurityEffect {
    None,
    IntroducesVuln,
    PatchesVuln,
}

impl SecurityEffect {
    pub fn label(&self) -> &'static str {
        match self {
            SecurityEffect::None => "none",
            SecurityEffect::IntroducesVuln => "introduces-vuln",
            SecurityEffect::PatchesVuln => "patches-vuln",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateKind {
    IntraGroup,
    InterGroup,
}

/// A mined update edge between two published versions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Update {
    pub package_name: String,
    pub from_version: Version,
    pub to_version: Version,
    #[serde(with = "crate::time::ts_serde")]
    pub from_at: Timestamp,
    #[serde(with = "crate::time::ts_serde")]
    pub to_at: Timestamp,
    pub increment: IncrementType,
    pub security_effect: SecurityEffect,
    pub kind: UpdateKind,
}

/// Result of mining one package. A rejected package yields no updates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MiningReport {
    pub updates: Vec<Update>,
    pub rejected: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rejection_reason: Option<String>,
}

impl MiningReport {
    fn rejected(reason: String) -> Self {
        MiningReport {
            updates: Vec::new(),
            rejected: true,
            rejection_reason: Some(reason),
        }
    }
}

/// Mine all updates from a package history.
pub fn mine_updates(history: &PackageHistory) -> MiningReport {
    let releases: Vec<&VersionRecord> = history
        .records
        .iter()
        .filter(|r| !r.version.is_prerelease())
        .collect();

    let mut groups: BTreeMap<u64, Vec<&VersionRecord>> = BTreeMap::new();
    for record in &releases {
        groups.entry(record.version.major).or_default().push(record);
    }

    // Sort each group by version and require nondecreasing publish times
    // along that order; equal timestamps are fine (registry clocks tie).
    for (major, group) in groups.iter_mut() {
        group.sort_by(|a, b| compare_versions(&a.version, &b.version));
        for pair in group.windows(2) {
            if pair[0].published_at > pair[1].published_at {
                return MiningReport::rejected(format!(
                    "major group {major}: {} published after {}",
                    pair[0].version, pair[1].version
                ));
            }
        }
    }

    let mut updates = Vec::new();

    for group in groups.values() {
        for pair in group.windows(2) {
            updates.push(make_update(pair[0], pair[1], UpdateKind::IntraGroup));
        }
    }

    let majors: Vec<u64> = groups.keys().copied().collect();
    for adjacent in majors.windows(2) {
        let older = &groups[&adjacent[0]];
        let newer = &groups[&adjacent[1]];
        // First release of the newer group, chronologically; ties broken
        // by version order (the group is version-sorted already).
        let first_new = newer
            .iter()
            .min_by_key(|r| r.published_at)
            .expect("groups are nonempty");
        // Latest version of the older group already published by then.
        let source = older
            .iter()
            .rev()
            .find(|r| r.published_at <= first_new.published_at);
        if let Some(source) = source {
            updates.push(make_update(source, first_new, UpdateKind::InterGroup));
        }
    }

    updates.sort_by(|a, b| {
        a.to_at
            .cmp(&b.to_at)
            .then_with(|| compare_versions(&a.to_version, &b.to_version))
            .then_with(|| compare_versions(&a.from_version, &b.from_version))
    });

    MiningReport {
        updates,
        rejected: false,
        rejection_reason: None,
    }
}

fn make_update(from: &VersionRecord, to: &VersionRecord, kind: UpdateKind) -> Update {
    let increment = increment_type(&from.version, &to.version)
        .expect("mining only pairs ascending non-prerelease versions");
    Update {
        package_name: from.package_name.clone(),
        from_version: from.version.clone(),
        to_version: to.version.clone(),
        from_at: from.published_at,
        to_at: to.published_at,
        increment,
        security_effect: SecurityEffect::None,
        kind,
    }
}

/// Classify the security effect of an update against the package's
/// advisories. Patching takes precedence over introducing when an update
/// does both.
pub fn classify_security_effect(update: &Update, advisories: &[Advisory]) -> SecurityEffect {
    let patches = advisories.iter().any(|adv| {
        adv.patched_versions
            .iter()
            .any(|p| compare_versions(p, &update.to_version) == std::cmp::Ordering::Equal)
            && adv.affects(&update.from_version)
    });
    if patches {
        return SecurityEffect::PatchesVuln;
    }
    let introduces = advisories.iter().any(|adv| {
        adv.affects(&update.to_version)
            && adv
                .min_affected()
                .map(|m| compare_versions(m, &update.to_version) == std::cmp::Ordering::Equal)
                .unwrap_or(false)
    });
    if introduces {
        SecurityEffect::IntroducesVuln
    } else {
        SecurityEffect::None
    }
}

/// Per-package proportions of update increment types within one security
/// effect segment. Packages with no updates in the segment are excluded,
/// so each row's fractions sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TypeDistributionRow {
    pub package_name: String,
    pub segment: SecurityEffect,
    pub bug: f64,
    pub minor: f64,
    pub major: f64,
    pub updates: usize,
}

pub fn update_type_distribution(
    reports: &[MiningReport],
    segment: SecurityEffect,
) -> Vec<TypeDistributionRow> {
    let mut per_package: BTreeMap<&str, [usize; 3]> = BTreeMap::new();
    for report in reports {
        for update in &report.updates {
            if update.security_effect != segment {
                continue;
            }
            let counts = per_package.entry(&update.package_name).or_default();
            match update.increment {
                IncrementType::Bug => counts[0] += 1,
                IncrementType::Minor => counts[1] += 1,
                IncrementType::Major => counts[2] += 1,
            }
        }
    }
    per_package
        .into_iter()
        .map(|(name, [bug, minor, major])| {
            let total = (bug + minor + major) as f64;
            TypeDistributionRow {
                package_name: name.to_string(),
                segment,
                bug: bug as f64 / total,
                minor: minor as f64 / total,
                major: major as f64 / total,
                updates: bug + minor + major,
            }
        })
        .collect()
}
