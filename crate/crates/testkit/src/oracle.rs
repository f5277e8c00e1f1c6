//! Brute-force oracles: the same rules as production, derived a second
//! time from first principles.

use std::collections::{BTreeMap, BTreeSet};

use retrograde_core::semver::{Constraint, ConstraintCategory, PrereleaseId, Version};
use retrograde_core::store::PackageHistory;
use retrograde_core::time::Timestamp;

// ---------------------------------------------------------------------------
// Constraint satisfaction
// ---------------------------------------------------------------------------

/// Compare prerelease identifier lists per precedence rules, written out
/// longhand (numeric before alphanumeric, prefix shorter first).
fn pre_cmp(a: &[PrereleaseId], b: &[PrereleaseId]) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    for (x, y) in a.iter().zip(b.iter()) {
        let step = match (x, y) {
            (PrereleaseId::Numeric(m), PrereleaseId::Numeric(n)) => m.cmp(n),
            (PrereleaseId::Numeric(_), PrereleaseId::Alpha(_)) => Ordering::Less,
            (PrereleaseId::Alpha(_), PrereleaseId::Numeric(_)) => Ordering::Greater,
            (PrereleaseId::Alpha(s), PrereleaseId::Alpha(t)) => s.cmp(t),
        };
        if step != Ordering::Equal {
            return step;
        }
    }
    a.len().cmp(&b.len())
}

/// Truth, computed by triple arithmetic, for the five simple template
/// categories applied to base version `base`.
pub fn oracle_satisfies(category: ConstraintCategory, base: &Version, v: &Version) -> bool {
    let (a, b, c) = base.triple();
    let (x, y, z) = v.triple();

    if v.is_prerelease() {
        // Opt-in: only a constraint naming this exact triple with a
        // prerelease component can match a prerelease version.
        if category == ConstraintCategory::Any || !base.is_prerelease() || v.triple() != base.triple() {
            return false;
        }
        let at_least_base = pre_cmp(&v.prerelease, &base.prerelease) != std::cmp::Ordering::Less;
        return match category {
            ConstraintCategory::Exact => v.prerelease == base.prerelease,
            ConstraintCategory::Bug | ConstraintCategory::Minor | ConstraintCategory::Geq => {
                at_least_base
            }
            _ => false,
        };
    }

    match category {
        ConstraintCategory::Exact => !base.is_prerelease() && (x, y, z) == (a, b, c),
        ConstraintCategory::Bug => x == a && y == b && z >= c,
        ConstraintCategory::Minor => {
            if a > 0 {
                x == a && (y, z) >= (b, c)
            } else if b > 0 {
                x == 0 && y == b && z >= c
            } else {
                x == 0 && y == 0 && z == c
            }
        }
        ConstraintCategory::Geq => (x, y, z) >= (a, b, c),
        ConstraintCategory::Any => true,
        ConstraintCategory::Other => panic!("oracle only covers template categories"),
    }
}

/// Render the template constraint string for a (category, base) pair.
pub fn template_constraint(category: ConstraintCategory, base: &Version) -> String {
    match category {
        ConstraintCategory::Exact => format!("={base}"),
        ConstraintCategory::Bug => format!("~{base}"),
        ConstraintCategory::Minor => format!("^{base}"),
        ConstraintCategory::Geq => format!(">={base}"),
        ConstraintCategory::Any => "*".to_string(),
        ConstraintCategory::Other => panic!("oracle only covers template categories"),
    }
}

// ---------------------------------------------------------------------------
// Update mining
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleEdge {
    pub from: Version,
    pub to: Version,
    pub inter_group: bool,
}

/// Exhaustive mining oracle: pairwise scans over the release list, no
/// group data structures. `None` means the package is rejected.
pub fn oracle_mine(history: &PackageHistory) -> Option<BTreeSet<OracleEdge>> {
    let releases: Vec<(&Version, Timestamp)> = history
        .records
        .iter()
        .filter(|r| !r.version.is_prerelease())
        .map(|r| (&r.version, r.published_at))
        .collect();

    // Rejection: some pair in one major line is numerically ordered one
    // way and chronologically the other.
    for (va, ta) in &releases {
        for (vb, tb) in &releases {
            if va.major == vb.major && va < vb && ta > tb {
                return None;
            }
        }
    }

    let mut edges = BTreeSet::new();

    // Intra-group: numerically adjacent pairs within a major line.
    for (va, _) in &releases {
        for (vb, _) in &releases {
            if va.major != vb.major || va >= vb {
                continue;
            }
            let has_between = releases
                .iter()
                .any(|(vc, _)| vc.major == va.major && *vc > *va && *vc < *vb);
            if !has_between {
                edges.insert(OracleEdge {
                    from: (*va).clone(),
                    to: (*vb).clone(),
                    inter_group: false,
                });
            }
        }
    }

    // Inter-group: for numerically adjacent existing majors, bridge from
    // the latest-by-then version of the older line to the first release
    // of the newer line.
    let majors: BTreeSet<u64> = releases.iter().map(|(v, _)| v.major).collect();
    for m1 in &majors {
        let m2 = match majors.iter().find(|m| **m > *m1) {
            Some(m) => *m,
            None => continue,
        };
        let first_new = releases
            .iter()
            .filter(|(v, _)| v.major == m2)
            .min_by(|(va, ta), (vb, tb)| ta.cmp(tb).then_with(|| va.cmp(vb)))
            .expect("major exists");
        let source = releases
            .iter()
            .filter(|(v, t)| v.major == *m1 && *t <= first_new.1)
            .max_by(|(va, ta), (vb, tb)| ta.cmp(tb).then_with(|| va.cmp(vb)));
        if let Some((from, _)) = source {
            edges.insert(OracleEdge {
                from: (*from).clone(),
                to: first_new.0.clone(),
                inter_group: true,
            });
        }
    }

    Some(edges)
}

// ---------------------------------------------------------------------------
// Flat resolution
// ---------------------------------------------------------------------------

pub type OracleRegistry = BTreeMap<String, Vec<(Version, Timestamp, BTreeMap<String, Constraint>)>>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OracleNode {
    pub name: String,
    pub version: Version,
}

#[derive(Debug, PartialEq, Eq)]
pub enum OracleResolve {
    Graph {
        nodes: BTreeSet<OracleNode>,
        edges: BTreeSet<(Option<OracleNode>, String, String, OracleNode)>,
    },
    Failed,
}

/// Recursive maximal-selection oracle: for every edge, scan every
/// version and keep the largest satisfying one.
pub fn oracle_resolve(
    registry: &OracleRegistry,
    root: &BTreeMap<String, Constraint>,
    as_of: Timestamp,
) -> OracleResolve {
    let mut nodes = BTreeSet::new();
    let mut edges = BTreeSet::new();
    let mut stack: Vec<(Option<OracleNode>, String, Constraint)> = root
        .iter()
        .map(|(n, c)| (None, n.clone(), c.clone()))
        .collect();

    while let Some((from, name, constraint)) = stack.pop() {
        let Some(versions) = registry.get(&name) else {
            return OracleResolve::Failed;
        };
        if !constraint.is_interval_syntax() {
            return OracleResolve::Failed;
        }
        let mut best: Option<&(Version, Timestamp, BTreeMap<String, Constraint>)> = None;
        for candidate in versions {
            if candidate.1 > as_of || candidate.0.is_prerelease() {
                continue;
            }
            if !constraint.satisfies(&candidate.0) {
                continue;
            }
            let better = match best {
                Some(current) => candidate.0 > current.0,
                None => true,
            };
            if better {
                best = Some(candidate);
            }
        }
        let Some((version, _, deps)) = best else {
            return OracleResolve::Failed;
        };
        let node = OracleNode {
            name: name.clone(),
            version: version.clone(),
        };
        edges.insert((from, name.clone(), constraint.raw().to_string(), node.clone()));
        if nodes.insert(node.clone()) {
            for (dep, dep_constraint) in deps {
                stack.push((Some(node.clone()), dep.clone(), dep_constraint.clone()));
            }
        }
    }

    OracleResolve::Graph { nodes, edges }
}
