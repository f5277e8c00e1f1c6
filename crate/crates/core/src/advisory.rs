//! Security advisories and OSV document import.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::semver::{self, compare_versions, Interval, Version};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Moderate,
    High,
    Critical,
}

/// A vulnerability record scoped to a single package: the affected
/// version intervals and the versions that fix it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Advisory {
    pub id: String,
    pub package_name: String,
    pub affected: Vec<AdvisoryInterval>,
    pub patched_versions: Vec<Version>,
    pub severity: Severity,
}

/// Serializable form of a half-open affected interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdvisoryInterval {
    pub lo: Version,
    pub hi: Option<Version>,
}

impl Advisory {
    pub fn affects(&self, v: &Version) -> bool {
        self.affected.iter().any(|i| {
            compare_versions(&i.lo, v) != std::cmp::Ordering::Greater
                && match &i.hi {
                    Some(hi) => compare_versions(v, hi) == std::cmp::Ordering::Less,
                    None => true,
                }
        })
    }

    /// The smallest version inside the affected set: the inclusive lower
    /// bound of the first normalized interval.
    pub fn min_affected(&self) -> Option<&Version> {
        self.affected.first().map(|i| &i.lo)
    }
}

/// Outcome of parsing one OSV document: advisories for npm packages plus
/// human-readable notes for everything that was skipped or repaired.
#[derive(Debug, Default)]
pub struct OsvParse {
    pub advisories: Vec<Advisory>,
    pub issues: Vec<String>,
}

fn parse_severity(doc: &Value, issues: &mut Vec<String>, id: &str) -> Severity {
    let label = doc
        .get("database_specific")
        .and_then(|d| d.get("severity"))
        .and_then(|s| s.as_str());
    match label.map(|s| s.to_ascii_uppercase()) {
        Some(ref s) if s == "LOW" => Severity::Low,
        Some(ref s) if s == "MODERATE" || s == "MEDIUM" => Severity::Moderate,
        Some(ref s) if s == "HIGH" => Severity::High,
        Some(ref s) if s == "CRITICAL" => Severity::Critical,
        Some(other) => {
            issues.push(format!("{id}: unrecognized severity {other:?}, defaulting to low"));
            Severity::Low
        }
        None => {
            issues.push(format!("{id}: missing severity, defaulting to low"));
            Severity::Low
        }
    }
}

fn event_version(text: &str) -> Option<Version> {
    if text.trim() == "0" {
        return Some(Version::new(0, 0, 0));
    }
    semver::parse_version(text)
        .ok()
        .or_else(|| semver::parse_version_lenient(text))
}

/// Parse one OSV-format JSON document into per-package advisories.
/// Non-npm affected entries are skipped and reported; malformed ranges
/// are reported and never abort the document.
pub fn parse_osv_document(doc: &Value) -> OsvParse {
    let mut out = OsvParse::default();
    let id = doc
        .get("id")
        .and_then(|v| v.as_str())
        .unwrap_or("<missing id>")
        .to_string();

    let Some(affected_entries) = doc.get("affected").and_then(|v| v.as_array()) else {
        out.issues.push(format!("{id}: no affected entries"));
        return out;
    };

    for entry in affected_entries {
        let ecosystem = entry
            .pointer("/package/ecosystem")
            .and_then(|v| v.as_str())
            .unwrap_or("");
        let package = entry.pointer("/package/name").and_then(|v| v.as_str());
        let Some(package) = package else {
            out.issues.push(format!("{id}: affected entry without package name"));
            continue;
        };
        if !ecosystem.eq_ignore_ascii_case("npm") {
            out.issues
                .push(format!("{id}: skipped {package} (ecosystem {ecosystem:?} is not npm)"));
            continue;
        }

        let mut intervals: Vec<Interval> = Vec::new();
        let mut patched: Vec<Version> = Vec::new();

        if let Some(ranges) = entry.get("ranges").and_then(|v| v.as_array()) {
            for range in ranges {
                let events = range.get("events").and_then(|v| v.as_array());
                let Some(events) = events else {
                    out.issues.push(format!("{id}/{package}: range without events"));
                    continue;
                };
                let mut open: Option<Version> = None;
                for event in events {
                    let Some(obj) = event.as_object() else { continue };
                    if let Some(intro) = obj.get("introduced").and_then(|v| v.as_str()) {
                        match event_version(intro) {
                            Some(v) => open = Some(v),
                            None => out
                                .issues
                                .push(format!("{id}/{package}: malformed introduced version {intro:?}")),
                        }
                    } else if let Some(fixed) = obj.get("fixed").and_then(|v| v.as_str()) {
                        match event_version(fixed) {
                            Some(v) => {
                                if let Some(lo) = open.take() {
                                    intervals.push(Interval {
                                        lo,
                                        hi: Some(v.clone()),
                                    });
                                }
                                patched.push(v);
                            }
                            None => out
                                .issues
                                .push(format!("{id}/{package}: malformed fixed version {fixed:?}")),
                        }
                    } else if let Some(last) = obj.get("last_affected").and_then(|v| v.as_str()) {
                        match event_version(last) {
                            Some(v) => {
                                if let Some(lo) = open.take() {
                                    intervals.push(Interval {
                                        lo,
                                        hi: Some(v.immediate_successor()),
                                    });
                                }
                            }
                            None => out.issues.push(format!(
                                "{id}/{package}: malformed last_affected version {last:?}"
                            )),
                        }
                    }
                }
                if let Some(lo) = open.take() {
                    intervals.push(Interval { lo, hi: None });
                }
            }
        }

        // Explicit version enumerations become degenerate intervals.
        if let Some(versions) = entry.get("versions").and_then(|v| v.as_array()) {
            for v in versions {
                match v.as_str().and_then(event_version) {
                    Some(ver) => {
                        let hi = ver.immediate_successor();
                        intervals.push(Interval {
                            lo: ver,
                            hi: Some(hi),
                        });
                    }
                    None => out
                        .issues
                        .push(format!("{id}/{package}: malformed enumerated version {v}")),
                }
            }
        }

        let intervals = semver::normalize_intervals(intervals);
        if intervals.is_empty() {
            out.issues
                .push(format!("{id}/{package}: no usable affected ranges, skipped"));
            continue;
        }

        patched.sort();
        patched.dedup();

        let advisory = Advisory {
            id: id.clone(),
            package_name: package.to_string(),
            affected: intervals
                .into_iter()
                .map(|i| AdvisoryInterval { lo: i.lo, hi: i.hi })
                .collect(),
            patched_versions: patched,
            severity: parse_severity(doc, &mut out.issues, &id),
        };

        if let Some(bad) = advisory
            .patched_versions
            .iter()
            .find(|p| advisory.affects(p))
        {
            out.issues.push(format!(
                "{id}/{package}: patched version {bad} lies inside the affected range, skipped"
            ));
            continue;
        }

        out.advisories.push(advisory);
    }

    out
}
