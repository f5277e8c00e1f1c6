//! Single-node metadata store: packument ingestion, advisory import, and
//! time-scoped history queries.
//!
//! Persistence is an append-only line-delimited JSON log
//! (`store/log.ndjson`) plus a rebuildable on-disk index keyed by package
//! name (`store/index.json`). The log is the source of truth; opening a
//! store replays it, and `flush` rewrites the index checkpoint.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::advisory::{parse_osv_document, Advisory};
use crate::semver::{compare_versions, parse_version, Constraint, Version};
use crate::time::{parse_ts, Timestamp};

pub const LOG_FILE: &str = "log.ndjson";
pub const INDEX_FILE: &str = "index.json";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown package {0:?}")]
    UnknownPackage(String),
    #[error("store unavailable: {0}")]
    Unavailable(String),
}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Unavailable(e.to_string())
    }
}

/// One published version of a package: the analytical core of a
/// packument entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionRecord {
    pub package_name: String,
    pub version: Version,
    #[serde(with = "crate::time::ts_serde")]
    pub published_at: Timestamp,
    #[serde(default)]
    pub dependencies: BTreeMap<String, Constraint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tarball_url: Option<String>,
    #[serde(default)]
    pub deleted: bool,
}

/// A dist-tag pointing at a version at some instant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistTagEvent {
    pub tag: String,
    pub version: Version,
    #[serde(with = "crate::time::ts_serde")]
    pub at: Timestamp,
}

/// A package's version records ordered by publish time (ties broken by
/// version order) together with its recorded dist-tag events.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PackageHistory {
    pub package_name: String,
    pub records: Vec<VersionRecord>,
    pub dist_tag_events: Vec<DistTagEvent>,
}

impl PackageHistory {
    pub fn versions(&self) -> impl Iterator<Item = &Version> {
        self.records.iter().map(|r| &r.version)
    }

    pub fn record_for(&self, version: &Version) -> Option<&VersionRecord> {
        self.records.iter().find(|r| &r.version == version)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum LogRecord {
    Version {
        record: VersionRecord,
    },
    Tombstone {
        package: String,
        version: Version,
    },
    Tag {
        package: String,
        tag: String,
        version: Version,
        #[serde(with = "crate::time::ts_serde")]
        at: Timestamp,
    },
    Advisory {
        advisory: Advisory,
    },
}

#[derive(Debug, Default)]
struct PackageState {
    records: BTreeMap<Version, VersionRecord>,
    tag_events: Vec<DistTagEvent>,
    log_offsets: Vec<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SkippedVersion {
    pub package: String,
    pub version: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InvalidDocument {
    pub document: String,
    pub reason: String,
}

/// Outcome of one `ingest_changes` batch. Invalid input never aborts the
/// stream; everything rejected is listed here with a reason.
#[derive(Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct IngestReport {
    pub documents: usize,
    pub versions_inserted: usize,
    pub versions_updated: usize,
    pub tag_events_recorded: usize,
    pub tombstones_recorded: usize,
    pub skipped_versions: Vec<SkippedVersion>,
    pub invalid_documents: Vec<InvalidDocument>,
}

impl IngestReport {
    pub fn data_errors(&self) -> usize {
        self.skipped_versions.len() + self.invalid_documents.len()
    }
}

#[derive(Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AdvisoryIngestReport {
    pub documents: usize,
    pub advisories_ingested: usize,
    pub issues: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct IndexFile {
    log_bytes: u64,
    packages: BTreeMap<String, IndexEntry>,
    advisories: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct IndexEntry {
    records: usize,
    offsets: Vec<u64>,
}

/// The metadata store. Single writer, in-memory read state replayed from
/// the log at open.
pub struct Store {
    dir: PathBuf,
    log_len: u64,
    packages: BTreeMap<String, PackageState>,
    advisories: BTreeMap<String, Vec<Advisory>>,
    writer: Option<BufWriter<File>>,
}

impl Store {
    /// Open (creating if needed) the store rooted at `dir` and replay its
    /// log into memory.
    pub fn open(dir: impl AsRef<Path>) -> Result<Store, StoreError> {
        let dir = dir.as_ref().to_path_buf();
        fs::create_dir_all(&dir)?;
        let mut store = Store {
            dir: dir.clone(),
            log_len: 0,
            packages: BTreeMap::new(),
            advisories: BTreeMap::new(),
            writer: None,
        };

        let log_path = dir.join(LOG_FILE);
        if log_path.exists() {
            let file = File::open(&log_path)?;
            let mut reader = BufReader::new(file);
            let mut line = String::new();
            let mut offset = 0u64;
            loop {
                line.clear();
                let n = reader.read_line(&mut line)?;
                if n == 0 {
                    break;
                }
                let trimmed = line.trim_end();
                if !trimmed.is_empty() {
                    let record: LogRecord = serde_json::from_str(trimmed).map_err(|e| {
                        StoreError::Unavailable(format!("corrupt log record at byte {offset}: {e}"))
                    })?;
                    store.apply(record, offset);
                }
                offset += n as u64;
            }
            store.log_len = offset;
        }
        Ok(store)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn apply(&mut self, record: LogRecord, offset: u64) {
        match record {
            LogRecord::Version { record } => {
                let state = self.packages.entry(record.package_name.clone()).or_default();
                state.log_offsets.push(offset);
                state.records.insert(record.version.clone(), record);
            }
            LogRecord::Tombstone { package, version } => {
                let state = self.packages.entry(package).or_default();
                state.log_offsets.push(offset);
                if let Some(r) = state.records.get_mut(&version) {
                    r.deleted = true;
                }
            }
            LogRecord::Tag {
                package,
                tag,
                version,
                at,
            } => {
                let state = self.packages.entry(package).or_default();
                state.log_offsets.push(offset);
                state.tag_events.push(DistTagEvent { tag, version, at });
            }
            LogRecord::Advisory { advisory } => {
                self.advisories
                    .entry(advisory.package_name.clone())
                    .or_default()
                    .push(advisory);
            }
        }
    }

    fn append(&mut self, record: &LogRecord) -> Result<u64, StoreError> {
        if self.writer.is_none() {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(self.dir.join(LOG_FILE))?;
            self.writer = Some(BufWriter::new(file));
        }
        let line = serde_json::to_string(record)
            .map_err(|e| StoreError::Unavailable(format!("serialize log record: {e}")))?;
        let offset = self.log_len;
        let w = self.writer.as_mut().expect("writer just initialized");
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        self.log_len += line.len() as u64 + 1;
        Ok(offset)
    }

    fn append_and_apply(&mut self, record: LogRecord) -> Result<(), StoreError> {
        let offset = self.append(&record)?;
        self.apply(record, offset);
        Ok(())
    }

    /// Flush the log and rewrite the index checkpoint atomically.
    pub fn flush(&mut self) -> Result<(), StoreError> {
        if let Some(w) = self.writer.as_mut() {
            w.flush()?;
        }
        let index = IndexFile {
            log_bytes: self.log_len,
            packages: self
                .packages
                .iter()
                .map(|(name, state)| {
                    (
                        name.clone(),
                        IndexEntry {
                            records: state.records.len(),
                            offsets: state.log_offsets.clone(),
                        },
                    )
                })
                .collect(),
            advisories: self.advisories.values().map(Vec::len).sum(),
        };
        let tmp = self.dir.join(format!("{INDEX_FILE}.tmp"));
        let body = serde_json::to_vec(&index)
            .map_err(|e| StoreError::Unavailable(format!("serialize index: {e}")))?;
        fs::write(&tmp, body)?;
        fs::rename(&tmp, self.dir.join(INDEX_FILE))?;
        Ok(())
    }

    pub fn close(mut self) -> Result<(), StoreError> {
        self.flush()
    }

    // -- ingestion ----------------------------------------------------------

    /// Ingest a sequence of change documents: either CouchDB-style change
    /// rows (`{seq, id, doc}` or `{id, deleted: true}`) or bare packuments.
    /// Replaying a document is a no-op.
    pub fn ingest_changes<I>(&mut self, docs: I) -> Result<IngestReport, StoreError>
    where
        I: IntoIterator<Item = Value>,
    {
        let mut report = IngestReport::default();
        let now = Utc::now();
        for doc in docs {
            report.documents += 1;
            self.ingest_one(doc, now, &mut report)?;
        }
        self.flush()?;
        Ok(report)
    }

    fn ingest_one(
        &mut self,
        doc: Value,
        now: Timestamp,
        report: &mut IngestReport,
    ) -> Result<(), StoreError> {
        // Change-row envelope: unwrap "doc"; bare deletion rows tombstone
        // every version of the named package.
        let packument = if let Some(obj) = doc.as_object() {
            if obj.get("deleted").and_then(Value::as_bool) == Some(true) {
                let Some(name) = obj.get("id").and_then(Value::as_str) else {
                    report.invalid_documents.push(InvalidDocument {
                        document: "<deletion>".into(),
                        reason: "deletion row without id".into(),
                    });
                    return Ok(());
                };
                let versions: Vec<Version> = self
                    .packages
                    .get(name)
                    .map(|s| {
                        s.records
                            .values()
                            .filter(|r| !r.deleted)
                            .map(|r| r.version.clone())
                            .collect()
                    })
                    .unwrap_or_default();
                for version in versions {
                    self.append_and_apply(LogRecord::Tombstone {
                        package: name.to_string(),
                        version,
                    })?;
                    report.tombstones_recorded += 1;
                }
                return Ok(());
            }
            match obj.get("doc") {
                Some(inner) => inner.clone(),
                None => doc.clone(),
            }
        } else {
            report.invalid_documents.push(InvalidDocument {
                document: doc.to_string().chars().take(60).collect(),
                reason: "change document is not a JSON object".into(),
            });
            return Ok(());
        };

        let Some(name) = packument.get("name").and_then(Value::as_str).map(String::from) else {
            report.invalid_documents.push(InvalidDocument {
                document: packument
                    .get("_id")
                    .and_then(Value::as_str)
                    .unwrap_or("<unnamed>")
                    .to_string(),
                reason: "packument has no name field".into(),
            });
            return Ok(());
        };

        let versions = packument.get("versions").and_then(Value::as_object);
        let time_map = packument.get("time").and_then(Value::as_object);
        let Some(versions) = versions else {
            report.invalid_documents.push(InvalidDocument {
                document: name,
                reason: "packument has no versions object".into(),
            });
            return Ok(());
        };

        let mut seen: Vec<Version> = Vec::new();
        for (version_text, version_doc) in versions {
            let version = match parse_version(version_text) {
                Ok(v) => v,
                Err(e) => {
                    report.skipped_versions.push(SkippedVersion {
                        package: name.clone(),
                        version: version_text.clone(),
                        reason: e.to_string(),
                    });
                    continue;
                }
            };
            let published_at = match time_map.and_then(|m| m.get(version_text)).and_then(Value::as_str) {
                Some(text) => match parse_ts(text) {
                    Ok(ts) => ts,
                    Err(e) => {
                        report.skipped_versions.push(SkippedVersion {
                            package: name.clone(),
                            version: version_text.clone(),
                            reason: e.to_string(),
                        });
                        continue;
                    }
                },
                None => {
                    report.skipped_versions.push(SkippedVersion {
                        package: name.clone(),
                        version: version_text.clone(),
                        reason: "version missing from time map".into(),
                    });
                    continue;
                }
            };
            if published_at.timestamp_millis() <= 0 {
                report.skipped_versions.push(SkippedVersion {
                    package: name.clone(),
                    version: version_text.clone(),
                    reason: "publish time not after the epoch".into(),
                });
                continue;
            }
            if published_at > now {
                report.skipped_versions.push(SkippedVersion {
                    package: name.clone(),
                    version: version_text.clone(),
                    reason: "publish time in the future".into(),
                });
                continue;
            }

            let dependencies: BTreeMap<String, Constraint> = version_doc
                .get("dependencies")
                .and_then(Value::as_object)
                .map(|deps| {
                    deps.iter()
                        .map(|(dep, val)| {
                            let raw = match val.as_str() {
                                Some(s) => s.to_string(),
                                None => val.to_string(),
                            };
                            (dep.clone(), raw.parse().expect("constraint parse is total"))
                        })
                        .collect()
                })
                .unwrap_or_default();

            let tarball_url = version_doc
                .pointer("/dist/tarball")
                .and_then(Value::as_str)
                .map(String::from);

            let record = VersionRecord {
                package_name: name.clone(),
                version: version.clone(),
                published_at,
                dependencies,
                tarball_url,
                deleted: false,
            };
            seen.push(version.clone());

            let existing = self.packages.get(&name).and_then(|s| s.records.get(&version));
            match existing {
                Some(current) if *current == record => {}
                Some(_) => {
                    self.append_and_apply(LogRecord::Version { record })?;
                    report.versions_updated += 1;
                }
                None => {
                    self.append_and_apply(LogRecord::Version { record })?;
                    report.versions_inserted += 1;
                }
            }
        }

        // Versions we hold that the fresh packument no longer lists have
        // been unpublished; mark them rather than dropping them.
        let vanished: Vec<Version> = self
            .packages
            .get(&name)
            .map(|s| {
                s.records
                    .values()
                    .filter(|r| !r.deleted && !seen.contains(&r.version))
                    .map(|r| r.version.clone())
                    .collect()
            })
            .unwrap_or_default();
        for version in vanished {
            self.append_and_apply(LogRecord::Tombstone {
                package: name.clone(),
                version,
            })?;
            report.tombstones_recorded += 1;
        }

        if let Some(tags) = packument.get("dist-tags").and_then(Value::as_object) {
            let modified = time_map
                .and_then(|m| m.get("modified"))
                .and_then(Value::as_str)
                .and_then(|t| parse_ts(t).ok());
            for (tag, version_value) in tags {
                let Some(version_text) = version_value.as_str() else { continue };
                let Ok(version) = parse_version(version_text) else {
                    report.skipped_versions.push(SkippedVersion {
                        package: name.clone(),
                        version: version_text.to_string(),
                        reason: format!("dist-tag {tag:?} points at malformed version"),
                    });
                    continue;
                };
                let at = time_map
                    .and_then(|m| m.get(version_text))
                    .and_then(Value::as_str)
                    .and_then(|t| parse_ts(t).ok())
                    .or(modified);
                let Some(at) = at else { continue };
                let event = DistTagEvent {
                    tag: tag.clone(),
                    version: version.clone(),
                    at,
                };
                let already = self
                    .packages
                    .get(&name)
                    .map(|s| s.tag_events.contains(&event))
                    .unwrap_or(false);
                if !already {
                    self.append_and_apply(LogRecord::Tag {
                        package: name.clone(),
                        tag: tag.clone(),
                        version,
                        at,
                    })?;
                    report.tag_events_recorded += 1;
                }
            }
        }

        Ok(())
    }

    /// Ingest OSV-format advisory documents. Returns how many advisories
    /// were stored; re-ingesting a known (id, package) pair is a no-op.
    pub fn ingest_advisories<I>(&mut self, docs: I) -> Result<AdvisoryIngestReport, StoreError>
    where
        I: IntoIterator<Item = Value>,
    {
        let mut report = AdvisoryIngestReport::default();
        for doc in docs {
            report.documents += 1;
            let parsed = parse_osv_document(&doc);
            report.issues.extend(parsed.issues);
            for advisory in parsed.advisories {
                let known = self
                    .advisories
                    .get(&advisory.package_name)
                    .map(|list| list.iter().any(|a| a.id == advisory.id))
                    .unwrap_or(false);
                if known {
                    continue;
                }
                self.append_and_apply_advisory(advisory)?;
                report.advisories_ingested += 1;
            }
        }
        self.flush()?;
        Ok(report)
    }

    fn append_and_apply_advisory(&mut self, advisory: Advisory) -> Result<(), StoreError> {
        let record = LogRecord::Advisory { advisory };
        let offset = self.append(&record)?;
        self.apply(record, offset);
        Ok(())
    }

    // -- queries ------------------------------------------------------------

    pub fn package_names(&self) -> impl Iterator<Item = &str> {
        self.packages.keys().map(String::as_str)
    }

    pub fn package_count(&self) -> usize {
        self.packages.len()
    }

    pub fn record_count(&self) -> usize {
        self.packages.values().map(|s| s.records.len()).sum()
    }

    pub fn contains_package(&self, name: &str) -> bool {
        self.packages.contains_key(name)
    }

    pub fn newest_publish_time(&self) -> Option<Timestamp> {
        self.packages
            .values()
            .flat_map(|s| s.records.values())
            .map(|r| r.published_at)
            .max()
    }

    /// The package's live (non-deleted) history as of `t`: exactly the
    /// records with `published_at <= t`, the boundary included.
    pub fn history_as_of(&self, name: &str, t: Timestamp) -> Result<PackageHistory, StoreError> {
        let state = self
            .packages
            .get(name)
            .ok_or_else(|| StoreError::UnknownPackage(name.to_string()))?;
        let mut records: Vec<VersionRecord> = state
            .records
            .values()
            .filter(|r| !r.deleted && r.published_at <= t)
            .cloned()
            .collect();
        records.sort_by(|a, b| {
            a.published_at
                .cmp(&b.published_at)
                .then_with(|| compare_versions(&a.version, &b.version))
        });
        let dist_tag_events = state
            .tag_events
            .iter()
            .filter(|e| e.at <= t)
            .cloned()
            .collect();
        Ok(PackageHistory {
            package_name: name.to_string(),
            records,
            dist_tag_events,
        })
    }

    /// The package's complete live history.
    pub fn history(&self, name: &str) -> Result<PackageHistory, StoreError> {
        self.history_as_of(name, Timestamp::MAX_UTC)
    }

    pub fn advisories_for(&self, name: &str) -> &[Advisory] {
        self.advisories.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn advisory_count(&self) -> usize {
        self.advisories.values().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;
    use tempfile::TempDir;

    fn v(s: &str) -> Version {
        parse_version(s).unwrap()
    }

    fn t(s: &str) -> Timestamp {
        parse_ts(s).unwrap()
    }

    fn packument(name: &str, versions: &[(&str, &str)]) -> Value {
        let mut vmap = serde_json::Map::new();
        let mut tmap = serde_json::Map::new();
        for (ver, at) in versions {
            vmap.insert(
                ver.to_string(),
                json!({"name": name, "version": ver, "dependencies": {}}),
            );
            tmap.insert(ver.to_string(), json!(at));
        }
        json!({"name": name, "versions": vmap, "time": tmap, "dist-tags": {}})
    }

    #[test]
    fn ingests_two_versions() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let doc = packument(
            "a",
            &[("1.0.0", "2020-01-01T00:00:00Z"), ("1.1.0", "2020-02-01T00:00:00Z")],
        );
        let report = store.ingest_changes([doc]).unwrap();
        assert_eq!(report.versions_inserted, 2);
        assert_eq!(report.data_errors(), 0);
        assert_eq!(store.record_count(), 2);
    }

    #[test]
    fn skips_versions_missing_from_time_map() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let doc = json!({
            "name": "a",
            "versions": {
                "1.0.0": {"name": "a", "version": "1.0.0"},
                "1.1.0": {"name": "a", "version": "1.1.0"}
            },
            "time": {"1.0.0": "2020-01-01T00:00:00Z"}
        });
        let report = store.ingest_changes([doc]).unwrap();
        assert_eq!(report.versions_inserted, 1);
        assert_eq!(report.skipped_versions.len(), 1);
        assert_eq!(report.skipped_versions[0].version, "1.1.0");
        assert!(report.skipped_versions[0].reason.contains("time map"));
    }

    #[test]
    fn replay_is_idempotent() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let doc = packument("a", &[("1.0.0", "2020-01-01T00:00:00Z")]);
        store.ingest_changes([doc.clone()]).unwrap();
        let log_len_before = store.log_len;
        let report = store.ingest_changes([doc]).unwrap();
        assert_eq!(report.versions_inserted, 0);
        assert_eq!(report.versions_updated, 0);
        assert_eq!(store.log_len, log_len_before);
    }

    #[test]
    fn change_row_envelopes_unwrap() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let row = json!({
            "seq": 42,
            "id": "a",
            "doc": packument("a", &[("1.0.0", "2020-01-01T00:00:00Z")])
        });
        let report = store.ingest_changes([row]).unwrap();
        assert_eq!(report.versions_inserted, 1);
    }

    #[test]
    fn deletion_rows_tombstone_the_package() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes([packument("a", &[("1.0.0", "2020-01-01T00:00:00Z")])])
            .unwrap();
        let report = store
            .ingest_changes([json!({"id": "a", "deleted": true, "seq": 7})])
            .unwrap();
        assert_eq!(report.tombstones_recorded, 1);
        let history = store.history("a").unwrap();
        assert!(history.records.is_empty());
        // The record still exists as a tombstone, not a gap.
        assert!(store.contains_package("a"));
    }

    #[test]
    fn history_as_of_boundaries() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let t1 = "2020-01-01T00:00:00Z";
        let t2 = "2020-06-01T00:00:00Z";
        store
            .ingest_changes([packument("a", &[("1.0.0", t1), ("2.0.0", t2)])])
            .unwrap();

        let mid = store.history_as_of("a", t("2020-03-01T00:00:00Z")).unwrap();
        assert_eq!(mid.versions().collect::<Vec<_>>(), vec![&v("1.0.0")]);

        let before = store.history_as_of("a", t("2019-01-01T00:00:00Z")).unwrap();
        assert!(before.records.is_empty());

        // The boundary is inclusive.
        let at_t2 = store.history_as_of("a", t(t2)).unwrap();
        assert_eq!(at_t2.records.len(), 2);

        assert!(matches!(
            store.history_as_of("nope", t(t1)),
            Err(StoreError::UnknownPackage(_))
        ));
    }

    #[test]
    fn durability_roundtrip() {
        let dir = TempDir::new().unwrap();
        {
            let mut store = Store::open(dir.path()).unwrap();
            let mut doc = packument(
                "a",
                &[("1.0.0", "2020-01-01T00:00:00.123Z"), ("1.1.0", "2020-02-01T00:00:00Z")],
            );
            doc["versions"]["1.0.0"]["dependencies"] = json!({"b": "^2.0.0", "c": "latest"});
            doc["versions"]["1.0.0"]["dist"] = json!({"tarball": "https://x/a-1.0.0.tgz"});
            doc["dist-tags"] = json!({"latest": "1.1.0", "beta": "1.0.0"});
            store.ingest_changes([doc]).unwrap();
            store
                .ingest_advisories([json!({
                    "id": "GHSA-1",
                    "database_specific": {"severity": "HIGH"},
                    "affected": [{
                        "package": {"ecosystem": "npm", "name": "a"},
                        "ranges": [{"type": "SEMVER", "events": [
                            {"introduced": "1.0.0"}, {"fixed": "1.1.0"}
                        ]}]
                    }]
                })])
                .unwrap();
            let before = store.history("a").unwrap();
            store.close().unwrap();

            let reopened = Store::open(dir.path()).unwrap();
            let after = reopened.history("a").unwrap();
            assert_eq!(before, after);
            assert_eq!(reopened.advisory_count(), 1);
            assert_eq!(reopened.advisories_for("a")[0].id, "GHSA-1");
        }
    }

    #[test]
    fn index_is_rebuildable() {
        let dir = TempDir::new().unwrap();
        {
            let mut store = Store::open(dir.path()).unwrap();
            store
                .ingest_changes([packument("a", &[("1.0.0", "2020-01-01T00:00:00Z")])])
                .unwrap();
            store.close().unwrap();
        }
        assert!(dir.path().join(INDEX_FILE).exists());
        fs::remove_file(dir.path().join(INDEX_FILE)).unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        assert_eq!(store.record_count(), 1);
        store.flush().unwrap();
        assert!(dir.path().join(INDEX_FILE).exists());
    }

    #[test]
    fn future_and_epoch_timestamps_are_skipped() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let doc = packument(
            "a",
            &[("1.0.0", "2999-01-01T00:00:00Z"), ("1.1.0", "1970-01-01T00:00:00Z")],
        );
        let report = store.ingest_changes([doc]).unwrap();
        assert_eq!(report.versions_inserted, 0);
        assert_eq!(report.skipped_versions.len(), 2);
    }

    #[test]
    fn advisory_replay_is_noop() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        let doc = json!({
            "id": "GHSA-2",
            "database_specific": {"severity": "LOW"},
            "affected": [{
                "package": {"ecosystem": "npm", "name": "a"},
                "ranges": [{"type": "SEMVER", "events": [{"introduced": "0"}]}]
            }]
        });
        assert_eq!(store.ingest_advisories([doc.clone()]).unwrap().advisories_ingested, 1);
        assert_eq!(store.ingest_advisories([doc]).unwrap().advisories_ingested, 0);
        assert_eq!(store.ingest_advisories(Vec::<Value>::new()).unwrap().advisories_ingested, 0);
    }

    #[test]
    fn vanished_versions_are_tombstoned() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes([packument(
                "a",
                &[("1.0.0", "2020-01-01T00:00:00Z"), ("1.1.0", "2020-02-01T00:00:00Z")],
            )])
            .unwrap();
        let report = store
            .ingest_changes([packument("a", &[("1.0.0", "2020-01-01T00:00:00Z")])])
            .unwrap();
        assert_eq!(report.tombstones_recorded, 1);
        let history = store.history("a").unwrap();
        assert_eq!(history.versions().collect::<Vec<_>>(), vec![&v("1.0.0")]);
    }
}
