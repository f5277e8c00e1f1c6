//! Tarball diffing: classify what an update actually changed.
//!
//! Two gzip-compressed tar archives are walked entry by entry, file
//! contents are hashed, and the pair is classified by whether code files
//! (`.js`, `.ts`, `.jsx`, `.tsx`) changed and whether the manifest's
//! dependency-bearing fields changed. Comparison is content-based; tar
//! mtimes and other header noise never matter.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeClass {
    CodeOnly,
    DepsOnly,
    Both,
    Neither,
}

impl ChangeClass {
    pub const ALL: [ChangeClass; 4] = [
        ChangeClass::CodeOnly,
        ChangeClass::DepsOnly,
        ChangeClass::Both,
        ChangeClass::Neither,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ChangeClass::CodeOnly => "code-only",
            ChangeClass::DepsOnly => "deps-only",
            ChangeClass::Both => "both",
            ChangeClass::Neither => "neither",
        }
    }

    fn from_flags(code_changed: bool, deps_changed: bool) -> ChangeClass {
        match (code_changed, deps_changed) {
            (true, true) => ChangeClass::Both,
            (true, false) => ChangeClass::CodeOnly,
            (false, true) => ChangeClass::DepsOnly,
            (false, false) => ChangeClass::Neither,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChangeKind {
    Added,
    Removed,
    Modified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub kind: ChangeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiffOutcome {
    pub class: ChangeClass,
    pub changes: Vec<FileChange>,
}

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("corrupt archive {path:?}: {reason}")]
    CorruptArchive { path: String, reason: String },
}

const CODE_EXTENSIONS: [&str; 4] = ["js", "ts", "jsx", "tsx"];

fn is_code_path(path: &str) -> bool {
    path.rsplit_once('.')
        .map(|(_, ext)| {
            CODE_EXTENSIONS
                .iter()
                .any(|code| ext.eq_ignore_ascii_case(code))
        })
        .unwrap_or(false)
}

/// Registry tarballs wrap everything in a uniform `package/` directory.
fn strip_package_prefix(path: &str) -> &str {
    path.strip_prefix("package/").unwrap_or(path)
}

struct ArchiveContents {
    /// Path (prefix-stripped) to content digest.
    files: BTreeMap<String, [u8; 32]>,
    /// Raw bytes of the root manifest, when present.
    manifest: Option<Vec<u8>>,
}

fn read_archive<R: Read>(reader: R, label: &str) -> Result<ArchiveContents, DiffError> {
    let corrupt = |reason: String| DiffError::CorruptArchive {
        path: label.to_string(),
        reason,
    };

    let gz = flate2::read::GzDecoder::new(reader);
    let mut archive = tar::Archive::new(gz);
    let mut files = BTreeMap::new();
    let mut manifest = None;

    let entries = archive.entries().map_err(|e| corrupt(e.to_string()))?;
    for entry in entries {
        let mut entry = entry.map_err(|e| corrupt(e.to_string()))?;
        let header_type = entry.header().entry_type();
        if !header_type.is_file() {
            continue;
        }
        let path = entry
            .path()
            .map_err(|e| corrupt(e.to_string()))?
            .to_string_lossy()
            .into_owned();
        let path = strip_package_prefix(&path).to_string();

        let mut hasher = Sha256::new();
        let mut buf = [0u8; 32 * 1024];
        let mut content = if path == "package.json" {
            Some(Vec::new())
        } else {
            None
        };
        loop {
            let n = entry.read(&mut buf).map_err(|e| corrupt(e.to_string()))?;
            if n == 0 {
                break;
            }
            hasher.update(&buf[..n]);
            if let Some(c) = content.as_mut() {
                c.extend_from_slice(&buf[..n]);
            }
        }
        if let Some(c) = content {
            manifest = Some(c);
        }
        files.insert(path, hasher.finalize().into());
    }

    Ok(ArchiveContents { files, manifest })
}

/// The dependency-bearing manifest fields, parsed. Whitespace and key
/// order in the raw file are irrelevant; a missing or unparseable
/// manifest contributes empty maps.
fn dependency_fields(manifest: Option<&[u8]>) -> [BTreeMap<String, String>; 4] {
    let parsed: Option<Value> = manifest.and_then(|bytes| serde_json::from_slice(bytes).ok());
    let field = |name: &str| -> BTreeMap<String, String> {
        parsed
            .as_ref()
            .and_then(|v| v.get(name))
            .and_then(Value::as_object)
            .map(|obj| {
                obj.iter()
                    .map(|(k, v)| {
                        let text = match v.as_str() {
                            Some(s) => s.to_string(),
                            None => v.to_string(),
                        };
                        (k.clone(), text)
                    })
                    .collect()
            })
            .unwrap_or_default()
    };
    [
        field("dependencies"),
        field("devDependencies"),
        field("peerDependencies"),
        field("optionalDependencies"),
    ]
}

/// Classify the content change between two version tarballs.
pub fn classify_update_contents<A: Read, B: Read>(
    from_tarball: A,
    to_tarball: B,
) -> Result<DiffOutcome, DiffError> {
    classify_labeled(from_tarball, "from", to_tarball, "to")
}

/// Like [`classify_update_contents`] with archive labels for error
/// reporting (usually file paths).
pub fn classify_labeled<A: Read, B: Read>(
    from_tarball: A,
    from_label: &str,
    to_tarball: B,
    to_label: &str,
) -> Result<DiffOutcome, DiffError> {
    let from = read_archive(from_tarball, from_label)?;
    let to = read_archive(to_tarball, to_label)?;

    let mut changes: Vec<FileChange> = Vec::new();
    for (path, digest) in &from.files {
        match to.files.get(path) {
            None => changes.push(FileChange {
                path: path.clone(),
                kind: ChangeKind::Removed,
            }),
            Some(other) if other != digest => changes.push(FileChange {
                path: path.clone(),
                kind: ChangeKind::Modified,
            }),
            Some(_) => {}
        }
    }
    for path in to.files.keys() {
        if !from.files.contains_key(path) {
            changes.push(FileChange {
                path: path.clone(),
                kind: ChangeKind::Added,
            });
        }
    }
    changes.sort_by(|a, b| a.path.cmp(&b.path));

    let code_changed = changes.iter().any(|c| is_code_path(&c.path));
    let deps_changed =
        dependency_fields(from.manifest.as_deref()) != dependency_fields(to.manifest.as_deref());

    Ok(DiffOutcome {
        class: ChangeClass::from_flags(code_changed, deps_changed),
        changes,
    })
}

/// Per-package, per-increment-type proportions of change classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContentDistributionRow {
    pub package_name: String,
    pub increment: crate::semver::IncrementType,
    pub code_only: f64,
    pub deps_only: f64,
    pub both: f64,
    pub neither: f64,
    pub updates: usize,
}

/// Aggregate classified updates per package and increment type. Rows are
/// normalized within each (package, increment) cell; packages never pool.
pub fn content_distribution(
    classified: &[(String, crate::semver::IncrementType, ChangeClass)],
) -> Vec<ContentDistributionRow> {
    let mut cells: BTreeMap<(&str, crate::semver::IncrementType), [usize; 4]> = BTreeMap::new();
    for (package, increment, class) in classified {
        let counts = cells.entry((package.as_str(), *increment)).or_default();
        let idx = ChangeClass::ALL.iter().position(|c| c == class).expect("total");
        counts[idx] += 1;
    }
    cells
        .into_iter()
        .map(|((package, increment), counts)| {
            let total: usize = counts.iter().sum();
            let frac = |i: usize| counts[i] as f64 / total as f64;
            ContentDistributionRow {
                package_name: package.to_string(),
                increment,
                code_only: frac(0),
                deps_only: frac(1),
                both: frac(2),
                neither: frac(3),
                updates: total,
            }
        })
        .collect()
}
