//! Run manifests: one JSON document per invocation recording the
//! effective configuration, inputs, outputs, and counters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Utc;
use serde::Serialize;
use sha2::{Digest, Sha256};

use retrograde_core::time::{format_ts, Timestamp};

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub input_paths: Vec<String>,
    pub output_paths: Vec<String>,
    pub started_at: String,
    pub finished_at: String,
    pub counters: BTreeMap<String, u64>,
}

/// Tracks one run from argument parsing to the final manifest write.
pub struct RunTracker {
    subcommand: String,
    config_hash: String,
    input_paths: Vec<PathBuf>,
    output_paths: Vec<PathBuf>,
    started_at: Timestamp,
    counters: BTreeMap<String, u64>,
}

impl RunTracker {
    /// `config` is the subcommand's effective option struct; its canonical
    /// JSON form is hashed, so flag order never changes the hash.
    pub fn new(subcommand: &str, config: &impl Serialize) -> Result<RunTracker> {
        let canonical = serde_json::to_string(config).context("serialize effective config")?;
        let digest = Sha256::digest(canonical.as_bytes());
        Ok(RunTracker {
            subcommand: subcommand.to_string(),
            config_hash: hex::encode(digest),
            input_paths: Vec::new(),
            output_paths: Vec::new(),
            started_at: Utc::now(),
            counters: BTreeMap::new(),
        })
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.input_paths.push(path.into());
    }

    pub fn output(&mut self, path: impl Into<PathBuf>) {
        self.output_paths.push(path.into());
    }

    pub fn count(&mut self, key: &str, amount: u64) {
        *self.counters.entry(key.to_string()).or_insert(0) += amount;
    }

    pub fn set_count(&mut self, key: &str, value: u64) {
        self.counters.insert(key.to_string(), value);
    }

    pub fn counters(&self) -> &BTreeMap<String, u64> {
        &self.counters
    }

    /// Default manifest location: next to the primary output, or a file
    /// named after the subcommand when the run produced no files.
    pub fn default_manifest_path(&self) -> PathBuf {
        match self.output_paths.first() {
            Some(primary) => {
                let mut name = primary.file_name().unwrap_or_default().to_os_string();
                name.push(".manifest.json");
                primary.with_file_name(name)
            }
            None => PathBuf::from(format!("{}.manifest.json", self.subcommand)),
        }
    }

    /// Write the manifest atomically (temp file + rename).
    pub fn write(&self, path: Option<&Path>) -> Result<PathBuf> {
        let path = path
            .map(Path::to_path_buf)
            .unwrap_or_else(|| self.default_manifest_path());
        let manifest = RunManifest {
            subcommand: self.subcommand.clone(),
            config_hash: self.config_hash.clone(),
            input_paths: self.input_paths.iter().map(|p| p.display().to_string()).collect(),
            output_paths: self.output_paths.iter().map(|p| p.display().to_string()).collect(),
            started_at: format_ts(self.started_at),
            finished_at: format_ts(Utc::now()),
            counters: self.counters.clone(),
        };
        let body = serde_json::to_vec_pretty(&manifest).context("serialize run manifest")?;
        let tmp = path.with_extension("manifest.json.tmp");
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        std::fs::write(&tmp, body).with_context(|| format!("write {}", tmp.display()))?;
        std::fs::rename(&tmp, &path).with_context(|| format!("rename into {}", path.display()))?;
        Ok(path)
    }
}
