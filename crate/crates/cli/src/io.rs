//! Stream helpers: NDJSON files, CSV tables, progress lines.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn read_ndjson<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).with_context(|| format!("open {}", path.display()))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line)
            .with_context(|| format!("{}:{}: malformed record", path.display(), idx + 1))?;
        out.push(value);
    }
    Ok(out)
}

/// Read a file of JSON values: NDJSON, a top-level array, or one object.
pub fn read_json_values(path: &Path) -> Result<Vec<serde_json::Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("open {}", path.display()))?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') {
        let values: Vec<serde_json::Value> =
            serde_json::from_str(trimmed).with_context(|| format!("{}: malformed JSON array", path.display()))?;
        return Ok(values);
    }
    // A single multi-line JSON object, or NDJSON.
    if let Ok(single) = serde_json::from_str::<serde_json::Value>(trimmed) {
        return Ok(vec![single]);
    }
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: malformed JSON", path.display(), idx + 1))?;
        out.push(value);
    }
    Ok(out)
}

pub struct NdjsonWriter {
    writer: BufWriter<File>,
    pub lines: u64,
}

impl NdjsonWriter {
    pub fn create(path: &Path) -> Result<NdjsonWriter> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let file = File::create(path).with_context(|| format!("create {}", path.display()))?;
        Ok(NdjsonWriter {
            writer: BufWriter::new(file),
            lines: 0,
        })
    }

    pub fn write(&mut self, record: &impl Serialize) -> Result<()> {
        serde_json::to_writer(&mut self.writer, record)?;
        self.writer.write_all(b"\n")?;
        self.lines += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64> {
        self.writer.flush()?;
        Ok(self.lines)
    }
}

/// Progress reporting to stderr, one line every `every` ticks.
pub struct Progress {
    label: &'static str,
    total: usize,
    done: usize,
    every: usize,
}

impl Progress {
    pub fn new(label: &'static str, total: usize) -> Progress {
        Progress {
            label,
            total,
            done: 0,
            every: 10_000,
        }
    }

    pub fn tick(&mut self, amount: usize) {
        let before = self.done / self.every;
        self.done += amount;
        if self.done / self.every > before {
            eprintln!("{}: {}/{}", self.label, self.done, self.total);
        }
    }

    pub fn finish(&self) {
        eprintln!("{}: {}/{} done", self.label, self.done, self.total);
    }
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("create {}", path.display()))?;
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Fixed float formatting for CSV cells: six decimal places.
pub fn csv_float(v: f64) -> String {
    format!("{v:.6}")
}
