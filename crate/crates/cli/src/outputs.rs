//! Result files and their manifest.

use std::fs;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const SUMMARY: &str = "summary.json";
pub const REPLICATES: &str = "replicates.csv";
pub const CURVES: &str = "curves.csv";
pub const MANIFEST: &str = "manifest.json";

/// A CSV table with a header row. Numbers are written in shortest
/// round-trip form.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let wrap = |e: csv::Error| CliError::Numerical(format!("csv: {e}"));
        w.write_record(&self.header).map_err(wrap)?;
        for r in &self.rows {
            w.write_record(r).map_err(wrap)?;
        }
        w.into_inner().map_err(|e| CliError::Numerical(format!("csv: {e}")))
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}

/// What an experiment produces before anything touches the disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub replicates: Table,
    pub curves: Table,
    pub replicate_seeds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub replicate_seeds: Vec<u64>,
    pub tool_version: String,
    pub workers: usize,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub files: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the three result files and the manifest into `dir`. Anything
/// already written is removed again if a later write fails.
pub fn write_all(
    dir: &Path,
    outcome: &Outcome,
    config: &ExperimentConfig,
    workers: usize,
    started: DateTime<Utc>,
) -> Result<ExperimentManifest> {
    let result = (|| {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut summary = serde_json::to_vec_pretty(&outcome.summary).map_err(|e| CliError::Numerical(e.to_string()))?;
        summary.push(b'\n');
        let files = [(SUMMARY, summary), (REPLICATES, outcome.replicates.to_bytes()?), (CURVES, outcome.curves.to_bytes()?)];
        let mut digests = Vec::new();
        for (name, bytes) in &files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            digests.push(FileDigest { name: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        }
        let manifest = ExperimentManifest {
            config: config.clone(),
            master_seed: config.seed,
            replicate_seeds: outcome.replicate_seeds.clone(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            started,
            finished: Utc::now(),
            files: digests,
        };
        let path = dir.join(MANIFEST);
        let mut bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Numerical(e.to_string()))?;
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    })();
    if result.is_err() {
        remove_outputs(dir);
    }
    result
}

/// Deletes any result files in `dir`.
pub fn remove_outputs(dir: &Path) {
    for name in [SUMMARY, REPLICATES, CURVES, MANIFEST] {
        let _ = fs::remove_file(dir.join(name));
    }
}
