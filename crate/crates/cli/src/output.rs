// SPDX-License-Identifier: Apache-2.0

//! Output directory, CSV/JSON writers and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_SCHEMA: u32 = 1;

/// Version of each output format; bumped whenever columns or keys change.
pub fn schema_version(kind: &str) -> u32 {
    match kind {
        "spectrum" | "pt" | "tau" | "phase-cells" | "phase-matrix" | "reset-scan" | "reset-beta" | "histogram"
        | "f1" | "fit" | "report" | "query" | "metadata" | "summary" => 1,
        _ => 0,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub schema: String,
    pub schema_version: u32,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub manifest_schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub started_utc: String,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputRecord>,
}

/// Collects output files for one command and writes the manifest.
pub struct Run {
    dir: PathBuf,
    command: String,
    parameters: serde_json::Value,
    seeds: Vec<u64>,
    started_utc: String,
    start: Instant,
    outputs: Vec<OutputRecord>,
}

pub fn default_out_dir(command: &str) -> PathBuf {
    let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
    Path::new("out").join(format!("{stamp}-{command}"))
}

impl Run {
    pub fn new<P: Serialize>(dir: PathBuf, command: &str, parameters: &P) -> Result<Self, CliError> {
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            command: command.to_string(),
            parameters: serde_json::to_value(parameters)?,
            seeds: Vec::new(),
            started_utc: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            start: Instant::now(),
            outputs: Vec::new(),
        })
    }

    pub fn add_seed(&mut self, seed: u64) {
        self.seeds.push(seed);
    }

    fn record(&mut self, file: &str, schema: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(file), bytes)?;
        self.outputs.push(OutputRecord {
            file: file.to_string(),
            schema: schema.to_string(),
            schema_version: schema_version(schema),
            bytes: bytes.len() as u64,
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    /// Write serialisable rows as CSV with a header line.
    pub fn write_csv<R: Serialize>(&mut self, file: &str, schema: &str, rows: &[R]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.record(file, schema, &bytes)
    }

    /// Write pre-built records (header first) as CSV.
    pub fn write_records(&mut self, file: &str, schema: &str, records: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        for r in records {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.record(file, schema, &bytes)
    }

    pub fn write_json<V: Serialize>(&mut self, file: &str, schema: &str, value: &V) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.record(file, schema, &bytes)
    }

    pub fn finish(self, jobs: usize) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            manifest_schema: MANIFEST_SCHEMA,
            tool: "msearch",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            parameters: self.parameters,
            seeds: self.seeds,
            jobs,
            started_utc: self.started_utc,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(self.dir)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hex_digest_of_empty_input() {
        assert_eq!(
            hex(&Sha256::digest(b"")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
