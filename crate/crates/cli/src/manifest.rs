//! Run manifests: every file-producing invocation records its resolved
//! parameters, seed, and output checksums next to the data it wrote.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::SecondsFormat;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub generated_at: String,
    pub config: serde_json::Value,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

// SOURCE_DATE_EPOCH pins the timestamp so archived runs can be compared
// byte for byte; otherwise wall-clock UTC.
fn timestamp() -> String {
    if let Ok(v) = std::env::var("SOURCE_DATE_EPOCH") {
        if let Ok(secs) = v.trim().parse::<i64>() {
            if let Some(dt) = chrono::DateTime::from_timestamp(secs, 0) {
                return dt.to_rfc3339_opts(SecondsFormat::Secs, true);
            }
        }
    }
    chrono::Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl RunManifest {
    pub fn new(command: &'static str, seed: u64, config: serde_json::Value) -> Self {
        RunManifest {
            tool: "dplab",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            generated_at: timestamp(),
            config,
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, name: impl Into<String>, bytes: &[u8]) {
        self.outputs.push(OutputRecord {
            file: name.into(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn write_to(&self, path: &Path) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Runtime(format!("manifest serialization: {e}")))?;
        text.push('\n');
        write_file(path, text.as_bytes())
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// Sibling manifest path for a single-file output: `metrics.csv` gets
/// `metrics.manifest.json`.
pub fn sibling_manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Print a report to stdout, or write it to `out` with a manifest alongside.
pub fn deliver_report(
    report: &str,
    out: Option<&Path>,
    command: &'static str,
    seed: u64,
    config: serde_json::Value,
) -> Result<(), CliError> {
    match out {
        None => {
            print!("{report}");
            Ok(())
        }
        Some(p) => {
            write_file(p, report.as_bytes())?;
            let mut manifest = RunManifest::new(command, seed, config);
            manifest.record(file_name(p), report.as_bytes());
            manifest.write_to(&sibling_manifest_path(p))
        }
    }
}
