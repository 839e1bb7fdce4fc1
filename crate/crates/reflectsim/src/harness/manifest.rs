//! Run manifests: a TOML record of what a command produced, with content
//! hashes for every output file. Written atomically (temp file + rename).

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const MANIFEST_FORMAT: &str = "reflectsim-manifest v1";
pub const MANIFEST_NAME: &str = "manifest.toml";

/// One output file of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Per-arm, per-seed result summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub algo: String,
    pub seed: u64,
    #[serde(default)]
    pub failed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_rssi_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_rssi_dbm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_reward: Option<f64>,
}

/// Everything recorded about one command invocation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub command: String,
    pub tool_version: String,
    pub created_unix_s: u64,
    pub wall_clock_s: f64,
    /// SHA-256 of the configuration snapshot written alongside.
    pub config_sha256: String,
    /// Format version per artifact kind.
    pub formats: BTreeMap<String, String>,
    #[serde(default)]
    pub files: Vec<FileEntry>,
    #[serde(default)]
    pub seed_summaries: Vec<SeedSummary>,
}

impl RunManifest {
    pub fn new(command: &str, config_sha256: &str) -> Self {
        let created_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut formats = BTreeMap::new();
        for (k, v) in [
            ("checkpoint", "reflectsim-ckpt v1"),
            ("config_snapshot", "toml v1"),
            ("training_csv", "v1"),
            ("snapshots_csv", "v1"),
            ("evaluation_csv", "v1"),
            ("heatmap_csv", "v1"),
            ("heatmap_ppm", "P6"),
            ("heatmap_meta", "toml v1"),
            ("summary_csv", "v1"),
        ] {
            formats.insert(k.to_string(), v.to_string());
        }
        RunManifest {
            format: MANIFEST_FORMAT.to_string(),
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix_s,
            wall_clock_s: 0.0,
            config_sha256: config_sha256.to_string(),
            formats,
            files: Vec::new(),
            seed_summaries: Vec::new(),
        }
    }

    /// Record a file already written into `dir`, hashing its content.
    pub fn record_file(&mut self, dir: &Path, name: &str) -> Result<()> {
        let data = std::fs::read(dir.join(name))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            bytes: data.len() as u64,
            sha256: sha256_hex(&data),
        });
        Ok(())
    }

    /// Write `manifest.toml` into `dir` atomically.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let text = toml::to_string_pretty(self).expect("manifest serializes to TOML");
        write_atomic(&dir.join(MANIFEST_NAME), text.as_bytes())
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_NAME))?;
        toml::from_str(&text).map_err(|e| Error::MalformedFile(format!("manifest: {e}")))
    }
}

pub fn sha256_hex(data: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(data);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(out, "{byte:02x}").expect("writing to String cannot fail");
    }
    out
}

/// Write via a sibling temp file and rename, so readers never observe a
/// partially written file.
pub fn write_atomic(path: &Path, data: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, data)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
