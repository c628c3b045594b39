//! Run manifest: config hash, seed, crate versions, per-file checksums, and
//! wall-clock time. Written last, after every artifact is on disk. Identical
//! (config, seed) runs reproduce identical checksums; only the wall-clock
//! field varies.

use crate::CliError;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
    pub artifact_versions: BTreeMap<String, String>,
    pub files: BTreeMap<String, String>,
    pub wall_clock_seconds: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(experiment: &str, config_bytes: &[u8], seed: Option<u64>) -> Self {
        let mut artifact_versions = BTreeMap::new();
        artifact_versions.insert("qflab".to_string(), qflab_version());
        artifact_versions.insert(
            "qflab-cli".to_string(),
            env!("CARGO_PKG_VERSION").to_string(),
        );
        RunManifest {
            experiment: experiment.to_string(),
            config_sha256: sha256_hex(config_bytes),
            seed,
            artifact_versions,
            files: BTreeMap::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn record_file(&mut self, name: &str, bytes: &[u8]) {
        self.files.insert(name.to_string(), sha256_hex(bytes));
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}

fn qflab_version() -> String {
    // the library crate shares the workspace version
    env!("CARGO_PKG_VERSION").to_string()
}
