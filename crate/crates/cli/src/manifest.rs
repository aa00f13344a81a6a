//! Run manifests and config hashing.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// SHA-256 of the canonical form of a JSON document: keys sorted, no
/// insignificant whitespace.
pub fn config_hash(text: &str) -> Result<String, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    Ok(hex(&Sha256::digest(value.to_string().as_bytes())))
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    Ok(hex(&Sha256::digest(std::fs::read(path)?)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the output directory.
    pub path: String,
    pub kind: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_path: String,
    pub config_sha256: Option<String>,
    pub seed: Option<u64>,
    pub threads: usize,
    pub artifacts: Vec<Artifact>,
    /// Seconds per stage.
    pub timings: BTreeMap<String, f64>,
    /// `complete`, or `incomplete` when a stage failed.
    pub status: String,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, config_path: &Path) -> Self {
        RunManifest {
            tool_version: wavedsm_core::VERSION.to_string(),
            command: command.to_string(),
            config_path: config_path.display().to_string(),
            config_sha256: None,
            seed: None,
            threads: rayon::current_num_threads(),
            artifacts: Vec::new(),
            timings: BTreeMap::new(),
            status: "incomplete".into(),
            error: None,
        }
    }

    /// Records a file already written under `out`.
    pub fn add(&mut self, out: &Path, rel: &str, kind: &str) -> std::io::Result<()> {
        let sha256 = file_sha256(&out.join(rel))?;
        self.artifacts.push(Artifact { path: rel.to_string(), kind: kind.to_string(), sha256 });
        Ok(())
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let t = Instant::now();
        let r = f(self);
        *self.timings.entry(stage.to_string()).or_insert(0.0) += t.elapsed().as_secs_f64();
        r
    }

    pub fn write(&self, out: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(out.join("manifest.json"), text + "\n")
    }
}
