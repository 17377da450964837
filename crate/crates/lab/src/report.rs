//! `report.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::LabError;

#[derive(Debug, Serialize)]
pub struct Versions {
    pub lma_core: &'static str,
    pub lma_lab: &'static str,
}

impl Default for Versions {
    fn default() -> Self {
        Self {
            lma_core: lma_core::VERSION,
            lma_lab: env!("CARGO_PKG_VERSION"),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub pipeline: &'static str,
    pub versions: Versions,
    /// SHA-256 of the configuration file bytes.
    pub config_sha256: String,
    pub seed: u64,
    pub wall_time_s: f64,
    /// Every tolerance and cap actually used.
    pub tolerances: BTreeMap<String, Value>,
    pub warnings: Vec<String>,
    /// Artifacts written, in order.
    pub files: Vec<String>,
    pub results: BTreeMap<String, Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Report {
    pub fn write(&self, dir: &Path) -> Result<(), LabError> {
        let path = dir.join("report.json");
        let text = serde_json::to_string_pretty(self).map_err(|e| LabError::Data(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|e| LabError::io(&path, e))
    }
}
