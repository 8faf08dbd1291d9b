//! Reproducibility record written next to every output.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Everything needed to reproduce a run bit for bit.
///
/// Wall-clock time is kept in a separate `timing.json` so that the manifest
/// itself is byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub master_seed: u64,
    /// Hex SHA-256 of the canonical JSON of the effective configuration.
    pub config_hash: String,
    pub library_version: String,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip)]
    pub wall_clock_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, master_seed: u64, canonical_config: &serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            master_seed,
            config_hash: config_hash(canonical_config),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            tolerances: default_tolerances(),
            wall_clock_seconds: None,
        }
    }

    /// Writes `manifest.json` and, if timed, `timing.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(dir.join("manifest.json"), body + "\n")?;
        if let Some(secs) = self.wall_clock_seconds {
            let t = serde_json::json!({ "command": self.command, "wall_clock_seconds": secs });
            std::fs::write(dir.join("timing.json"), t.to_string() + "\n")?;
        }
        Ok(())
    }
}

/// Hex SHA-256 of `value` serialized compactly (object keys in insertion order).
pub fn config_hash(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("json value serializes");
    let digest = Sha256::digest(&bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn default_tolerances() -> BTreeMap<String, f64> {
    BTreeMap::from([
        ("kernels.generic_quadrature_rel".to_string(), crate::kernels::GENERIC_QUAD_REL_TOL),
        ("matrixlab.psd_rel".to_string(), crate::matrixlab::DEFAULT_TOL),
        ("schemes.blowup_cap".to_string(), crate::schemes::DEFAULT_BLOWUP_CAP),
    ])
}
