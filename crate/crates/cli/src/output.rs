//! Artifact writing with content hashes and the run manifest.

use crate::config::RunConfig;
use crate::CliError;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

pub struct Artifacts {
    dir: PathBuf,
    entries: Vec<ArtifactEntry>,
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf(), entries: Vec::new() })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ArtifactEntry { path: name.to_string(), sha256: hex_digest(bytes), bytes: bytes.len() });
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    /// Tidy CSV with one observation per row.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let path = self.dir.join(name);
        w.write_record(header).map_err(|e| io(&path, e))?;
        for r in rows {
            w.write_record(r).map_err(|e| io(&path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| io(&path, e))?;
        self.write_bytes(name, &bytes)
    }

    /// Writes `manifest.json` listing every artifact and the numerical conventions.
    pub fn finish(mut self, command: &str, seed: u64, config: &RunConfig, extra: serde_json::Value) -> Result<Vec<ArtifactEntry>, CliError> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = json!({
            "tool": "stratscat",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "seed": seed,
            "config": config,
            "conventions": {
                "laplacian": "Delta = -nabla^2",
                "vertical_operator": "D_y^2 = -d^2/dy^2",
                "time_factor": "exp(+i lambda t)",
                "outgoing": "exp(-i lambda |z| / c)",
                "plane_wave_from_above": "exp(i k y) + R exp(-i k y) above, T exp(i k_out y) below",
                "calibration": config.numerics.calibration,
            },
            "tolerances": {
                "delta_crit": config.numerics.delta_crit,
                "delta_eq": config.numerics.delta_eq,
                "delta_ant": config.numerics.delta_ant,
                "residual_tol": config.numerics.residual_tol,
                "marchenko_max_condition": config.numerics.marchenko_max_condition,
            },
            "details": extra,
            "artifacts": self.entries,
        });
        let entries = self.entries.clone();
        let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
        Ok(entries)
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
