use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

/// Everything needed to identify and repeat a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    /// Every effective setting after defaults, file and overrides.
    pub config: BTreeMap<String, String>,
    pub overrides: Vec<String>,
    pub seeds: Vec<u64>,
    pub artifacts: Vec<Artifact>,
    pub git_describe: String,
    pub started: String,
    pub finished: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Artifact {
    pub seed: u64,
    pub checkpoint: Option<PathBuf>,
    pub metrics: PathBuf,
    pub test_error_pct: Option<f64>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| {
            CliError::Config(format!("cannot read manifest {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("bad manifest {}: {e}", path.display())))
    }

    /// Rebuilds the recorded configuration.
    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        for (k, v) in &self.config {
            cfg.set(k, v)
                .map_err(|msg| CliError::Config(format!("manifest setting {k}: {msg}")))?;
        }
        Ok(cfg)
    }
}

pub fn config_map(cfg: &RunConfig) -> BTreeMap<String, String> {
    cfg.to_pairs().into_iter().collect()
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp-{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string())
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339()
}
