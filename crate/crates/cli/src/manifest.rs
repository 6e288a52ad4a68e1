//! Run manifests: everything needed to regenerate a run's outputs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use uwbsim_core::{SimConfig, ThresholdPriors};

use crate::commands::CliError;

pub const MANIFEST_NAME: &str = "manifest.toml";

/// Fully resolved command, replayable without the original flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Ber {
        config: SimConfig,
    },
    Mse {
        mu: Vec<f64>,
        trials: u64,
        config: SimConfig,
    },
    Threshold {
        snr_db: Vec<f64>,
        sinr_db: f64,
        p: f64,
        priors: ThresholdPriors,
    },
    Theory {
        snr_db: Vec<f64>,
        mu: Vec<f64>,
        l_max: usize,
        mu_snr_db: f64,
        config: SimConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowConfidence {
    pub snr_db: f64,
    pub receiver: String,
    pub bits: u64,
    pub errors: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub master_seed: Option<u64>,
    pub started: String,
    pub finished: String,
    /// Output file names, relative to the manifest's directory.
    pub outputs: Vec<String>,
    #[serde(default)]
    pub low_confidence: Vec<LowConfidence>,
    pub job: Job,
}

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp: PathBuf = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let io = |e: std::io::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Runtime(format!("serializing manifest: {e}")))?;
        let path = dir.join(MANIFEST_NAME);
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
