//! Configuration loading: bundled presets or TOML files, then flag overrides.

use std::path::Path;

use uwbsim_core::{ReceiverSpec, SimConfig};

use crate::commands::CliError;

pub const AWGN_PRESET: &str = include_str!("../presets/awgn.toml");
pub const CM1_PRESET: &str = include_str!("../presets/cm1.toml");

pub fn parse(text: &str, origin: &str) -> Result<SimConfig, CliError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    cfg.validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    Ok(cfg)
}

/// `spec` is a preset name (`awgn`, `cm1`) or a path to a TOML file.
pub fn load(spec: &str) -> Result<SimConfig, CliError> {
    match spec {
        "awgn" => parse(AWGN_PRESET, "preset awgn"),
        "cm1" => parse(CM1_PRESET, "preset cm1"),
        path => {
            let text = std::fs::read_to_string(Path::new(path))
                .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
            parse(&text, path)
        }
    }
}

#[cfg(test)]
fn preset_text(cfg: &SimConfig) -> String {
    toml::to_string(cfg).expect("config serializes")
}

#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub min_errors: Option<u64>,
    pub max_bits: Option<u64>,
    pub receivers: Option<Vec<ReceiverSpec>>,
    pub p: Option<f64>,
    pub snr_db: Option<Vec<f64>>,
    pub sinr_db: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, mut cfg: SimConfig) -> Result<SimConfig, CliError> {
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.min_errors {
            cfg.min_errors = v;
        }
        if let Some(v) = self.max_bits {
            cfg.max_bits = v;
        }
        if let Some(v) = &self.receivers {
            cfg.receivers = v.clone();
        }
        if let Some(v) = self.p {
            cfg.p = v;
        }
        if let Some(v) = &self.snr_db {
            cfg.snr_db = v.clone();
        }
        if let Some(v) = self.sinr_db {
            cfg.sinr_db = v;
        }
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}
