//! `manifest.json`: what a command read and wrote, plus the hints a later
//! `calibrate` needs to interpret a simulated measurement directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use srm_core::srm::{CalMode, Side};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEntry {
    pub role: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub path: PathBuf,
}

impl FileEntry {
    pub fn new(role: &str, index: Option<usize>, path: impl Into<PathBuf>) -> Self {
        Self {
            role: role.into(),
            index,
            path: path.into(),
        }
    }
}

/// `gamma0 · exp(-j 2π f delay)`
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReflectEstimate {
    pub gamma0: [f64; 2],
    pub delay_s: f64,
}

/// `magnitude · exp(-j 2π f delay)`
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TransmissionEstimate {
    pub magnitude: f64,
    pub delay_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hints {
    pub mode: CalMode,
    pub network_load_side: Side,
    pub estimate_load: usize,
    pub reflect_estimate: ReflectEstimate,
    pub transmission_estimate: TransmissionEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PathBuf>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hints: Option<Hints>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            config: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            hints: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, crate::CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::CliError::data(format!("{}: {e}", path.display())))?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de)
            .map_err(|e| crate::CliError::config(format!("{}: {}: {}", path.display(), e.path(), e.inner())))
    }

    pub fn save(&self, dir: &Path) -> Result<(), crate::CliError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        crate::write_file(&dir.join(MANIFEST_NAME), &text)
    }
}
