//! Kit configuration file.
//!
//! ```json
//! {
//!   "error_boxes": "builtin",
//!   "reference_impedance": 50.0,
//!   "line": { "zc": [49.0, -0.5], "eps_eff": 5.45, "loss_np_per_m": 5.0 },
//!   "offset_length_m": 200e-6,
//!   "network_length_m": 4e-3,
//!   "loads": [
//!     { "name": "short", "topology": "rl-parallel-c", "r": 0.0,  "l": 10e-12, "c": 0.5e-15 },
//!     { "name": "open",  "topology": "l-series-c",               "l": 0.5e-12, "c": 10e-15 },
//!     { "name": "match", "topology": "rl-parallel-c", "r": 50.0, "l": 5e-12,  "c": 0.5e-15 }
//!   ],
//!   "match": { "topology": "rl-parallel-c", "r": 50.0, "l": 5e-12, "c": 0.5e-15 },
//!   "mode": "full",
//!   "network_load_side": "left",
//!   "estimate_load": 0,
//!   "dut": [ { "length_m": 1e-3, "zc": [30.0, 0.0] }, { "length_m": 1e-3, "zc": [75.0, 0.0] } ],
//!   "perturbation": { "noise_sigma": 0.001, "sources": ["noise"], "seed": 7 }
//! }
//! ```
//!
//! Every load and the match sit behind an offset line of `offset_length_m`
//! built from `line`. `error_boxes` is either `"builtin"` or a path (relative
//! to the config file) to a serialized error model; its frequency grid is
//! the simulation grid. Half-network mode uses a half of length
//! `network_length_m / 2` for the network-load standards. Unknown fields are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::line::{LineParams, TransmissionLineModel};
use super::load::{LumpedLoadModel, Topology};
use super::perturb::PerturbationSpec;
use crate::error::{Error, Result};
use crate::srm::measurement::{CalMode, Side};
use crate::srm::model::ErrorModel;

const BUILTIN_BOXES: &str = include_str!("../../fixtures/error_boxes.json");
const BUILTIN_KIT: &str = include_str!("../../fixtures/kit_default.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedLoad {
    pub name: String,
    pub topology: Topology,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub l: f64,
    #[serde(default)]
    pub c: f64,
}

impl NamedLoad {
    pub fn model(&self) -> LumpedLoadModel {
        LumpedLoadModel {
            topology: self.topology,
            r: self.r,
            l: self.l,
            c: self.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DutSection {
    pub length_m: f64,
    pub zc: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KitConfig {
    #[serde(default = "builtin")]
    pub error_boxes: String,
    #[serde(default = "z_ref")]
    pub reference_impedance: f64,
    #[serde(default)]
    pub line: LineParams,
    #[serde(default = "offset_length")]
    pub offset_length_m: f64,
    #[serde(default = "network_length")]
    pub network_length_m: f64,
    pub loads: Vec<NamedLoad>,
    #[serde(rename = "match")]
    pub matched: LumpedLoadModel,
    #[serde(default)]
    pub mode: CalMode,
    #[serde(default)]
    pub network_load_side: Side,
    #[serde(default)]
    pub estimate_load: usize,
    #[serde(default)]
    pub dut: Vec<DutSection>,
    #[serde(default)]
    pub perturbation: PerturbationSpec,
    /// Directory that relative paths are resolved against; not serialized.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn builtin() -> String {
    "builtin".into()
}

fn z_ref() -> f64 {
    50.0
}

fn offset_length() -> f64 {
    200e-6
}

fn network_length() -> f64 {
    4e-3
}

impl KitConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: KitConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("{}: {}", e.path(), e.inner())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut cfg = Self::from_json(&std::fs::read_to_string(path)?)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// The bundled example kit.
    pub fn builtin() -> Self {
        Self::from_json(BUILTIN_KIT).expect("bundled kit config is valid")
    }

    pub fn builtin_json() -> &'static str {
        BUILTIN_KIT
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.loads.len() < 3 {
            return Err(Error::Config(format!("loads: {} given, at least 3 required", self.loads.len())));
        }
        if self.estimate_load >= self.loads.len() {
            return Err(Error::Config(format!(
                "estimate_load: {} is out of range for {} loads",
                self.estimate_load,
                self.loads.len()
            )));
        }
        let lengths = [
            ("offset_length_m", self.offset_length_m),
            ("network_length_m", self.network_length_m),
        ];
        for (name, v) in lengths {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name}: must be >= 0, got {v}")));
            }
        }
        if !(self.reference_impedance > 0.0) {
            return Err(Error::Config("reference_impedance: must be positive".into()));
        }
        let elements = self
            .loads
            .iter()
            .enumerate()
            .map(|(i, l)| (format!("loads[{i}]"), l.model()))
            .chain(std::iter::once(("match".to_string(), self.matched)));
        for (name, m) in elements {
            if m.r < 0.0 || !m.l.is_finite() || !m.c.is_finite() || !m.r.is_finite() {
                return Err(Error::Config(format!("{name}: R must be >= 0 and L, C finite")));
            }
        }
        for (i, s) in self.dut.iter().enumerate() {
            if !(s.length_m >= 0.0) {
                return Err(Error::Config(format!("dut[{i}].length_m: must be >= 0")));
            }
        }
        self.perturbation
            .validate()
            .map_err(|e| Error::Config(format!("perturbation: {e}")))
    }

    /// Loads the error boxes named by `error_boxes`.
    pub fn error_model(&self) -> Result<ErrorModel> {
        if self.error_boxes == "builtin" {
            return builtin_error_model();
        }
        let mut path = PathBuf::from(&self.error_boxes);
        if path.is_relative() {
            if let Some(base) = &self.base_dir {
                path = base.join(path);
            }
        }
        ErrorModel::load(&path)
    }

    pub fn offset_line(&self) -> TransmissionLineModel {
        TransmissionLineModel::new(self.offset_length_m, self.line)
    }

    pub fn network_line(&self) -> TransmissionLineModel {
        TransmissionLineModel::new(self.network_length_m, self.line)
    }

    /// The stepped-impedance verification device; a default four-step
    /// structure when the config has none.
    pub fn dut_sections(&self) -> Vec<TransmissionLineModel> {
        let sections = if self.dut.is_empty() {
            vec![
                DutSection { length_m: 0.5e-3, zc: [50.0, 0.0] },
                DutSection { length_m: 0.8e-3, zc: [30.0, 0.0] },
                DutSection { length_m: 0.6e-3, zc: [80.0, 0.0] },
                DutSection { length_m: 0.5e-3, zc: [50.0, 0.0] },
            ]
        } else {
            self.dut.clone()
        };
        sections
            .iter()
            .map(|s| {
                TransmissionLineModel::new(
                    s.length_m,
                    LineParams {
                        zc: s.zc,
                        ..self.line
                    },
                )
            })
            .collect()
    }
}

/// The bundled error boxes (20 points, 1 to 150 GHz).
pub fn builtin_error_model() -> Result<ErrorModel> {
    ErrorModel::from_json(BUILTIN_BOXES)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_parses() {
        let k = KitConfig::builtin();
        assert_eq!(k.loads.len(), 3);
        assert_eq!(k.error_model().unwrap().len(), 20);
    }

    #[test]
    fn bad_topology_names_field() {
        let text = KitConfig::builtin_json().replacen("l-series-c", "coaxial-teapot", 1);
        let err = KitConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("loads[1].topology"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = KitConfig::builtin_json().replacen("{", "{\"colour\": 3,", 1);
        assert!(KitConfig::from_json(&text).is_err());
    }
}
