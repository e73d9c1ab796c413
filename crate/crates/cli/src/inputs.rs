//! Resolves the files of a measurement directory into an
//! [`SrmMeasurementSet`]: from `manifest.json` when present, otherwise by
//! file name (`load_<i>.s2p`, `network.s2p`, `network_load_<i>.s1p`,
//! `match_left.s1p`, `match_right.s1p`, optional `match_def_left.s1p` and
//! `match_def_right.s1p`).

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use srm_core::rf::{read_touchstone, Complex, FrequencyNetwork};
use srm_core::srm::{CalMode, DefinedMeasurement, DisambiguationEstimate, ReflectDefinition, Side, SrmMeasurementSet};

use crate::manifest::{FileEntry, Hints, ReflectEstimate, RunManifest, TransmissionEstimate, MANIFEST_NAME};
use crate::{CalibrateArgs, CliError};

pub struct Resolved {
    pub base: PathBuf,
    pub files: Vec<FileEntry>,
    pub hints: Option<Hints>,
}

impl Resolved {
    pub fn from_input(input: &Path) -> Result<Self, CliError> {
        let manifest_path = if input.is_file() {
            Some(input.to_path_buf())
        } else if input.is_dir() {
            Some(input.join(MANIFEST_NAME)).filter(|p| p.is_file())
        } else {
            return Err(CliError::data(format!("{}: no such file or directory", input.display())));
        };
        match manifest_path {
            Some(p) => {
                let m = RunManifest::load(&p)?;
                Ok(Self {
                    base: p.parent().map(Path::to_path_buf).unwrap_or_default(),
                    files: m.outputs,
                    hints: m.hints,
                })
            }
            None => Ok(Self {
                base: input.to_path_buf(),
                files: scan_directory(input),
                hints: None,
            }),
        }
    }

    fn paths(&self, role: &str) -> Vec<PathBuf> {
        let mut v: Vec<&FileEntry> = self.files.iter().filter(|e| e.role == role).collect();
        v.sort_by_key(|e| e.index);
        v.iter().map(|e| self.base.join(&e.path)).collect()
    }

    fn one(&self, role: &str) -> Result<Option<FrequencyNetwork>, CliError> {
        match self.paths(role).as_slice() {
            [] => Ok(None),
            [p] => Ok(Some(read(p)?)),
            _ => Err(CliError::config(format!("more than one file with role '{role}'"))),
        }
    }

    fn required(&self, role: &str, mode: CalMode) -> Result<FrequencyNetwork, CliError> {
        self.one(role)?
            .ok_or_else(|| CliError::config(format!("missing input role '{role}' required in {mode} mode")))
    }
}

fn read(p: &Path) -> Result<FrequencyNetwork, CliError> {
    read_touchstone(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))
}

fn scan_directory(dir: &Path) -> Vec<FileEntry> {
    let mut files = Vec::new();
    let indexed = |prefix: &str, ext: &str, role: &str, files: &mut Vec<FileEntry>| {
        for i in 0.. {
            let name = format!("{prefix}{i}.{ext}");
            if !dir.join(&name).is_file() {
                break;
            }
            files.push(FileEntry::new(role, Some(i), name));
        }
    };
    indexed("load_", "s2p", "load", &mut files);
    indexed("network_load_", "s1p", "network_load", &mut files);
    for (name, role) in [
        ("network.s2p", "network"),
        ("match_left.s1p", "match_left"),
        ("match_right.s1p", "match_right"),
        ("match_def_left.s1p", "match_def_left"),
        ("match_def_right.s1p", "match_def_right"),
    ] {
        if dir.join(name).is_file() {
            files.push(FileEntry::new(role, None, name));
        }
    }
    files
}

fn delayed(freqs: &[f64], start: Complex, delay: f64) -> Vec<Complex> {
    freqs
        .iter()
        .map(|f| start * Complex::from_polar(1.0, -2.0 * PI * f * delay))
        .collect()
}

pub struct CalibrationInputs {
    pub set: SrmMeasurementSet,
    pub mode: CalMode,
}

pub fn load_measurements(args: &CalibrateArgs) -> Result<CalibrationInputs, CliError> {
    let r = Resolved::from_input(&args.input)?;
    let hints = r.hints.clone();
    let mode: CalMode = args
        .mode
        .map(Into::into)
        .or(hints.as_ref().map(|h| h.mode))
        .unwrap_or(CalMode::Full);
    let side: Side = args
        .side
        .map(Into::into)
        .or(hints.as_ref().map(|h| h.network_load_side))
        .unwrap_or_default();

    let loads: Vec<FrequencyNetwork> = r.paths("load").iter().map(|p| read(p)).collect::<Result<_, _>>()?;
    if loads.len() < 3 {
        return Err(CliError::config(format!(
            "input role 'load' has {} files, at least 3 required",
            loads.len()
        )));
    }
    let network = r.required("network", mode)?;
    let network_loads: Vec<FrequencyNetwork> = if mode == CalMode::Thru {
        Vec::new()
    } else {
        let v: Vec<FrequencyNetwork> = r.paths("network_load").iter().map(|p| read(p)).collect::<Result<_, _>>()?;
        if v.is_empty() {
            return Err(CliError::config(format!(
                "missing input role 'network_load' required in {mode} mode"
            )));
        }
        v
    };
    let match_left = r.required("match_left", mode)?;
    let match_right = r.required("match_right", mode)?;
    let freqs = network.frequencies().to_vec();
    let z_ref = network.reference_impedance();

    let (def_left, def_right) = if let Some(p) = &args.match_definition {
        let d = read(p)?;
        (ReflectDefinition::Gamma(d.gamma_left()), ReflectDefinition::Gamma(d.gamma_left()))
    } else if let Some(z) = args.match_impedance {
        let d = ReflectDefinition::constant_impedance(Complex::new(z, 0.0), z_ref, freqs.len());
        (d.clone(), d)
    } else {
        match (r.one("match_def_left")?, r.one("match_def_right")?) {
            (Some(l), Some(rr)) => (
                ReflectDefinition::Gamma(l.gamma_left()),
                ReflectDefinition::Gamma(rr.gamma_left()),
            ),
            _ => {
                let d = ReflectDefinition::constant_impedance(z_ref, z_ref, freqs.len());
                (d.clone(), d)
            }
        }
    };

    let refl = match (&args.reflect_estimate, args.reflect_delay) {
        (Some(g), d) => ReflectEstimate {
            gamma0: [g[0], g[1]],
            delay_s: d.unwrap_or(0.0),
        },
        (None, d) => {
            let base = hints.as_ref().map(|h| h.reflect_estimate).unwrap_or(ReflectEstimate {
                gamma0: [-1.0, 0.0],
                delay_s: 0.0,
            });
            ReflectEstimate {
                delay_s: d.unwrap_or(base.delay_s),
                ..base
            }
        }
    };
    let trans = TransmissionEstimate {
        delay_s: args
            .transmission_delay
            .or(hints.as_ref().map(|h| h.transmission_estimate.delay_s))
            .unwrap_or(0.0),
        magnitude: hints.as_ref().map(|h| h.transmission_estimate.magnitude).unwrap_or(1.0),
    };
    let estimate = DisambiguationEstimate {
        load_index: args
            .estimate_load
            .or(hints.as_ref().map(|h| h.estimate_load))
            .unwrap_or(0),
        reflect: delayed(&freqs, Complex::new(refl.gamma0[0], refl.gamma0[1]), refl.delay_s),
        transmission: delayed(&freqs, Complex::new(trans.magnitude, 0.0), trans.delay_s),
    };

    Ok(CalibrationInputs {
        set: SrmMeasurementSet {
            loads,
            network,
            network_loads,
            network_load_side: side,
            matched: DefinedMeasurement {
                name: "match".into(),
                measured_left: match_left,
                measured_right: match_right,
                definition_left: def_left,
                definition_right: def_right,
            },
            extra_defined: Vec::new(),
            estimate,
        },
        mode,
    })
}
