//! The calibration result and its application to raw measurements.
//!
//! JSON layout of a serialized [`ErrorModel`]:
//!
//! ```text
//! {
//!   "format": "srm-error-model",
//!   "version": 1,
//!   "reference_impedance": [50.0, 0.0],
//!   "k_reliable": true,
//!   "frequencies_hz": [f0, f1, ...],
//!   "a11": [[re, im], ...],  "a12": [...],  "a21": [...],
//!   "b11": [...],            "b12": [...],  "b21": [...],
//!   "k":   [...]
//! }
//! ```
//!
//! `A = [[a11, a12], [a21, 1]]` and `B = [[b11, b12], [b21, 1]]` are T-matrices
//! so a raw measurement reads `M = k · A · T · B`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{apply, MobiusMatrix};
use crate::rf::matrix::{c, Complex, ComplexMatrix2, ONE};
use crate::rf::network::{check_grid, FrequencyNetwork, NetworkData};
use crate::rf::sparams::{s_to_t, t_to_s, SParams2};

/// Error terms at one frequency point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTerms {
    pub a: ComplexMatrix2,
    pub b: ComplexMatrix2,
    pub k: Complex,
}

impl ErrorTerms {
    pub const IDENTITY: Self = Self {
        a: ComplexMatrix2::IDENTITY,
        b: ComplexMatrix2::IDENTITY,
        k: ONE,
    };

    /// Builds terms from the six free entries, fixing `a22 = b22 = 1`.
    pub fn from_entries(a11: Complex, a12: Complex, a21: Complex, b11: Complex, b12: Complex, b21: Complex, k: Complex) -> Self {
        Self {
            a: ComplexMatrix2::new(a11, a12, a21, ONE),
            b: ComplexMatrix2::new(b11, b12, b21, ONE),
            k,
        }
    }

    /// `[a11, a12, a21, b11, b12, b21, k]`
    pub fn seven_terms(&self) -> [Complex; 7] {
        [self.a.e11, self.a.e12, self.a.e21, self.b.e11, self.b.e12, self.b.e21, self.k]
    }

    /// Largest per-entry relative deviation from `truth` over the seven terms.
    pub fn max_relative_error(&self, truth: &Self) -> f64 {
        self.seven_terms()
            .iter()
            .zip(truth.seven_terms().iter())
            .map(|(x, t)| (x - t).norm() / t.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Largest relative deviation of the six one-port terms only.
    pub fn max_relative_error_one_port(&self, truth: &Self) -> f64 {
        self.seven_terms()[..6]
            .iter()
            .zip(truth.seven_terms()[..6].iter())
            .map(|(x, t)| (x - t).norm() / t.norm().max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }

    /// Raw measurement `k · A · T · B` of a transmissive device.
    pub fn embed_t(&self, t: &ComplexMatrix2) -> ComplexMatrix2 {
        (self.a * *t * self.b).scale(self.k)
    }

    /// Removes the error boxes: `(1/k) · A⁻¹ · M · B⁻¹`.
    pub fn correct_t(&self, m: &ComplexMatrix2) -> Result<ComplexMatrix2> {
        let ai = self.a.checked_inverse("error box A")?;
        let bi = self.b.checked_inverse("error box B")?;
        Ok((ai * *m * bi).scale(self.k.inv()))
    }

    /// Left-port one-port map ρ ↦ Γa.
    pub fn port_a_map(&self) -> MobiusMatrix {
        MobiusMatrix(self.a)
    }

    /// Right-port one-port map ρ ↦ Γb, i.e. the inverse of `P·B·P`.
    pub fn port_b_map(&self) -> MobiusMatrix {
        let p = ComplexMatrix2::PERMUTATION;
        MobiusMatrix((p * self.b * p).adjugate())
    }

    pub fn correct_gamma_a(&self, gamma: Complex) -> Result<Complex> {
        apply(&MobiusMatrix(self.a.adjugate()), gamma)
    }

    pub fn correct_gamma_b(&self, gamma: Complex) -> Result<Complex> {
        let p = ComplexMatrix2::PERMUTATION;
        apply(&MobiusMatrix(p * self.b * p), gamma)
    }

    pub fn is_valid(&self) -> bool {
        self.a.e22 == ONE
            && self.b.e22 == ONE
            && self.a.det().norm() > 0.0
            && self.b.det().norm() > 0.0
            && self.k.norm() > 0.0
            && self.a.is_finite()
            && self.b.is_finite()
            && self.k.re.is_finite()
            && self.k.im.is_finite()
    }
}

/// Per-frequency calibration result.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorModel {
    pub frequencies: Vec<f64>,
    pub terms: Vec<ErrorTerms>,
    pub reference_impedance: Complex,
    /// False when `k` was derived under an unverified reciprocity assumption.
    pub k_reliable: bool,
}

impl ErrorModel {
    pub fn new(frequencies: Vec<f64>, terms: Vec<ErrorTerms>) -> Result<Self> {
        if frequencies.len() != terms.len() {
            return Err(Error::Precondition(format!(
                "{} error-term sets for {} frequencies",
                terms.len(),
                frequencies.len()
            )));
        }
        if let Some(i) = terms.iter().position(|t| !t.is_valid()) {
            return Err(Error::Precondition(format!("invalid error terms at index {i}")));
        }
        Ok(Self {
            frequencies,
            terms,
            reference_impedance: c(50.0, 0.0),
            k_reliable: true,
        })
    }

    pub fn identity(frequencies: Vec<f64>) -> Self {
        let n = frequencies.len();
        Self {
            frequencies,
            terms: vec![ErrorTerms::IDENTITY; n],
            reference_impedance: c(50.0, 0.0),
            k_reliable: true,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_relative_error(&self, truth: &ErrorModel) -> f64 {
        self.terms
            .iter()
            .zip(&truth.terms)
            .map(|(a, b)| a.max_relative_error(b))
            .fold(0.0, f64::max)
    }

    pub fn max_relative_error_one_port(&self, truth: &ErrorModel) -> f64 {
        self.terms
            .iter()
            .zip(&truth.terms)
            .map(|(a, b)| a.max_relative_error_one_port(b))
            .fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ErrorModelFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ErrorModelFile = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::Config(format!("error model: {} at {}", e.inner(), e.path())))?;
        file.try_into()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// The error boxes as two-port S-parameter networks. `k` is folded into
    /// the left box, whose T-matrix becomes `k·A`; the right box is `B`.
    pub fn error_box_networks(&self) -> Result<(FrequencyNetwork, FrequencyNetwork)> {
        let mut left = Vec::with_capacity(self.len());
        let mut right = Vec::with_capacity(self.len());
        for (i, t) in self.terms.iter().enumerate() {
            left.push(t_to_s(&t.a.scale(t.k)).map_err(|e| e.at(i))?);
            right.push(t_to_s(&t.b).map_err(|e| e.at(i))?);
        }
        let z = self.reference_impedance;
        Ok((
            FrequencyNetwork::two_port("error_box_a", self.frequencies.clone(), left)?.with_reference_impedance(z),
            FrequencyNetwork::two_port("error_box_b", self.frequencies.clone(), right)?.with_reference_impedance(z),
        ))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ErrorModelFile {
    format: String,
    version: u32,
    #[serde(default = "default_z_ref")]
    reference_impedance: [f64; 2],
    #[serde(default = "default_true")]
    k_reliable: bool,
    frequencies_hz: Vec<f64>,
    a11: Vec<[f64; 2]>,
    a12: Vec<[f64; 2]>,
    a21: Vec<[f64; 2]>,
    b11: Vec<[f64; 2]>,
    b12: Vec<[f64; 2]>,
    b21: Vec<[f64; 2]>,
    k: Vec<[f64; 2]>,
}

fn default_z_ref() -> [f64; 2] {
    [50.0, 0.0]
}

fn default_true() -> bool {
    true
}

const FORMAT_TAG: &str = "srm-error-model";

fn pair(z: Complex) -> [f64; 2] {
    [z.re, z.im]
}

impl From<&ErrorModel> for ErrorModelFile {
    fn from(m: &ErrorModel) -> Self {
        let col = |f: fn(&ErrorTerms) -> Complex| m.terms.iter().map(|t| pair(f(t))).collect();
        Self {
            format: FORMAT_TAG.into(),
            version: 1,
            reference_impedance: pair(m.reference_impedance),
            k_reliable: m.k_reliable,
            frequencies_hz: m.frequencies.clone(),
            a11: col(|t| t.a.e11),
            a12: col(|t| t.a.e12),
            a21: col(|t| t.a.e21),
            b11: col(|t| t.b.e11),
            b12: col(|t| t.b.e12),
            b21: col(|t| t.b.e21),
            k: col(|t| t.k),
        }
    }
}

impl TryFrom<ErrorModelFile> for ErrorModel {
    type Error = Error;

    fn try_from(f: ErrorModelFile) -> Result<Self> {
        if f.format != FORMAT_TAG {
            return Err(Error::Config(format!("unexpected format tag '{}'", f.format)));
        }
        if f.version != 1 {
            return Err(Error::Config(format!("unsupported error model version {}", f.version)));
        }
        let n = f.frequencies_hz.len();
        for (name, col) in [
            ("a11", &f.a11),
            ("a12", &f.a12),
            ("a21", &f.a21),
            ("b11", &f.b11),
            ("b12", &f.b12),
            ("b21", &f.b21),
            ("k", &f.k),
        ] {
            if col.len() != n {
                return Err(Error::Config(format!("'{name}' has {} entries, expected {n}", col.len())));
            }
        }
        let z = |p: [f64; 2]| c(p[0], p[1]);
        let terms = (0..n)
            .map(|i| {
                ErrorTerms::from_entries(
                    z(f.a11[i]),
                    z(f.a12[i]),
                    z(f.a21[i]),
                    z(f.b11[i]),
                    z(f.b12[i]),
                    z(f.b21[i]),
                    z(f.k[i]),
                )
            })
            .collect();
        let grid_probe = FrequencyNetwork::one_port("error model", f.frequencies_hz.clone(), vec![c(0.0, 0.0); n])?;
        let mut model = ErrorModel::new(grid_probe.frequencies().to_vec(), terms)?;
        model.reference_impedance = z(f.reference_impedance);
        model.k_reliable = f.k_reliable;
        Ok(model)
    }
}

/// Corrects a raw two-port measurement: S of `(1/k) · A⁻¹ · M · B⁻¹`.
pub fn apply_correction(model: &ErrorModel, raw: &FrequencyNetwork) -> Result<FrequencyNetwork> {
    check_grid(&model.frequencies, raw)?;
    let data = raw.two_port_data()?;
    let corrected = data
        .iter()
        .zip(&model.terms)
        .enumerate()
        .map(|(i, (s, t))| {
            let m = s_to_t(s)?;
            t_to_s(&t.correct_t(&m)?)
        }
        .map_err(|e: Error| e.at(i)))
        .collect::<Result<Vec<SParams2>>>()?;
    FrequencyNetwork::new(
        format!("{} (corrected)", raw.name),
        raw.frequencies().to_vec(),
        NetworkData::TwoPort(corrected),
        raw.reference_impedance(),
    )
}

/// Corrects a one-port measurement taken at the given port by inverting the
/// port's Möbius map.
pub fn apply_correction_one_port(
    model: &ErrorModel,
    raw: &FrequencyNetwork,
    side: crate::srm::measurement::Side,
) -> Result<FrequencyNetwork> {
    use crate::srm::measurement::Side;
    check_grid(&model.frequencies, raw)?;
    let gamma = match side {
        Side::Left => raw.gamma_left(),
        Side::Right => raw.gamma_right(),
    };
    let corrected = gamma
        .iter()
        .zip(&model.terms)
        .enumerate()
        .map(|(i, (g, t))| match side {
            Side::Left => t.correct_gamma_a(*g),
            Side::Right => t.correct_gamma_b(*g),
        }
        .map_err(|e| e.at(i)))
        .collect::<Result<Vec<_>>>()?;
    FrequencyNetwork::one_port(format!("{} (corrected)", raw.name), raw.frequencies().to_vec(), corrected)
        .map(|n| n.with_reference_impedance(raw.reference_impedance()))
}
