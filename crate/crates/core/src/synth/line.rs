use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::rf::matrix::{c, Complex};
use crate::rf::sparams::{star, SParams2};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Electrical parameters of a uniform quasi-TEM line. The propagation
/// constant is `γ = α0·sqrt(f / 1 GHz) + j·2πf·sqrt(εeff)/c0`, scaled by
/// `gamma_scale` (1 for the nominal line).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineParams {
    /// Characteristic impedance `[re, im]` in ohms.
    pub zc: [f64; 2],
    pub eps_eff: f64,
    /// Attenuation at 1 GHz in Np/m.
    pub loss_np_per_m: f64,
    #[serde(default = "one")]
    pub gamma_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for LineParams {
    fn default() -> Self {
        Self {
            zc: [49.0, -0.5],
            eps_eff: 5.45,
            loss_np_per_m: 5.0,
            gamma_scale: 1.0,
        }
    }
}

impl LineParams {
    pub fn zc(&self) -> Complex {
        c(self.zc[0], self.zc[1])
    }

    pub fn gamma(&self, f: f64) -> Complex {
        let alpha = self.loss_np_per_m * (f / 1e9).sqrt();
        let beta = 2.0 * PI * f * self.eps_eff.sqrt() / SPEED_OF_LIGHT;
        c(alpha, beta) * self.gamma_scale
    }
}

/// A line section of a given physical length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionLineModel {
    pub length_m: f64,
    pub params: LineParams,
}

impl TransmissionLineModel {
    pub fn new(length_m: f64, params: LineParams) -> Self {
        Self { length_m, params }
    }

    /// S-parameters referenced to the real impedance `z_ref` at both ports.
    pub fn sparams(&self, f: f64, z_ref: f64) -> SParams2 {
        let zc = self.params.zc();
        let g = (zc - z_ref) / (zc + z_ref);
        let e = (-self.params.gamma(f) * self.length_m).exp();
        let e2 = e * e;
        let den = 1.0 - g * g * e2;
        let s11 = g * (1.0 - e2) / den;
        let s21 = e * (1.0 - g * g) / den;
        SParams2::reciprocal(s11, s21, s11)
    }
}

/// Cascade of line sections, left to right.
pub fn cascade_sections(sections: &[TransmissionLineModel], f: f64, z_ref: f64) -> SParams2 {
    sections
        .iter()
        .fold(SParams2::THRU, |acc, s| star(&acc, &s.sparams(f, z_ref)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matched_lossless_line_is_pure_delay() {
        let line = TransmissionLineModel::new(
            1e-3,
            LineParams {
                zc: [50.0, 0.0],
                eps_eff: 4.0,
                loss_np_per_m: 0.0,
                gamma_scale: 1.0,
            },
        );
        let s = line.sparams(10e9, 50.0);
        assert_eq!(s.s11, c(0.0, 0.0));
        let expected = (-c(0.0, 2.0 * PI * 10e9 * 2.0 / SPEED_OF_LIGHT) * 1e-3).exp();
        assert!((s.s21 - expected).norm() < 1e-15);
    }
}
