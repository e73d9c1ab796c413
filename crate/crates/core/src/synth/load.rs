use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::line::TransmissionLineModel;
use crate::rf::matrix::{c, Complex};

/// Lumped circuit of a one-port standard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// `R` in series with `L`, the pair shunted by `C`:
    /// `Z = (R + jωL) / (1 + jωC·(R + jωL))`. Used for the match and short.
    RlParallelC,
    /// `L` in series with `C` to ground: `Z = jωL + 1/(jωC)`. Used for the
    /// open; `C = 0` is an ideal open.
    LSeriesC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LumpedLoadModel {
    pub topology: Topology,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub l: f64,
    #[serde(default)]
    pub c: f64,
}

impl LumpedLoadModel {
    /// Reflection of the bare circuit against the real impedance `z_ref`.
    pub fn gamma(&self, f: f64, z_ref: f64) -> Complex {
        let w = 2.0 * PI * f;
        match self.topology {
            Topology::RlParallelC => {
                let zs = c(self.r, w * self.l);
                let z = zs / (1.0 + c(0.0, w * self.c) * zs);
                (z - z_ref) / (z + z_ref)
            }
            Topology::LSeriesC => {
                // multiply Z ± z_ref through by jωC so C = 0 stays finite
                let num = c(1.0 - w * w * self.l * self.c, -z_ref * w * self.c);
                let den = c(1.0 - w * w * self.l * self.c, z_ref * w * self.c);
                num / den
            }
        }
    }

    /// Reflection behind an optional offset line.
    pub fn gamma_with_offset(&self, offset: Option<&TransmissionLineModel>, f: f64, z_ref: f64) -> Complex {
        let g = self.gamma(f, z_ref);
        match offset {
            Some(line) => line.sparams(f, z_ref).input_reflection(g),
            None => g,
        }
    }

    /// Copy with `L` and `C` scaled by `(1 + dl)` and `(1 + dc)`.
    pub fn scaled(&self, dl: f64, dc: f64) -> Self {
        Self {
            l: self.l * (1.0 + dl),
            c: self.c * (1.0 + dc),
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_short_and_open() {
        let short = LumpedLoadModel {
            topology: Topology::RlParallelC,
            r: 0.0,
            l: 0.0,
            c: 0.0,
        };
        let open = LumpedLoadModel {
            topology: Topology::LSeriesC,
            r: 0.0,
            l: 0.0,
            c: 0.0,
        };
        assert_eq!(short.gamma(1e9, 50.0), c(-1.0, 0.0));
        assert_eq!(open.gamma(1e9, 50.0), c(1.0, 0.0));
    }
}
