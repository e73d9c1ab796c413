use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rf::matrix::Complex;
use crate::rf::network::{check_grid, FrequencyNetwork};

/// Which port the network-load standards were measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Left,
    Right,
}

/// How the virtual (or physical) thru is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalMode {
    /// The network standard is a defined flush thru.
    Thru,
    /// Network-load standards use the complete network.
    #[default]
    Full,
    /// Network-load standards use one half of a symmetric network.
    Half,
}

impl std::str::FromStr for CalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "thru" => Ok(CalMode::Thru),
            "full" | "full-network" => Ok(CalMode::Full),
            "half" | "half-network" => Ok(CalMode::Half),
            other => Err(Error::Config(format!("unknown mode '{other}' (thru, full, half)"))),
        }
    }
}

impl std::fmt::Display for CalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CalMode::Thru => "thru",
            CalMode::Full => "full",
            CalMode::Half => "half",
        })
    }
}

/// Definition of a one-port standard at one port: either its reflection
/// directly, or its impedance against a reference impedance.
#[derive(Debug, Clone, PartialEq)]
pub enum ReflectDefinition {
    Gamma(Vec<Complex>),
    Impedance { z: Vec<Complex>, z_ref: Complex },
}

impl ReflectDefinition {
    pub fn len(&self) -> usize {
        match self {
            ReflectDefinition::Gamma(g) => g.len(),
            ReflectDefinition::Impedance { z, .. } => z.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Constant impedance repeated over `n` points.
    pub fn constant_impedance(z: Complex, z_ref: Complex, n: usize) -> Self {
        ReflectDefinition::Impedance { z: vec![z; n], z_ref }
    }

    pub fn gammas(&self) -> Vec<Complex> {
        match self {
            ReflectDefinition::Gamma(g) => g.clone(),
            ReflectDefinition::Impedance { z, z_ref } => {
                z.iter().map(|z| (z - z_ref) / (z + z_ref)).collect()
            }
        }
    }
}

/// A fully defined one-port standard measured at both ports (the match, or
/// any additional defined impedance).
#[derive(Debug, Clone)]
pub struct DefinedMeasurement {
    pub name: String,
    pub measured_left: FrequencyNetwork,
    pub measured_right: FrequencyNetwork,
    pub definition_left: ReflectDefinition,
    pub definition_right: ReflectDefinition,
}

impl DefinedMeasurement {
    pub(crate) fn validate(&self, grid: &[f64]) -> Result<()> {
        check_grid(grid, &self.measured_left)?;
        check_grid(grid, &self.measured_right)?;
        for (side, d) in [("left", &self.definition_left), ("right", &self.definition_right)] {
            if d.len() != grid.len() {
                return Err(Error::Precondition(format!(
                    "{}: {side} definition has {} points, grid has {}",
                    self.name,
                    d.len(),
                    grid.len()
                )));
            }
        }
        Ok(())
    }
}

/// Rough knowledge used to resolve the two discrete ambiguities of the
/// solution: eigenvector order and the sign of `k`.
#[derive(Debug, Clone)]
pub struct DisambiguationEstimate {
    /// Index into `loads` of the load whose approximate reflection is known.
    pub load_index: usize,
    /// Approximate reflection of that load per frequency.
    pub reflect: Vec<Complex>,
    /// Approximate S21 of the network standard per frequency.
    pub transmission: Vec<Complex>,
}

/// Everything one calibration run consumes.
#[derive(Debug, Clone)]
pub struct SrmMeasurementSet {
    /// Two-port measurements of symmetric one-port loads (Γa = s11, Γb = s22).
    pub loads: Vec<FrequencyNetwork>,
    /// Raw two-port measurement of the transmissive network (or thru).
    pub network: FrequencyNetwork,
    /// One-port measurements of network (or half network) + load `i`.
    pub network_loads: Vec<FrequencyNetwork>,
    pub network_load_side: Side,
    pub matched: DefinedMeasurement,
    /// Further defined impedance standards appended to the port systems.
    pub extra_defined: Vec<DefinedMeasurement>,
    pub estimate: DisambiguationEstimate,
}

impl SrmMeasurementSet {
    pub fn frequencies(&self) -> &[f64] {
        self.network.frequencies()
    }

    pub fn validate(&self, mode: CalMode) -> Result<()> {
        let grid = self.frequencies();
        if self.loads.len() < 3 {
            return Err(Error::RankDeficient {
                reason: format!("{} load standards, at least 3 required", self.loads.len()),
            });
        }
        self.network.two_port_data()?;
        for l in &self.loads {
            l.two_port_data()?;
            check_grid(grid, l)?;
        }
        if mode != CalMode::Thru {
            if self.network_loads.len() != self.loads.len() {
                return Err(Error::Precondition(format!(
                    "{} network-load measurements for {} loads",
                    self.network_loads.len(),
                    self.loads.len()
                )));
            }
            for nl in &self.network_loads {
                check_grid(grid, nl)?;
            }
        }
        self.matched.validate(grid)?;
        for d in &self.extra_defined {
            d.validate(grid)?;
        }
        let est = &self.estimate;
        if est.load_index >= self.loads.len() {
            return Err(Error::Precondition(format!(
                "estimate refers to load {} but only {} loads exist",
                est.load_index,
                self.loads.len()
            )));
        }
        if est.reflect.len() != grid.len() {
            return Err(Error::Precondition("reflect estimate length differs from grid".into()));
        }
        if mode != CalMode::Thru && est.transmission.len() != grid.len() {
            return Err(Error::Precondition(
                "transmission estimate length differs from grid".into(),
            ));
        }
        Ok(())
    }

    /// Returns a copy with the load list (and the matching network-load
    /// list) reordered by `perm`.
    pub fn permuted_loads(&self, perm: &[usize]) -> Self {
        let mut out = self.clone();
        out.loads = perm.iter().map(|&i| self.loads[i].clone()).collect();
        if !self.network_loads.is_empty() {
            out.network_loads = perm.iter().map(|&i| self.network_loads[i].clone()).collect();
        }
        out.estimate.load_index = perm
            .iter()
            .position(|&i| i == self.estimate.load_index)
            .unwrap_or(0);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rf::matrix::c;

    #[test]
    fn impedance_definition_converts() {
        let d = ReflectDefinition::Impedance {
            z: vec![c(50.0, 0.0), c(150.0, 0.0)],
            z_ref: c(50.0, 0.0),
        };
        let g = d.gammas();
        assert_eq!(g[0], c(0.0, 0.0));
        assert!((g[1] - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("half-network".parse::<CalMode>().unwrap(), CalMode::Half);
        assert!("sideways".parse::<CalMode>().is_err());
    }
}
