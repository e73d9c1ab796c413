use super::matrix::{c, Complex};
use super::sparams::SParams2;
use crate::error::{Error, Result};

/// Relative tolerance for two frequency points to count as the same point.
pub const GRID_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum NetworkData {
    OnePort(Vec<Complex>),
    TwoPort(Vec<SParams2>),
}

impl NetworkData {
    pub fn len(&self) -> usize {
        match self {
            NetworkData::OnePort(v) => v.len(),
            NetworkData::TwoPort(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A frequency-indexed one- or two-port S-parameter record.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyNetwork {
    frequencies: Vec<f64>,
    data: NetworkData,
    reference_impedance: Complex,
    /// Label used in diagnostics, usually the source file name.
    pub name: String,
}

impl FrequencyNetwork {
    pub fn new(
        name: impl Into<String>,
        frequencies: Vec<f64>,
        data: NetworkData,
        reference_impedance: Complex,
    ) -> Result<Self> {
        let name = name.into();
        validate_grid(&frequencies).map_err(|e| Error::Grid(format!("{name}: {e}")))?;
        if data.len() != frequencies.len() {
            return Err(Error::Grid(format!(
                "{name}: {} data points for {} frequencies",
                data.len(),
                frequencies.len()
            )));
        }
        let finite = match &data {
            NetworkData::OnePort(v) => v.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            NetworkData::TwoPort(v) => v.iter().all(SParams2::is_finite),
        };
        if !finite {
            return Err(Error::Precondition(format!("{name}: non-finite S-parameter data")));
        }
        Ok(Self {
            frequencies,
            data,
            reference_impedance,
            name,
        })
    }

    pub fn one_port(name: impl Into<String>, frequencies: Vec<f64>, gamma: Vec<Complex>) -> Result<Self> {
        Self::new(name, frequencies, NetworkData::OnePort(gamma), c(50.0, 0.0))
    }

    pub fn two_port(name: impl Into<String>, frequencies: Vec<f64>, s: Vec<SParams2>) -> Result<Self> {
        Self::new(name, frequencies, NetworkData::TwoPort(s), c(50.0, 0.0))
    }

    pub fn with_reference_impedance(mut self, z: Complex) -> Self {
        self.reference_impedance = z;
        self
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn data(&self) -> &NetworkData {
        &self.data
    }

    pub fn reference_impedance(&self) -> Complex {
        self.reference_impedance
    }

    pub fn ports(&self) -> usize {
        match self.data {
            NetworkData::OnePort(_) => 1,
            NetworkData::TwoPort(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn two_port_data(&self) -> Result<&[SParams2]> {
        match &self.data {
            NetworkData::TwoPort(v) => Ok(v),
            NetworkData::OnePort(_) => Err(Error::Precondition(format!(
                "{}: expected a two-port network",
                self.name
            ))),
        }
    }

    /// Reflection at port 1: the one-port data itself, or s11 of a two-port.
    pub fn gamma_left(&self) -> Vec<Complex> {
        match &self.data {
            NetworkData::OnePort(v) => v.clone(),
            NetworkData::TwoPort(v) => v.iter().map(|s| s.s11).collect(),
        }
    }

    /// Reflection at port 2: s22 of a two-port, or the one-port data.
    pub fn gamma_right(&self) -> Vec<Complex> {
        match &self.data {
            NetworkData::OnePort(v) => v.clone(),
            NetworkData::TwoPort(v) => v.iter().map(|s| s.s22).collect(),
        }
    }
}

fn validate_grid(f: &[f64]) -> std::result::Result<(), String> {
    if let Some(bad) = f.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(format!("invalid frequency {bad}"));
    }
    if let Some(i) = f.windows(2).position(|w| w[1] <= w[0]) {
        return Err(format!(
            "frequencies not strictly increasing at index {} ({} -> {})",
            i + 1,
            f[i],
            f[i + 1]
        ));
    }
    Ok(())
}

pub fn same_frequency(a: f64, b: f64) -> bool {
    (a - b).abs() <= GRID_RELATIVE_TOLERANCE * a.abs().max(b.abs())
}

pub fn same_grid(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| same_frequency(*x, *y))
}

/// Checks that every network shares the first network's frequency grid.
/// No interpolation is attempted.
pub fn assert_common_grid<'a, I>(nets: I) -> Result<()>
where
    I: IntoIterator<Item = &'a FrequencyNetwork>,
{
    let mut iter = nets.into_iter();
    let Some(first) = iter.next() else {
        return Ok(());
    };
    for net in iter {
        check_grid(first.frequencies(), net)?;
    }
    Ok(())
}

pub(crate) fn check_grid(reference: &[f64], net: &FrequencyNetwork) -> Result<()> {
    let f = net.frequencies();
    if f.len() != reference.len() {
        return Err(Error::GridMismatch {
            name: net.name.clone(),
            detail: format!("{} points, expected {}", f.len(), reference.len()),
        });
    }
    if let Some(i) = (0..f.len()).find(|&i| !same_frequency(f[i], reference[i])) {
        return Err(Error::GridMismatch {
            name: net.name.clone(),
            detail: format!("point {i}: {} Hz vs {} Hz", f[i], reference[i]),
        });
    }
    Ok(())
}

/// `n` evenly spaced frequencies from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn net(name: &str, f: Vec<f64>) -> FrequencyNetwork {
        let n = f.len();
        FrequencyNetwork::one_port(name, f, vec![c(0.0, 0.0); n]).unwrap()
    }

    #[test]
    fn identical_grids_pass() {
        let a = net("a", vec![1e9, 2e9, 3e9]);
        let b = net("b", vec![1e9, 2e9, 3e9]);
        assert_common_grid([&a, &b]).unwrap();
    }

    #[test]
    fn one_hertz_shift_at_one_ghz_is_tolerated() {
        let a = net("a", vec![1e9, 2e9]);
        let b = net("b", vec![1e9 + 1.0, 2e9]);
        assert_common_grid([&a, &b]).unwrap();
    }

    #[test]
    fn missing_point_names_offending_network() {
        let a = net("a", vec![1e9, 2e9, 3e9]);
        let b = net("short.s1p", vec![1e9, 3e9]);
        match assert_common_grid([&a, &b]) {
            Err(Error::GridMismatch { name, .. }) => assert_eq!(name, "short.s1p"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_increasing_frequencies_are_rejected() {
        let r = FrequencyNetwork::one_port("x", vec![1e9, 1e9], vec![c(0.0, 0.0); 2]);
        assert!(matches!(r, Err(Error::Grid(_))));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let r = FrequencyNetwork::one_port("x", vec![1e9, 2e9], vec![c(0.0, 0.0)]);
        assert!(matches!(r, Err(Error::Grid(_))));
    }

    #[test]
    fn nan_is_not_admitted() {
        let r = FrequencyNetwork::one_port("x", vec![1e9], vec![c(f64::NAN, 0.0)]);
        assert!(r.is_err());
    }
}
