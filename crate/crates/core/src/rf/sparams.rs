use serde::{Deserialize, Serialize};

use super::matrix::{Complex, ComplexMatrix2, ONE, ZERO};
use crate::error::{Error, Result};

/// Default |s21| (and |t22|) floor below which a network counts as non-transmissive.
pub const DEFAULT_TRANSMISSION_FLOOR: f64 = 1e-30;

/// Two-port scattering parameters. Passivity is not assumed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SParams2 {
    pub s11: Complex,
    pub s12: Complex,
    pub s21: Complex,
    pub s22: Complex,
}

impl SParams2 {
    pub const THRU: Self = Self {
        s11: ZERO,
        s12: ONE,
        s21: ONE,
        s22: ZERO,
    };

    pub const fn new(s11: Complex, s12: Complex, s21: Complex, s22: Complex) -> Self {
        Self { s11, s12, s21, s22 }
    }

    /// Two isolated one-ports: `gamma_left` at port 1, `gamma_right` at port 2.
    pub fn reflect_pair(gamma_left: Complex, gamma_right: Complex) -> Self {
        Self::new(gamma_left, ZERO, ZERO, gamma_right)
    }

    pub fn reciprocal(s11: Complex, s21: Complex, s22: Complex) -> Self {
        Self::new(s11, s21, s21, s22)
    }

    pub fn det(&self) -> Complex {
        self.s11 * self.s22 - self.s12 * self.s21
    }

    /// Entries in Touchstone order: S11, S21, S12, S22.
    pub fn touchstone_order(&self) -> [Complex; 4] {
        [self.s11, self.s21, self.s12, self.s22]
    }

    /// Entries in (s11, s12, s21, s22) order, matching [`SPARAM_NAMES`].
    pub fn entries(&self) -> [Complex; 4] {
        [self.s11, self.s12, self.s21, self.s22]
    }

    /// The same device seen with its ports swapped.
    pub fn flipped(&self) -> Self {
        Self::new(self.s22, self.s21, self.s12, self.s11)
    }

    /// Input reflection at port 1 when port 2 is terminated in `load`.
    pub fn input_reflection(&self, load: Complex) -> Complex {
        self.s11 + self.s12 * self.s21 * load / (ONE - self.s22 * load)
    }

    /// Input reflection at port 2 when port 1 is terminated in `load`.
    pub fn output_reflection(&self, load: Complex) -> Complex {
        self.s22 + self.s12 * self.s21 * load / (ONE - self.s11 * load)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn map(&self, f: impl Fn(Complex) -> Complex) -> Self {
        Self::new(f(self.s11), f(self.s12), f(self.s21), f(self.s22))
    }
}

/// Names of the four scattering parameters, in [`SParams2::entries`] order.
pub const SPARAM_NAMES: [&str; 4] = ["S11", "S12", "S21", "S22"];

/// S → T with the convention `T = (1/S21) [[-det S, S11], [-S22, 1]]`,
/// so that `[b1, a1]ᵀ = T [a2, b2]ᵀ` and cascades multiply left to right.
pub fn s_to_t(s: &SParams2) -> Result<ComplexMatrix2> {
    s_to_t_with_floor(s, DEFAULT_TRANSMISSION_FLOOR)
}

pub fn s_to_t_with_floor(s: &SParams2, floor: f64) -> Result<ComplexMatrix2> {
    let mag = s.s21.norm();
    if !(mag > floor) {
        return Err(Error::NonTransmissive { magnitude: mag });
    }
    let inv = s.s21.inv();
    Ok(ComplexMatrix2::new(-s.det() * inv, s.s11 * inv, -s.s22 * inv, inv))
}

pub fn t_to_s(t: &ComplexMatrix2) -> Result<SParams2> {
    t_to_s_with_floor(t, DEFAULT_TRANSMISSION_FLOOR)
}

pub fn t_to_s_with_floor(t: &ComplexMatrix2, floor: f64) -> Result<SParams2> {
    let mag = t.e22.norm();
    if !(mag > floor) {
        return Err(Error::SingularConversion { magnitude: mag });
    }
    let inv = t.e22.inv();
    Ok(SParams2::new(t.e12 * inv, t.det() * inv, inv, -t.e21 * inv))
}

/// Cascade of two S-parameter blocks (port 2 of `x` into port 1 of `y`).
///
/// Works for non-transmissive blocks where the T route is undefined.
pub fn star(x: &SParams2, y: &SParams2) -> SParams2 {
    let d = (ONE - x.s22 * y.s11).inv();
    SParams2::new(
        x.s11 + x.s12 * y.s11 * x.s21 * d,
        x.s12 * y.s12 * d,
        y.s21 * x.s21 * d,
        y.s22 + y.s21 * x.s22 * y.s12 * d,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rf::matrix::c;

    #[test]
    fn ideal_thru_maps_to_identity() {
        let t = s_to_t(&SParams2::THRU).unwrap();
        assert_eq!(t, ComplexMatrix2::IDENTITY);
        assert_eq!(t_to_s(&ComplexMatrix2::IDENTITY).unwrap(), SParams2::THRU);
    }

    #[test]
    fn zero_transmission_is_rejected() {
        let s = SParams2::reflect_pair(c(0.5, 0.0), c(-0.5, 0.0));
        assert!(matches!(s_to_t(&s), Err(Error::NonTransmissive { .. })));
    }

    #[test]
    fn zero_t22_is_rejected() {
        let t = ComplexMatrix2::new(ONE, ZERO, ZERO, ZERO);
        assert!(matches!(t_to_s(&t), Err(Error::SingularConversion { .. })));
    }

    #[test]
    fn floor_is_configurable() {
        let s = SParams2::new(ZERO, c(1e-6, 0.0), c(1e-6, 0.0), ZERO);
        assert!(s_to_t(&s).is_ok());
        assert!(s_to_t_with_floor(&s, 1e-3).is_err());
    }

    #[test]
    fn star_matches_t_cascade() {
        let x = SParams2::new(c(0.1, 0.2), c(0.7, -0.1), c(0.6, 0.3), c(-0.2, 0.05));
        let y = SParams2::new(c(-0.3, 0.1), c(0.5, 0.5), c(0.4, -0.4), c(0.15, -0.25));
        let via_t = t_to_s(&(s_to_t(&x).unwrap() * s_to_t(&y).unwrap())).unwrap();
        assert!(star(&x, &y).max_abs_diff(&via_t) < 1e-14);
    }

    #[test]
    fn flipped_t_matrix_is_p_tinv_p() {
        let x = SParams2::new(c(0.1, 0.2), c(0.7, -0.1), c(0.6, 0.3), c(-0.2, 0.05));
        let p = ComplexMatrix2::PERMUTATION;
        let t = s_to_t(&x).unwrap();
        let tf = s_to_t(&x.flipped()).unwrap();
        assert!((p * t.inverse().unwrap() * p).max_abs_diff(&tf) < 1e-14);
    }

    #[test]
    fn terminated_input_matches_mobius_form() {
        // Γin = (t11 ρ + t12)/(t21 ρ + t22)
        let x = SParams2::new(c(0.1, 0.2), c(0.7, -0.1), c(0.6, 0.3), c(-0.2, 0.05));
        let t = s_to_t(&x).unwrap();
        let rho = c(0.3, -0.8);
        let mobius = (t.e11 * rho + t.e12) / (t.e21 * rho + t.e22);
        assert!((x.input_reflection(rho) - mobius).norm() < 1e-14);
    }
}
