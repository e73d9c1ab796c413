use std::ops::{Mul, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex = Complex64;

pub(crate) const ZERO: Complex = Complex::new(0.0, 0.0);
pub(crate) const ONE: Complex = Complex::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// A 2×2 complex matrix in row-major entry naming.
///
/// Holds T-parameters, the A/B error boxes and Möbius coefficient matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix2 {
    pub e11: Complex,
    pub e12: Complex,
    pub e21: Complex,
    pub e22: Complex,
}

impl ComplexMatrix2 {
    pub const IDENTITY: Self = Self::new(ONE, ZERO, ZERO, ONE);
    /// The port-swap permutation `[[0, 1], [1, 0]]`.
    pub const PERMUTATION: Self = Self::new(ZERO, ONE, ONE, ZERO);

    pub const fn new(e11: Complex, e12: Complex, e21: Complex, e22: Complex) -> Self {
        Self { e11, e12, e21, e22 }
    }

    pub fn from_rows(rows: [[Complex; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn entries(&self) -> [Complex; 4] {
        [self.e11, self.e12, self.e21, self.e22]
    }

    pub fn from_entries(e: [Complex; 4]) -> Self {
        Self::new(e[0], e[1], e[2], e[3])
    }

    pub fn det(&self) -> Complex {
        self.e11 * self.e22 - self.e12 * self.e21
    }

    pub fn trace(&self) -> Complex {
        self.e11 + self.e22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.e11, self.e21, self.e12, self.e22)
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::new(self.e11 * s, self.e12 * s, self.e21 * s, self.e22 * s)
    }

    pub fn adjugate(&self) -> Self {
        Self::new(self.e22, -self.e12, -self.e21, self.e11)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Inverse, rejecting matrices whose determinant is negligible relative
    /// to the squared norm.
    pub fn inverse(&self) -> Result<Self> {
        self.checked_inverse("matrix inverse")
    }

    pub(crate) fn checked_inverse(&self, context: &'static str) -> Result<Self> {
        let det = self.det();
        let scale = self.norm().powi(2);
        if !(det.norm() > 1e-300) || det.norm() <= 1e-14 * scale {
            return Err(Error::SingularMatrix {
                context,
                magnitude: det.norm(),
            });
        }
        Ok(self.adjugate().scale(det.inv()))
    }

    /// Rescales so that the entry with the largest magnitude becomes exactly 1.
    ///
    /// Two matrices that differ only by a nonzero complex scalar normalize to
    /// the same result, which makes this the comparison form for Möbius
    /// matrices and other quantities defined only up to scale.
    pub fn normalized(&self) -> Self {
        let e = self.entries();
        let (idx, _) = e
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, bv), (i, z)| {
                if z.norm() > bv {
                    (i, z.norm())
                } else {
                    (bi, bv)
                }
            });
        self.scale(e[idx].inv())
    }

    /// Rescales by a reference entry chosen from `other` (its largest entry),
    /// so both matrices share the normalization index.
    pub fn normalized_like(&self, other: &Self) -> Self {
        let o = other.entries();
        let idx = (0..4)
            .max_by(|&i, &j| o[i].norm().total_cmp(&o[j].norm()))
            .unwrap_or(0);
        self.scale(self.entries()[idx].inv())
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
}

impl Mul for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, r: ComplexMatrix2) -> ComplexMatrix2 {
        ComplexMatrix2::new(
            self.e11 * r.e11 + self.e12 * r.e21,
            self.e11 * r.e12 + self.e12 * r.e22,
            self.e21 * r.e11 + self.e22 * r.e21,
            self.e21 * r.e12 + self.e22 * r.e22,
        )
    }
}

impl Mul<Complex> for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn mul(self, s: Complex) -> ComplexMatrix2 {
        self.scale(s)
    }
}

impl Neg for ComplexMatrix2 {
    type Output = ComplexMatrix2;

    fn neg(self) -> ComplexMatrix2 {
        self.scale(c(-1.0, 0.0))
    }
}

/// T-parameter cascade: the plain matrix product `a · b`.
pub fn cascade(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix2 {
    *a * *b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: [f64; 8]) -> ComplexMatrix2 {
        ComplexMatrix2::new(c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5]), c(v[6], v[7]))
    }

    #[test]
    fn identity_is_neutral() {
        let x = m([0.3, -0.2, 1.1, 0.4, -0.7, 0.05, 0.9, 0.9]);
        assert_eq!(cascade(&ComplexMatrix2::IDENTITY, &x), x);
        assert_eq!(cascade(&x, &ComplexMatrix2::IDENTITY), x);
    }

    #[test]
    fn inverse_cancels() {
        let x = m([0.3, -0.2, 1.1, 0.4, -0.7, 0.05, 0.9, 0.9]);
        let prod = cascade(&x, &x.inverse().unwrap());
        assert!(prod.max_abs_diff(&ComplexMatrix2::IDENTITY) < 1e-12);
    }

    #[test]
    fn singular_inverse_is_rejected() {
        let x = m([1.0, 0.0, 2.0, 0.0, 2.0, 0.0, 4.0, 0.0]);
        assert!(matches!(x.inverse(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn permutation_is_involution() {
        let p = ComplexMatrix2::PERMUTATION;
        assert_eq!(p * p, ComplexMatrix2::IDENTITY);
        assert_eq!(p.transpose(), p);
    }

    #[test]
    fn normalization_removes_scalar() {
        let x = m([0.3, -0.2, 1.1, 0.4, -0.7, 0.05, 0.9, 0.9]);
        let y = x.scale(c(-2.5, 7.0));
        assert!(x.normalized().max_abs_diff(&y.normalized()) < 1e-15);
    }
}
