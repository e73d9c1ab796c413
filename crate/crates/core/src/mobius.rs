//! Möbius transformations `f(z) = (az + b) / (cz + d)` in 2×2 matrix form,
//! and least-squares estimation of a transformation from paired reflection
//! measurements.
//!
//! A Möbius matrix is defined only up to a nonzero complex scalar; compare
//! two of them with [`MobiusMatrix::normalized`]. Composition of maps is the
//! matrix product.

use crate::error::{Error, Result};
use crate::linalg::nullspace4;
use crate::rf::matrix::{Complex, ComplexMatrix2, ONE};

/// Default floor on `|cz + d|` below which [`apply`] reports a pole.
pub const POLE_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMatrix(pub ComplexMatrix2);

impl MobiusMatrix {
    pub const IDENTITY: Self = Self(ComplexMatrix2::IDENTITY);

    pub fn matrix(&self) -> &ComplexMatrix2 {
        &self.0
    }

    pub fn normalized(&self) -> ComplexMatrix2 {
        self.0.normalized()
    }

    /// Inverse map. Any scalar multiple of the adjugate represents it, so no
    /// division by the determinant is needed beyond the singularity check.
    pub fn inverse(&self) -> Result<Self> {
        let det = self.0.det();
        if det.norm() <= 1e-14 * self.0.norm().powi(2) {
            return Err(Error::SingularMatrix {
                context: "Möbius inverse",
                magnitude: det.norm(),
            });
        }
        Ok(Self(self.0.adjugate()))
    }

    pub fn apply(&self, z: Complex) -> Result<Complex> {
        apply(self, z)
    }
}

impl From<ComplexMatrix2> for MobiusMatrix {
    fn from(m: ComplexMatrix2) -> Self {
        Self(m)
    }
}

pub fn apply(m: &MobiusMatrix, z: Complex) -> Result<Complex> {
    let m = &m.0;
    let den = m.e21 * z + m.e22;
    if !(den.norm() > POLE_FLOOR) {
        return Err(Error::PoleInput {
            magnitude: den.norm(),
        });
    }
    Ok((m.e11 * z + m.e12) / den)
}

/// `compose(f1, f2)` represents `z ↦ f1(f2(z))`.
pub fn compose(f1: &MobiusMatrix, f2: &MobiusMatrix) -> MobiusMatrix {
    MobiusMatrix(f1.0 * f2.0)
}

/// Paired reflection measurements `(gamma_left, gamma_right)`, one per load.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionPairSet {
    pairs: Vec<(Complex, Complex)>,
}

impl ReflectionPairSet {
    pub fn new(pairs: Vec<(Complex, Complex)>) -> Result<Self> {
        if pairs
            .iter()
            .any(|(a, b)| !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()))
        {
            return Err(Error::Precondition("non-finite reflection pair".into()));
        }
        Ok(Self { pairs })
    }

    pub fn from_slices(left: &[Complex], right: &[Complex]) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::Precondition(format!(
                "reflection lists differ in length: {} vs {}",
                left.len(),
                right.len()
            )));
        }
        Self::new(left.iter().copied().zip(right.iter().copied()).collect())
    }

    pub fn pairs(&self) -> &[(Complex, Complex)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of left values that are mutually separated by at least `threshold`.
    pub fn distinct_left(&self, threshold: f64) -> usize {
        let mut reps: Vec<Complex> = Vec::new();
        for (l, _) in &self.pairs {
            if reps.iter().all(|r| (r - l).norm() >= threshold) {
                reps.push(*l);
            }
        }
        reps.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CrossMapOptions {
    /// Minimum |Γ_left difference| for two loads to count as distinct.
    pub distinct_threshold: f64,
    /// Minimum `s3 / s1` of the system matrix.
    pub rank_threshold: f64,
}

impl Default for CrossMapOptions {
    fn default() -> Self {
        Self {
            distinct_threshold: 0.01,
            rank_threshold: 1e-8,
        }
    }
}

/// Solution of [`solve_cross_map`].
#[derive(Debug, Clone, Copy)]
pub struct CrossMap {
    pub map: MobiusMatrix,
    /// `s4 / s3` of the system matrix; 0 for exactly consistent data.
    pub quality: f64,
}

/// Estimates the Möbius matrix `H` with `Γ_left = H(Γ_right)` from at least
/// three pairs: the smallest right singular vector of the system whose rows
/// are `[-Γr, -1, Γr·Γl, Γl]`, read row-major as `h11, h12, h21, h22`.
pub fn solve_cross_map(pairs: &ReflectionPairSet, opts: &CrossMapOptions) -> Result<CrossMap> {
    let unique = pairs.distinct_left(opts.distinct_threshold);
    if unique < 3 {
        return Err(Error::RankDeficient {
            reason: format!(
                "{unique} distinct loads among {} (at least 3 required)",
                pairs.len()
            ),
        });
    }
    let rows: Vec<[Complex; 4]> = pairs
        .pairs()
        .iter()
        .map(|&(gl, gr)| [-gr, -ONE, gr * gl, gl])
        .collect();
    let ns = nullspace4(&rows)?;
    if !(ns.rank_margin() >= opts.rank_threshold) {
        return Err(Error::RankDeficient {
            reason: format!("s3/s1 = {:e} below {:e}", ns.rank_margin(), opts.rank_threshold),
        });
    }
    Ok(CrossMap {
        map: MobiusMatrix(ComplexMatrix2::from_entries(ns.vector)),
        quality: ns.quality(),
    })
}
