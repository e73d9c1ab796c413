//! Per-frequency building blocks of the symmetric-reciprocal-match solve.
//!
//! Notation: `A`, `B` are the left/right error boxes (T-parameters with
//! unit `e22`), `P` the port-swap permutation, `N` the network standard and
//! `R` its left half when the network is split as `N = R·P·R⁻¹·P`.
//!
//! * `H ∝ A·P·B·P` maps right-port load reflections to left-port ones.
//! * `F_a ∝ A·N·P·B·P` (network-load on the left) or `F_b ∝ A·P·N·B·P`
//!   (network-load on the right); in half mode `N` is replaced by `R`
//!   and `R⁻¹` respectively.
//! * The virtual thru is proportional to `k·A·B`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues2, eigvec_ratio, nullspace4};
use crate::mobius::{apply, solve_cross_map, CrossMap, CrossMapOptions, MobiusMatrix, ReflectionPairSet};
use crate::rf::matrix::{Complex, ComplexMatrix2, ONE};

use super::measurement::Side;

const P: ComplexMatrix2 = ComplexMatrix2::PERMUTATION;

/// Relative determinant floor for H and F inversions.
const SINGULAR_FLOOR: f64 = 1e-14;

fn invert_h(h: &MobiusMatrix) -> Result<ComplexMatrix2> {
    h.0.checked_inverse("H").map_err(|_| Error::SingularH {
        magnitude: h.0.det().norm(),
    })
}

fn invert_f(f: &MobiusMatrix) -> Result<ComplexMatrix2> {
    let det = f.0.det();
    if det.norm() <= SINGULAR_FLOOR * f.0.norm().powi(2) {
        return Err(Error::SingularF { magnitude: det.norm() });
    }
    Ok(f.0.adjugate().scale(det.inv()))
}

/// Cross-port map `H` from the symmetric loads: `Γa = H(Γb)`.
pub fn solve_h(gamma_a: &[Complex], gamma_b: &[Complex], opts: &CrossMapOptions) -> Result<CrossMap> {
    let pairs = ReflectionPairSet::from_slices(gamma_a, gamma_b)?;
    solve_cross_map(&pairs, opts)
}

/// Cross-port map involving the network-load measurements.
///
/// Left: pairs `(Γ_netload, Γb)` giving `F_a`. Right: pairs `(Γa, Γ_netload)`
/// giving `F_b`.
pub fn solve_f(
    gamma_a: &[Complex],
    gamma_b: &[Complex],
    network_loads: &[Complex],
    side: Side,
    opts: &CrossMapOptions,
) -> Result<CrossMap> {
    if gamma_a.len() != network_loads.len() || gamma_b.len() != network_loads.len() {
        return Err(Error::Precondition(format!(
            "{} network-load values for {} loads",
            network_loads.len(),
            gamma_a.len()
        )));
    }
    let pairs = match side {
        Side::Left => ReflectionPairSet::from_slices(network_loads, gamma_b)?,
        Side::Right => ReflectionPairSet::from_slices(gamma_a, network_loads)?,
    };
    solve_cross_map(&pairs, opts)
}

/// Virtual thru from the full network, known only up to a scalar:
/// `H·F_a⁻¹·M_net` (left) or `M_net·P·F_b⁻¹·H·P` (right).
pub fn virtual_thru_full(
    h: &MobiusMatrix,
    f: &MobiusMatrix,
    m_net: &ComplexMatrix2,
    side: Side,
) -> Result<ComplexMatrix2> {
    let fi = invert_f(f)?;
    Ok(match side {
        Side::Left => h.0 * fi * *m_net,
        Side::Right => *m_net * P * fi * h.0 * P,
    })
}

/// Virtual thru from a half network. All unknown scalars cancel, so the
/// result equals `k·A·B` exactly:
/// `H·F_a⁻¹·M_net·P·H⁻¹·F_a·P` (left) or `F_b·H⁻¹·M_net·P·F_b⁻¹·H·P` (right).
pub fn virtual_thru_half(
    h: &MobiusMatrix,
    f: &MobiusMatrix,
    m_net: &ComplexMatrix2,
    side: Side,
) -> Result<ComplexMatrix2> {
    let fi = invert_f(f)?;
    let hi = invert_h(h)?;
    Ok(match side {
        Side::Left => h.0 * fi * *m_net * P * hi * f.0 * P,
        Side::Right => f.0 * hi * *m_net * P * fi * h.0 * P,
    })
}

/// Eigenvector ratios of one port, each eigenvector scaled to a unit second
/// component. `w11` belongs to `lambda`, `w12` to the other eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub w11: Complex,
    pub w12: Complex,
    pub lambda: Complex,
}

impl EigenPair {
    fn swapped(&self, other_lambda: Complex) -> Self {
        Self {
            w11: self.w12,
            w12: self.w11,
            lambda: other_lambda,
        }
    }
}

/// Eigen-decomposition of both ports with eigenvectors paired by eigenvalue.
#[derive(Debug, Clone, Copy)]
pub struct EigenSplit {
    pub port_a: EigenPair,
    pub port_b: EigenPair,
    pub lambda2: Complex,
}

impl EigenSplit {
    /// Both joint orderings; the eigenvalue order is shared between ports.
    pub fn orderings(&self) -> [(EigenPair, EigenPair); 2] {
        [
            (self.port_a, self.port_b),
            (
                self.port_a.swapped(self.lambda2),
                self.port_b.swapped(self.lambda2),
            ),
        ]
    }

    /// `|λ1 + λ2| / |λ1 − λ2|`; zero for the ideal antisymmetric spectrum.
    pub fn breakdown(&self) -> f64 {
        let l1 = self.port_a.lambda;
        let l2 = self.lambda2;
        (l1 + l2).norm() / (l1 - l2).norm()
    }
}

/// Relative eigenvalue separation below which the split is degenerate.
pub const DEGENERATE_EIGEN_TOLERANCE: f64 = 1e-8;

/// Eigenvectors of `M_thru·P·H⁻¹` (port A) and `(P·H⁻¹·M_thru)ᵀ` (port B).
pub fn eigen_split(m_thru: &ComplexMatrix2, h: &MobiusMatrix) -> Result<EigenSplit> {
    let hi = invert_h(h)?;
    let ma = *m_thru * P * hi;
    let mb = (P * hi * *m_thru).transpose();
    let (l1, l2) = eigenvalues2(&ma);
    let scale = l1.norm().max(l2.norm());
    let sep = (l1 - l2).norm();
    if !(sep >= DEGENERATE_EIGEN_TOLERANCE * scale) || scale == 0.0 {
        return Err(Error::DegenerateEigen {
            ratio: if scale > 0.0 { sep / scale } else { 0.0 },
        });
    }
    let ratio = |m: &ComplexMatrix2, l: Complex| {
        eigvec_ratio(m, l).ok_or(Error::NormalizationFailure { ratio: 0.0 })
    };
    let port_a = EigenPair {
        w11: ratio(&ma, l1)?,
        w12: ratio(&ma, l2)?,
        lambda: l1,
    };
    let port_b = EigenPair {
        w11: ratio(&mb, l1)?,
        w12: ratio(&mb, l2)?,
        lambda: l1,
    };
    Ok(EigenSplit {
        port_a,
        port_b,
        lambda2: l2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    A,
    B,
}

/// Row of a port system stating that a standard with actual reflection `rho`
/// was measured as `gamma`. Unknown order is `[a11, a12, a21, 1]` for port A
/// and `[b11, b21, b12, 1]` for port B.
pub fn defined_row(port: Port, rho: Complex, gamma: Complex) -> [Complex; 4] {
    match port {
        Port::A => [-rho, -ONE, gamma * rho, gamma],
        Port::B => [-rho, ONE, -gamma * rho, gamma],
    }
}

/// The two rows contributed by the eigenvectors.
pub fn eigen_rows(eig: &EigenPair) -> [[Complex; 4]; 2] {
    [
        [-ONE, -ONE, eig.w11, eig.w11],
        [ONE, -ONE, -eig.w12, eig.w12],
    ]
}

/// Default `s3 / s1` floor of the port systems.
pub const PORT_RANK_THRESHOLD: f64 = 1e-8;

/// Solves a port system by its nullspace, normalized by the last element.
pub fn solve_one_port(rows: &[[Complex; 4]], port: Port) -> Result<ComplexMatrix2> {
    if rows.len() < 3 {
        return Err(Error::RankDeficient {
            reason: format!("{} rows in port system, at least 3 required", rows.len()),
        });
    }
    let ns = nullspace4(rows)?;
    if !(ns.rank_margin() >= PORT_RANK_THRESHOLD) {
        return Err(Error::RankDeficient {
            reason: format!("port system s3/s1 = {:e}", ns.rank_margin()),
        });
    }
    let v = ns.vector;
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let ratio = v[3].norm() / norm;
    if !(ratio >= 1e-12) {
        return Err(Error::NormalizationFailure { ratio });
    }
    let x = [v[0] / v[3], v[1] / v[3], v[2] / v[3]];
    Ok(match port {
        Port::A => ComplexMatrix2::new(x[0], x[1], x[2], ONE),
        Port::B => ComplexMatrix2::new(x[0], x[2], x[1], ONE),
    })
}

/// Error box of one port from its eigenvectors and one or more defined
/// standards, each given as `(measured Γ, defined ρ)`.
pub fn solve_port_errors(
    eig: &EigenPair,
    defined: &[(Complex, Complex)],
    port: Port,
) -> Result<ComplexMatrix2> {
    if defined.is_empty() {
        return Err(Error::Precondition("at least one defined standard is required".into()));
    }
    let mut rows: Vec<[Complex; 4]> = eigen_rows(eig).to_vec();
    rows.extend(defined.iter().map(|&(g, rho)| defined_row(port, rho, g)));
    solve_one_port(&rows, port)
}

/// One candidate pair of error boxes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub a: ComplexMatrix2,
    pub b: ComplexMatrix2,
}

impl Candidate {
    pub fn correct_a(&self, gamma: Complex) -> Result<Complex> {
        apply(&MobiusMatrix(self.a.adjugate()), gamma)
    }

    pub fn correct_b(&self, gamma: Complex) -> Result<Complex> {
        apply(&MobiusMatrix(P * self.b * P), gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Choice {
    pub index: usize,
    pub costs: [f64; 2],
}

impl Choice {
    /// Relative gap between the rejected and the chosen cost.
    pub fn margin(&self) -> f64 {
        let chosen = self.costs[self.index];
        let other = self.costs[1 - self.index];
        if other > 0.0 {
            (other - chosen) / other
        } else {
            0.0
        }
    }
}

/// Default relative cost gap below which the choice is ambiguous.
pub const DEFAULT_AMBIGUITY_MARGIN: f64 = 0.10;

fn hypothesis_cost(c: &Candidate, gamma_a: Complex, gamma_b: Complex, estimate: Complex) -> f64 {
    let ra = c.correct_a(gamma_a).map(|r| (r - estimate).norm());
    let rb = c.correct_b(gamma_b).map(|r| (r - estimate).norm());
    match (ra, rb) {
        (Ok(x), Ok(y)) => x + y,
        _ => f64::INFINITY,
    }
}

/// Picks the candidate that calibrates the designated load closest to its
/// estimated reflection at both ports.
///
/// Returns [`Error::AmbiguousChoice`] when the two costs are within
/// `margin` (relative) of each other.
pub fn disambiguate(
    candidates: &[Candidate; 2],
    gamma_a: Complex,
    gamma_b: Complex,
    estimate: Complex,
    margin: f64,
) -> Result<Choice> {
    let costs = [
        hypothesis_cost(&candidates[0], gamma_a, gamma_b, estimate),
        hypothesis_cost(&candidates[1], gamma_a, gamma_b, estimate),
    ];
    let index = if costs[1] < costs[0] { 1 } else { 0 };
    let choice = Choice { index, costs };
    let ambiguous = match (costs[0].is_finite(), costs[1].is_finite()) {
        (true, true) => (costs[0] - costs[1]).abs() <= margin * costs[0].max(costs[1]),
        (false, false) => true,
        _ => false,
    };
    if ambiguous {
        return Err(Error::AmbiguousChoice {
            cost_first: costs[0],
            cost_second: costs[1],
        });
    }
    Ok(choice)
}

/// One-port-corrected network `A⁻¹·M_net·B⁻¹`, equal to `k·N`.
pub fn one_port_corrected(a: &ComplexMatrix2, b: &ComplexMatrix2, m_net: &ComplexMatrix2) -> Result<ComplexMatrix2> {
    let ai = a.checked_inverse("error box A")?;
    let bi = b.checked_inverse("error box B")?;
    Ok(ai * *m_net * bi)
}

/// How the sign of `k` was settled at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KDecision {
    /// Read off a defined thru; no sign ambiguity.
    Direct,
    /// The transmission estimate was decisive.
    Estimate,
    /// The estimate was decisive but the result jumps by more than 90°
    /// from the previous point; the sign may be flipped.
    EstimateFlipRisk,
    /// The estimate was indecisive; the sign follows the neighboring point.
    Continuity,
}

#[derive(Debug, Clone, Copy)]
pub struct KOptions {
    /// Use neighboring frequencies when the estimate is indecisive.
    pub continuity: bool,
    /// The estimate is decisive when the two signs' phase distances to it
    /// differ by at least twice this angle (radians).
    pub decisive_margin: f64,
}

impl Default for KOptions {
    fn default() -> Self {
        Self {
            continuity: true,
            decisive_margin: 10f64.to_radians(),
        }
    }
}

/// `k` at one point with its decision tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KPoint {
    pub k: Complex,
    pub decision: KDecision,
}

fn phase_distance(a: Complex, b: Complex) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Solves `k` over a sweep from `det(A⁻¹·M_net·B⁻¹) = k²` (reciprocal
/// network, `det N = 1`). The sign is chosen so the corrected network's S21
/// lies nearer in phase to `estimate`; see [`KOptions`] for the
/// cross-frequency tie-breaking.
pub fn solve_k(
    a: &[ComplexMatrix2],
    b: &[ComplexMatrix2],
    m_net: &[ComplexMatrix2],
    estimate: &[Complex],
    opts: &KOptions,
) -> Result<Vec<KPoint>> {
    let n = a.len();
    if b.len() != n || m_net.len() != n || estimate.len() != n {
        return Err(Error::Precondition("solve_k inputs differ in length".into()));
    }
    struct Raw {
        root: Complex,
        plus_dist: f64,
    }
    let raw = (0..n)
        .map(|i| {
            let x = one_port_corrected(&a[i], &b[i], &m_net[i]).map_err(|e| e.at(i))?;
            let root = x.det().sqrt();
            if x.e22.norm() == 0.0 || root.norm() == 0.0 {
                return Err(Error::NonTransmissive { magnitude: 0.0 }.at(i));
            }
            // S21 of the corrected network for +root is root / x22
            let plus_dist = phase_distance(root / x.e22, estimate[i]);
            Ok(Raw { root, plus_dist })
        })
        .collect::<Result<Vec<_>>>()?;

    let by_estimate = |r: &Raw| if r.plus_dist <= PI - r.plus_dist { r.root } else { -r.root };
    let gap = |r: &Raw| (r.plus_dist - (PI - r.plus_dist)).abs();
    let decisive = |r: &Raw| gap(r) >= 2.0 * opts.decisive_margin;
    let tied = |r: &Raw| gap(r) < 1e-9;
    let nearest = |root: Complex, anchor: Complex| {
        if phase_distance(root, anchor) <= FRAC_PI_2 {
            root
        } else {
            -root
        }
    };

    let mut out: Vec<Option<KPoint>> = vec![None; n];
    if !opts.continuity {
        for (i, r) in raw.iter().enumerate() {
            if tied(r) {
                return Err(Error::SignUndecidable.at(i));
            }
            out[i] = Some(KPoint {
                k: by_estimate(r),
                decision: KDecision::Estimate,
            });
        }
        return Ok(out.into_iter().flatten().collect());
    }

    // Seed: decisive points, or failing that the first untied point.
    let mut any_decisive = false;
    for (i, r) in raw.iter().enumerate() {
        if decisive(r) {
            any_decisive = true;
            out[i] = Some(KPoint {
                k: by_estimate(r),
                decision: KDecision::Estimate,
            });
        }
    }
    if !any_decisive {
        let Some(i) = raw.iter().position(|r| !tied(r)) else {
            return Err(Error::SignUndecidable.at(0));
        };
        out[i] = Some(KPoint {
            k: by_estimate(&raw[i]),
            decision: KDecision::Estimate,
        });
    }

    // Forward: fill indecisive points from the previous one, flag jumps.
    let mut prev: Option<Complex> = None;
    for i in 0..n {
        match out[i] {
            Some(ref mut p) => {
                if let Some(pk) = prev {
                    if phase_distance(p.k, pk) > FRAC_PI_2 {
                        p.decision = KDecision::EstimateFlipRisk;
                    }
                }
                prev = Some(p.k);
            }
            None => {
                if let Some(pk) = prev {
                    let k = nearest(raw[i].root, pk);
                    out[i] = Some(KPoint {
                        k,
                        decision: KDecision::Continuity,
                    });
                    prev = Some(k);
                }
            }
        }
    }
    // Backward for leading points that had no anchor yet.
    if let Some(first) = out.iter().position(Option::is_some) {
        for i in (0..first).rev() {
            let anchor = out[i + 1].map(|p| p.k).unwrap_or(raw[i].root);
            out[i] = Some(KPoint {
                k: nearest(raw[i].root, anchor),
                decision: KDecision::Continuity,
            });
        }
    }
    Ok(out.into_iter().flatten().collect())
}

/// `k` read off a defined thru: `A⁻¹·M_thru·B⁻¹ = k·I`.
pub fn k_from_thru(a: &ComplexMatrix2, b: &ComplexMatrix2, m_thru: &ComplexMatrix2) -> Result<Complex> {
    let x = one_port_corrected(a, b, m_thru)?;
    Ok(x.trace() * 0.5)
}
