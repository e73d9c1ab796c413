//! Independent test oracles: random instances and direct forward models.
#![allow(dead_code)]

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srm_core::rf::{s_to_t, Complex, ComplexMatrix2, SParams2};
use srm_core::srm::ErrorTerms;
use srm_core::synth::random::random_terms;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn polar(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Complex {
    Complex::from_polar(rng.random_range(lo..hi), rng.random_range(-PI..PI))
}

pub fn terms(rng: &mut ChaCha8Rng) -> ErrorTerms {
    random_terms(rng)
}

/// Random reciprocal two-port with moderate reflections.
pub fn reciprocal(rng: &mut ChaCha8Rng) -> SParams2 {
    SParams2::reciprocal(polar(rng, 0.0, 0.5), polar(rng, 0.4, 1.0), polar(rng, 0.0, 0.5))
}

/// `n` well separated random reflections.
pub fn loads(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex> {
    let mut out: Vec<Complex> = Vec::new();
    while out.len() < n {
        let g = polar(rng, 0.0, 1.0);
        if out.iter().all(|o| (o - g).norm() > 0.2) {
            out.push(g);
        }
    }
    out
}

/// Raw reading at port A of a one-port with actual reflection `rho`,
/// written out from the error-box definition `Γ = (a11ρ + a12)/(a21ρ + 1)`.
pub fn port_a(t: &ErrorTerms, rho: Complex) -> Complex {
    (t.a.e11 * rho + t.a.e12) / (t.a.e21 * rho + 1.0)
}

/// Raw reading at port B: `Γ = (b11ρ − b21)/(1 − b12ρ)`.
pub fn port_b(t: &ErrorTerms, rho: Complex) -> Complex {
    (t.b.e11 * rho - t.b.e21) / (1.0 - t.b.e12 * rho)
}

/// Input reflection of a two-port terminated by `load` at port 2.
pub fn input_reflection(s: &SParams2, load: Complex) -> Complex {
    s.s11 + s.s12 * s.s21 * load / (1.0 - s.s22 * load)
}

/// Input reflection at port 2 with `load` at port 1.
pub fn output_reflection(s: &SParams2, load: Complex) -> Complex {
    s.s22 + s.s12 * s.s21 * load / (1.0 - s.s11 * load)
}

/// Raw two-port `k·A·T·B` of a transmissive device, in S-parameters.
pub fn raw_two_port(t: &ErrorTerms, s: &SParams2) -> ComplexMatrix2 {
    (t.a * s_to_t(s).unwrap() * t.b).scale(t.k)
}

pub fn rel(a: Complex, b: Complex) -> f64 {
    (a - b).norm() / b.norm()
}
