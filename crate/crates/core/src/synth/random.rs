//! Random but well-conditioned error models, for property tests.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rf::matrix::{c, Complex};
use crate::srm::model::{ErrorModel, ErrorTerms};

fn polar(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> Complex {
    Complex::from_polar(rng.random_range(r_lo..r_hi), rng.random_range(-PI..PI))
}

/// Draws error terms from physically plausible one-port terms: directivity
/// and source match up to 0.3 in magnitude, reflection tracking 0.3 to 1,
/// and `|k|` between 0.5 and 2, all with uniform random phase.
pub fn random_terms(rng: &mut ChaCha8Rng) -> ErrorTerms {
    let e00 = polar(rng, 0.0, 0.3);
    let e11 = polar(rng, 0.0, 0.3);
    let e10e01 = polar(rng, 0.3, 1.0);
    let e33 = polar(rng, 0.0, 0.3);
    let e22 = polar(rng, 0.0, 0.3);
    let e23e32 = polar(rng, 0.3, 1.0);
    let k = polar(rng, 0.5, 2.0);
    ErrorTerms::from_entries(e10e01 - e00 * e11, e00, -e11, e23e32 - e33 * e22, e22, -e33, k)
}

/// An error model with independent random terms at every frequency.
pub fn random_error_model(seed: u64, frequencies: Vec<f64>) -> ErrorModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = frequencies.iter().map(|_| random_terms(&mut rng)).collect();
    let mut m = ErrorModel::new(frequencies, terms).expect("lengths match");
    m.reference_impedance = c(50.0, 0.0);
    m
}
