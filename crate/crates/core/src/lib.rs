//! Two-port vector network analyzer calibration with symmetric one-port
//! loads, a reciprocal network and a single defined match
//! (symmetric-reciprocal-match), together with a SOLR reference solver, a
//! synthetic measurement generator and a Monte Carlo uncertainty harness.
//!
//! Modules:
//! * [`rf`]: 2×2 complex algebra, S↔T conversion, sweeps and Touchstone I/O
//! * [`mobius`]: Möbius maps and their estimation from paired reflections
//! * [`srm`]: the calibration solver and error-model application
//! * [`solr`]: short-open-load-reciprocal baseline
//! * [`synth`]: standards, lines, error-box embedding and perturbations
//! * [`mc`]: Monte Carlo campaigns and the calibrated-DUT error metric

// `!(x > floor)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod mc;
pub mod mobius;
pub mod par;
pub mod rf;
pub mod solr;
pub mod srm;
pub mod synth;

pub use error::{Error, Result};
pub use par::Execution;
