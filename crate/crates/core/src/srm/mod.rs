//! Symmetric-reciprocal-match calibration.
//!
//! Every frequency point is solved on its own (in parallel when enabled);
//! only the sign of `k` uses neighboring points, in a sequential pass.

pub mod measurement;
pub mod model;
pub mod steps;

use crate::error::{Error, Result};
use crate::mobius::CrossMapOptions;
use crate::par::{map_indexed, Execution};
use crate::rf::matrix::{Complex, ComplexMatrix2};
use crate::rf::sparams::s_to_t;

pub use measurement::{CalMode, DefinedMeasurement, DisambiguationEstimate, ReflectDefinition, Side, SrmMeasurementSet};
pub use model::{apply_correction, apply_correction_one_port, ErrorModel, ErrorTerms};
pub use steps::{
    disambiguate, eigen_split, solve_f, solve_h, solve_k, solve_port_errors, virtual_thru_full, virtual_thru_half,
    Candidate, EigenPair, EigenSplit, KDecision, KOptions, Port,
};

#[derive(Debug, Clone, Copy)]
pub struct CalibrateOptions {
    pub cross_map: CrossMapOptions,
    /// Relative cost gap under which eigenvector ordering is ambiguous.
    pub ambiguity_margin: f64,
    /// Fail on ambiguous ordering instead of taking the cheaper hypothesis
    /// and recording a warning.
    pub ambiguity_is_error: bool,
    pub k: KOptions,
    /// Whether the network standard is known to be reciprocal. When false
    /// the one-port terms are still solved, but `k` is marked unreliable.
    pub network_reciprocal: bool,
    pub execution: Execution,
}

impl Default for CalibrateOptions {
    fn default() -> Self {
        Self {
            cross_map: CrossMapOptions::default(),
            ambiguity_margin: steps::DEFAULT_AMBIGUITY_MARGIN,
            ambiguity_is_error: false,
            k: KOptions::default(),
            network_reciprocal: true,
            execution: Execution::default(),
        }
    }
}

/// Per-frequency solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDiagnostics {
    /// `s4/s3` of the load system for `H`.
    pub h_quality: f64,
    /// `s4/s3` of the network-load system for `F` (network modes only).
    pub f_quality: Option<f64>,
    /// `|λ1 + λ2| / |λ1 − λ2|` of the eigen split.
    pub eigen_breakdown: f64,
    pub hypothesis_costs: [f64; 2],
    pub chosen_hypothesis: usize,
    /// `(rejected − chosen) / rejected` cost.
    pub hypothesis_margin: f64,
    pub ambiguous: bool,
    pub k_decision: KDecision,
}

#[derive(Debug, Clone)]
pub struct Calibration {
    pub model: ErrorModel,
    pub diagnostics: Vec<PointDiagnostics>,
    pub warnings: Vec<String>,
}

struct PointSolution {
    a: ComplexMatrix2,
    b: ComplexMatrix2,
    m_net: ComplexMatrix2,
    diag: PointDiagnostics,
}

struct SweepData {
    gamma_a: Vec<Vec<Complex>>,
    gamma_b: Vec<Vec<Complex>>,
    net_loads: Vec<Vec<Complex>>,
    network: Vec<crate::rf::SParams2>,
    defined_a: Vec<(Vec<Complex>, Vec<Complex>)>,
    defined_b: Vec<(Vec<Complex>, Vec<Complex>)>,
}

impl SweepData {
    fn new(set: &SrmMeasurementSet, mode: CalMode) -> Result<Self> {
        let defined = std::iter::once(&set.matched).chain(set.extra_defined.iter());
        let mut defined_a = Vec::new();
        let mut defined_b = Vec::new();
        for d in defined {
            defined_a.push((d.measured_left.gamma_left(), d.definition_left.gammas()));
            defined_b.push((d.measured_right.gamma_right(), d.definition_right.gammas()));
        }
        Ok(Self {
            gamma_a: set.loads.iter().map(|l| l.gamma_left()).collect(),
            gamma_b: set.loads.iter().map(|l| l.gamma_right()).collect(),
            net_loads: if mode == CalMode::Thru {
                Vec::new()
            } else {
                set.network_loads.iter().map(|l| l.gamma_left()).collect()
            },
            network: set.network.two_port_data()?.to_vec(),
            defined_a,
            defined_b,
        })
    }

    fn column(rows: &[Vec<Complex>], i: usize) -> Vec<Complex> {
        rows.iter().map(|r| r[i]).collect()
    }
}

fn solve_point(
    i: usize,
    data: &SweepData,
    set: &SrmMeasurementSet,
    mode: CalMode,
    opts: &CalibrateOptions,
) -> Result<PointSolution> {
    let ga = SweepData::column(&data.gamma_a, i);
    let gb = SweepData::column(&data.gamma_b, i);
    let h = solve_h(&ga, &gb, &opts.cross_map)?;
    let m_net = s_to_t(&data.network[i])?;
    let side = set.network_load_side;
    let (m_thru, f_quality) = match mode {
        CalMode::Thru => (m_net, None),
        CalMode::Full | CalMode::Half => {
            let nl = SweepData::column(&data.net_loads, i);
            let f = solve_f(&ga, &gb, &nl, side, &opts.cross_map)?;
            let vt = if mode == CalMode::Full {
                virtual_thru_full(&h.map, &f.map, &m_net, side)?
            } else {
                virtual_thru_half(&h.map, &f.map, &m_net, side)?
            };
            (vt, Some(f.quality))
        }
    };
    let split = eigen_split(&m_thru, &h.map)?;

    let defs_a: Vec<(Complex, Complex)> = data.defined_a.iter().map(|(m, d)| (m[i], d[i])).collect();
    let defs_b: Vec<(Complex, Complex)> = data.defined_b.iter().map(|(m, d)| (m[i], d[i])).collect();

    let solved: Vec<Result<Candidate>> = split
        .orderings()
        .iter()
        .map(|(ea, eb)| {
            Ok(Candidate {
                a: solve_port_errors(ea, &defs_a, Port::A)?,
                b: solve_port_errors(eb, &defs_b, Port::B)?,
            })
        })
        .collect();

    let est_idx = set.estimate.load_index;
    let estimate = set.estimate.reflect[i];
    let (chosen, costs, index, margin, ambiguous) = match (&solved[0], &solved[1]) {
        (Ok(c0), Ok(c1)) => {
            let cands = [*c0, *c1];
            match disambiguate(&cands, ga[est_idx], gb[est_idx], estimate, opts.ambiguity_margin) {
                Ok(choice) => (cands[choice.index], choice.costs, choice.index, choice.margin(), false),
                Err(Error::AmbiguousChoice {
                    cost_first,
                    cost_second,
                }) if !opts.ambiguity_is_error => {
                    let idx = if cost_second < cost_first { 1 } else { 0 };
                    let costs = [cost_first, cost_second];
                    let other = costs[1 - idx];
                    let margin = if other > 0.0 { (other - costs[idx]) / other } else { 0.0 };
                    (cands[idx], costs, idx, margin, true)
                }
                Err(e) => return Err(e),
            }
        }
        (Ok(c0), Err(_)) => (*c0, [0.0, f64::INFINITY], 0, 1.0, false),
        (Err(_), Ok(c1)) => (*c1, [f64::INFINITY, 0.0], 1, 1.0, false),
        (Err(e), Err(_)) => return Err(clone_error(e)),
    };

    Ok(PointSolution {
        a: chosen.a,
        b: chosen.b,
        m_net,
        diag: PointDiagnostics {
            h_quality: h.quality,
            f_quality,
            eigen_breakdown: split.breakdown(),
            hypothesis_costs: costs,
            chosen_hypothesis: index,
            hypothesis_margin: margin,
            ambiguous,
            k_decision: KDecision::Direct,
        },
    })
}

fn clone_error(e: &Error) -> Error {
    match e {
        Error::RankDeficient { reason } => Error::RankDeficient { reason: reason.clone() },
        Error::NormalizationFailure { ratio } => Error::NormalizationFailure { ratio: *ratio },
        Error::SingularMatrix { context, magnitude } => Error::SingularMatrix {
            context,
            magnitude: *magnitude,
        },
        other => Error::Precondition(other.to_string()),
    }
}

/// Runs the full calibration over the sweep.
pub fn calibrate(set: &SrmMeasurementSet, mode: CalMode, opts: &CalibrateOptions) -> Result<Calibration> {
    set.validate(mode)?;
    let data = SweepData::new(set, mode)?;
    let n = set.frequencies().len();

    let points = map_indexed(n, opts.execution, |i| {
        solve_point(i, &data, set, mode, opts).map_err(|e| e.at(i))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    let ks: Vec<(Complex, KDecision)> = match mode {
        CalMode::Thru => points
            .iter()
            .enumerate()
            .map(|(i, p)| steps::k_from_thru(&p.a, &p.b, &p.m_net).map(|k| (k, KDecision::Direct)).map_err(|e| e.at(i)))
            .collect::<Result<_>>()?,
        CalMode::Full | CalMode::Half => {
            let a: Vec<_> = points.iter().map(|p| p.a).collect();
            let b: Vec<_> = points.iter().map(|p| p.b).collect();
            let m: Vec<_> = points.iter().map(|p| p.m_net).collect();
            solve_k(&a, &b, &m, &set.estimate.transmission, &opts.k)?
                .into_iter()
                .map(|p| (p.k, p.decision))
                .collect()
        }
    };

    let freqs = set.frequencies();
    let mut terms = Vec::with_capacity(n);
    let mut diagnostics = Vec::with_capacity(n);
    for (i, (p, (k, decision))) in points.iter().zip(ks).enumerate() {
        if p.diag.ambiguous {
            warnings.push(format!(
                "index {i} ({:.6e} Hz): ambiguous eigenvector ordering (costs {:.3e} / {:.3e})",
                freqs[i], p.diag.hypothesis_costs[0], p.diag.hypothesis_costs[1]
            ));
        }
        if decision == KDecision::EstimateFlipRisk {
            warnings.push(format!(
                "index {i} ({:.6e} Hz): sign of k jumps by more than 90 degrees from the previous point",
                freqs[i]
            ));
        }
        terms.push(ErrorTerms { a: p.a, b: p.b, k });
        diagnostics.push(PointDiagnostics {
            k_decision: decision,
            ..p.diag
        });
    }
    if !opts.network_reciprocal && mode != CalMode::Thru {
        warnings.push("network not asserted reciprocal: k is unreliable".to_string());
    }

    let mut model = ErrorModel::new(freqs.to_vec(), terms)?;
    model.reference_impedance = set.network.reference_impedance();
    model.k_reliable = opts.network_reciprocal || mode == CalMode::Thru;
    Ok(Calibration {
        model,
        diagnostics,
        warnings,
    })
}
