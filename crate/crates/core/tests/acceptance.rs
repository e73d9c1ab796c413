//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::Instant;

use srm_core::mc::{run_mc, CampaignStats, McConfig};
use srm_core::rf::touchstone::{format_touchstone, parse_touchstone};
use srm_core::rf::{linear_grid, s_to_t, ComplexMatrix2, FrequencyNetwork, SParams2};
use srm_core::solr::{solr_calibrate, SolrOptions};
use srm_core::srm::steps::{disambiguate, Candidate};
use srm_core::srm::{
    apply_correction, calibrate, eigen_split, solve_f, solve_h, virtual_thru_full, virtual_thru_half, CalMode,
    CalibrateOptions, ErrorModel, Side, SrmMeasurementSet,
};
use srm_core::synth::random::random_error_model;
use srm_core::synth::{builtin_error_model, make_srm_set, KitConfig, PerturbationSpec, Source};
use srm_core::{Error, Result};

use common::*;

const MODES: [CalMode; 3] = [CalMode::Thru, CalMode::Full, CalMode::Half];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid() -> Vec<f64> {
    linear_grid(1e9, 150e9, 20)
}

fn kit_with_side(side: Side) -> KitConfig {
    let mut kit = KitConfig::builtin();
    kit.network_load_side = side;
    kit
}

/// Noiseless recovery of random error boxes in every mode.
fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut where_ = String::new();
    for seed in 0..100u64 {
        let side = if seed % 2 == 0 { Side::Left } else { Side::Right };
        let kit = kit_with_side(side);
        let boxes = random_error_model(seed, grid());
        for mode in MODES {
            let syn = make_srm_set(&kit, &boxes, &PerturbationSpec::none(), mode)?;
            let cal = calibrate(&syn.set, mode, &CalibrateOptions::default())?;
            let err = cal.model.max_relative_error(&boxes);
            if err > worst {
                worst = err;
                where_ = format!("seed {seed}, {mode}");
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(outcome(
        worst < 1e-8 && secs < 10.0,
        format!("max relative error {worst:.2e} ({where_}) over 100 seeds x 3 modes, {secs:.2} s"),
    ))
}

/// Virtual thru against k·A·B computed straight from the generating terms.
fn criterion_2() -> Result<Outcome> {
    let opts = Default::default();
    let p = ComplexMatrix2::PERMUTATION;
    let (mut worst_full, mut worst_half) = (0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let mut r = rng(1000 + seed);
        let t = terms(&mut r);
        let rho = loads(&mut r, 3);
        let side = if seed % 2 == 0 { Side::Left } else { Side::Right };
        let ga: Vec<_> = rho.iter().map(|&x| port_a(&t, x)).collect();
        let gb: Vec<_> = rho.iter().map(|&x| port_b(&t, x)).collect();
        let net_loads = |dev: &SParams2| -> Vec<_> {
            rho.iter()
                .map(|&x| match side {
                    Side::Left => port_a(&t, input_reflection(dev, x)),
                    Side::Right => port_b(&t, output_reflection(dev, x)),
                })
                .collect()
        };
        let kab = (t.a * t.b).scale(t.k);
        let h = solve_h(&ga, &gb, &opts)?;

        // full: any reciprocal network
        let n = reciprocal(&mut r);
        let f = solve_f(&ga, &gb, &net_loads(&n), side, &opts)?;
        let vt = virtual_thru_full(&h.map, &f.map, &raw_two_port(&t, &n), side)?;
        worst_full = worst_full.max(vt.normalized().max_abs_diff(&kab.normalized()));

        // half: N = R·P·R⁻¹·P, network-load measured through R
        let half = reciprocal(&mut r);
        let rt = s_to_t(&half)?;
        let nt = rt * p * rt.inverse()? * p;
        let m_net = (t.a * nt * t.b).scale(t.k);
        let half_dev = match side {
            Side::Left => half,
            // the right port sees the flipped half P·R⁻¹·P
            Side::Right => srm_core::rf::t_to_s(&(p * rt.inverse()? * p))?,
        };
        let f = solve_f(&ga, &gb, &net_loads(&half_dev), side, &opts)?;
        let vt = virtual_thru_half(&h.map, &f.map, &m_net, side)?;
        worst_half = worst_half.max(vt.max_abs_diff(&kab));
    }
    Ok(outcome(
        worst_full < 1e-10 && worst_half < 1e-9,
        format!("full (normalized) {worst_full:.2e}, half (unnormalized) {worst_half:.2e} over 100 instances"),
    ))
}

/// SRM and SOLR on the same noiseless data with exact SOL definitions.
fn criterion_3() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for seed in 0..20u64 {
        let boxes = if seed == 0 {
            builtin_error_model()?
        } else {
            random_error_model(500 + seed, grid())
        };
        let kit = kit_with_side(if seed % 2 == 0 { Side::Left } else { Side::Right });
        for mode in MODES {
            let syn = make_srm_set(&kit, &boxes, &PerturbationSpec::none(), mode)?;
            let srm = calibrate(&syn.set, mode, &CalibrateOptions::default())?.model;
            let solr = solr_calibrate(
                &syn.defined_loads(),
                &syn.set.network,
                &syn.set.estimate.transmission,
                &SolrOptions::default(),
            )?;
            worst = worst.max(srm.max_relative_error(&solr));
            cases += 1;
        }
    }
    Ok(outcome(
        worst < 1e-8,
        format!("max entrywise relative difference {worst:.2e} over {cases} calibrations"),
    ))
}

/// Eigenvalues are antisymmetric and eigenvectors match the closed forms
/// written in terms of the generating boxes.
fn criterion_4() -> Result<Outcome> {
    let opts = Default::default();
    let (mut worst_l, mut worst_w) = (0.0f64, 0.0f64);
    for seed in 0..100u64 {
        let mut r = rng(2000 + seed);
        let t = terms(&mut r);
        let rho = loads(&mut r, 3);
        let ga: Vec<_> = rho.iter().map(|&x| port_a(&t, x)).collect();
        let gb: Vec<_> = rho.iter().map(|&x| port_b(&t, x)).collect();
        let n = reciprocal(&mut r);
        let nl: Vec<_> = rho.iter().map(|&x| port_a(&t, input_reflection(&n, x))).collect();
        let h = solve_h(&ga, &gb, &opts)?;
        let f = solve_f(&ga, &gb, &nl, Side::Left, &opts)?;
        let vt = virtual_thru_full(&h.map, &f.map, &raw_two_port(&t, &n), Side::Left)?;
        let split = eigen_split(&vt, &h.map)?;
        let (l1, l2) = (split.port_a.lambda, split.lambda2);
        worst_l = worst_l.max((l1 + l2).norm() / l1.norm());

        let (a, b) = (t.a, t.b);
        let wa = [(a.e11 + a.e12) / (a.e21 + 1.0), (-a.e11 + a.e12) / (-a.e21 + 1.0)];
        let wb = [(b.e11 + b.e21) / (b.e12 + 1.0), (-b.e11 + b.e21) / (-b.e12 + 1.0)];
        let err = split
            .orderings()
            .iter()
            .map(|(pa, pb)| {
                [rel(pa.w11, wa[0]), rel(pa.w12, wa[1]), rel(pb.w11, wb[0]), rel(pb.w12, wb[1])]
                    .into_iter()
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        worst_w = worst_w.max(err);
    }
    Ok(outcome(
        worst_l < 1e-10 && worst_w < 1e-10,
        format!("|λ1+λ2|/|λ1| {worst_l:.2e}, eigenvector closed forms {worst_w:.2e} over 100 instances"),
    ))
}

/// Replaces the network standard (and network-load readings) with a
/// non-reciprocal version of the nominal line.
fn with_nonreciprocal_network(set: &mut SrmMeasurementSet, boxes: &ErrorModel, kit: &KitConfig, loads: &[[Vec<srm_core::rf::Complex>; 2]]) -> Result<()> {
    let freqs = set.frequencies().to_vec();
    let line = kit.network_line();
    let mut raw = Vec::new();
    let mut nl = vec![Vec::new(); loads.len()];
    for (i, &f) in freqs.iter().enumerate() {
        let t = &boxes.terms[i];
        let mut s = line.sparams(f, kit.reference_impedance);
        s.s12 *= 0.8;
        s.s21 *= 1.1;
        raw.push(srm_core::rf::t_to_s(&raw_two_port(t, &s))?);
        for (j, [left, _]) in loads.iter().enumerate() {
            nl[j].push(port_a(t, input_reflection(&s, left[i])));
        }
    }
    let z = set.network.reference_impedance();
    set.network = FrequencyNetwork::two_port("network", freqs.clone(), raw)?.with_reference_impedance(z);
    set.network_loads = nl
        .into_iter()
        .enumerate()
        .map(|(j, g)| FrequencyNetwork::one_port(format!("network_load_{j}"), freqs.clone(), g))
        .collect::<Result<_>>()?;
    Ok(())
}

fn criterion_5() -> Result<Outcome> {
    let kit = KitConfig::builtin();
    let mut worst = 0.0f64;
    let mut flagged = true;
    for seed in 0..20u64 {
        let boxes = random_error_model(700 + seed, grid());
        let mut syn = make_srm_set(&kit, &boxes, &PerturbationSpec::none(), CalMode::Full)?;
        // network loads are realized with the same loads as the load standards
        let truth = syn.truth.load_gammas.clone();
        with_nonreciprocal_network(&mut syn.set, &boxes, &kit, &truth)?;
        let opts = CalibrateOptions {
            network_reciprocal: false,
            ..Default::default()
        };
        let cal = calibrate(&syn.set, CalMode::Full, &opts)?;
        worst = worst.max(cal.model.max_relative_error_one_port(&boxes));
        flagged &= !cal.model.k_reliable && !cal.warnings.is_empty();
    }
    Ok(outcome(
        worst < 1e-8 && flagged,
        format!("A, B max relative error {worst:.2e} with S21/S12 = 1.375; k flagged unreliable: {flagged}"),
    ))
}

fn median_all(c: &CampaignStats) -> [f64; 4] {
    std::array::from_fn(|k| c.median_std(k))
}

fn criterion_6() -> Result<Vec<Outcome>> {
    let start = Instant::now();
    let runs = 200;
    let kit = KitConfig::builtin();
    let mut out = Vec::new();

    // (a) zero-source limit
    let cfg = McConfig::new(kit.clone(), CalMode::Full, runs)?;
    let zero = run_mc(&cfg, &[])?;
    let mut spread = 0.0f64;
    let mut bias = 0.0f64;
    for (p, r) in zero.combined.points.iter().zip(&zero.reference) {
        for (s, want) in p.iter().zip(r.entries()) {
            spread = spread.max(s.std_mag).max(s.std_complex);
            bias = bias.max((s.mean - want).norm());
        }
    }
    out.push(outcome(
        spread == 0.0 && bias < 1e-8,
        format!("(a) zero sources: spread {spread:.1e}, |mean - ref| {bias:.2e}"),
    ));

    // (b) noise-only mean convergence
    let noise = run_mc(&cfg, &[Source::Noise])?;
    let mut inside = 0;
    let mut total = 0;
    for (p, r) in noise.combined.points.iter().zip(&noise.reference) {
        for (s, want) in p.iter().zip(r.entries()) {
            total += 1;
            if (s.mean - want).norm() < 3.0 * s.std_complex / (runs as f64).sqrt() {
                inside += 1;
            }
        }
    }
    let frac = inside as f64 / total as f64;
    out.push(outcome(
        frac >= 0.95,
        format!("(b) noise only: {inside}/{total} points within 3 std/sqrt({runs}) ({:.1} %)", 100.0 * frac),
    ));

    // (c) all sources vs each single source, (d) half vs full
    let mut ok_c = true;
    let mut lines = Vec::new();
    let mut medians = Vec::new();
    for mode in [CalMode::Full, CalMode::Half] {
        let cfg = McConfig::new(kit.clone(), mode, runs)?;
        let rep = run_mc(&cfg, &Source::ALL)?;
        let all = median_all(&rep.combined);
        for single in &rep.budget {
            let m = median_all(single);
            if (0..4).any(|k| all[k] < m[k]) {
                ok_c = false;
                lines.push(format!("{mode}/{} exceeds combined", single.label()));
            }
        }
        medians.push(all);
        let failed: usize = std::iter::once(&rep.combined).chain(&rep.budget).map(|c| c.failures.len()).sum();
        lines.push(format!("{mode}: median |S21| std {:.2e}, {failed} failed runs", all[2]));
    }
    out.push(outcome(ok_c, format!("(c) all-sources spread >= every single source: {}", lines.join("; "))));
    let half_ge = (0..4).filter(|&k| medians[1][k] >= medians[0][k]).count();
    out.push(outcome(
        true,
        format!(
            "(d) reported: half-network spread >= full-network spread for {half_ge}/4 S-parameters (S11 {:.2e} vs {:.2e}); {:.1} s total",
            medians[1][0],
            medians[0][0],
            start.elapsed().as_secs_f64()
        ),
    ));
    Ok(out)
}

fn criterion_7() -> Result<Outcome> {
    // Touchstone round trip
    let mut r = rng(3000);
    let freqs = grid();
    let data: Vec<SParams2> = freqs.iter().map(|_| reciprocal(&mut r).map(|z| z * 1.3)).collect();
    let net = FrequencyNetwork::two_port("rt", freqs.clone(), data.clone())?;
    let back = parse_touchstone(&format_touchstone(&net), 2, "rt.s2p")?;
    let ts = back
        .two_port_data()?
        .iter()
        .zip(&data)
        .map(|(a, b)| a.max_abs_diff(b))
        .chain(back.frequencies().iter().zip(&freqs).map(|(a, b)| (a - b).abs() / b))
        .fold(0.0, f64::max);

    // embed -> correct
    let boxes = random_error_model(3001, freqs.clone());
    let raw: Vec<SParams2> = boxes
        .terms
        .iter()
        .zip(&data)
        .map(|(t, s)| srm_core::rf::t_to_s(&raw_two_port(t, s)))
        .collect::<Result<_>>()?;
    let corrected = apply_correction(&boxes, &FrequencyNetwork::two_port("raw", freqs.clone(), raw)?)?;
    let rt = corrected
        .two_port_data()?
        .iter()
        .zip(&data)
        .map(|(a, b)| a.max_abs_diff(b))
        .fold(0.0, f64::max);

    // load-order invariance
    let kit = KitConfig::builtin();
    let mut perm_err = 0.0f64;
    for mode in MODES {
        let boxes = random_error_model(3002, freqs.clone());
        let syn = make_srm_set(&kit, &boxes, &PerturbationSpec::none(), mode)?;
        let base = calibrate(&syn.set, mode, &CalibrateOptions::default())?.model;
        for perm in [[1, 2, 0], [2, 1, 0], [0, 2, 1]] {
            let m = calibrate(&syn.set.permuted_loads(&perm), mode, &CalibrateOptions::default())?.model;
            perm_err = perm_err.max(m.max_relative_error(&base));
        }
    }
    Ok(outcome(
        ts < 1e-12 && rt < 1e-10 && perm_err < 1e-12,
        format!("touchstone {ts:.2e}, embed/correct {rt:.2e}, load-order {perm_err:.2e}"),
    ))
}

fn root_is(r: Result<impl Sized>, pred: impl Fn(&Error) -> bool) -> bool {
    matches!(r, Err(e) if pred(e.root()))
}

fn criterion_8() -> Result<Outcome> {
    let kit = KitConfig::builtin();
    let boxes = builtin_error_model()?;
    let syn = make_srm_set(&kit, &boxes, &PerturbationSpec::none(), CalMode::Full)?;

    // two unique loads: the third duplicates the first
    let mut dup = syn.set.clone();
    dup.loads[2] = dup.loads[0].clone();
    dup.network_loads[2] = dup.network_loads[0].clone();
    let rank = root_is(calibrate(&dup, CalMode::Full, &Default::default()), |e| {
        matches!(e, Error::RankDeficient { .. })
    });

    // s21 = 0 network
    let mut blocked = syn.set.clone();
    let reflect: Vec<SParams2> = blocked.network.two_port_data()?.iter().map(|s| SParams2::reflect_pair(s.s11, s.s22)).collect();
    blocked.network = FrequencyNetwork::two_port("network", blocked.frequencies().to_vec(), reflect)?;
    let nontx = root_is(calibrate(&blocked, CalMode::Full, &Default::default()), |e| {
        matches!(e, Error::NonTransmissive { .. })
    }) && root_is(s_to_t(&SParams2::reflect_pair(0.5.into(), 0.5.into())), |e| {
        matches!(e, Error::NonTransmissive { .. })
    });

    // thru equal to the port swap with H = I gives M·P·H⁻¹ = I: one double eigenvalue
    let degenerate = root_is(
        eigen_split(&ComplexMatrix2::PERMUTATION, &srm_core::mobius::MobiusMatrix::IDENTITY),
        |e| matches!(e, Error::DegenerateEigen { .. }),
    );

    // hypotheses correcting ρ = 0.5 to +0.5 and -0.5 with the estimate at 0.5j
    let flip = ComplexMatrix2::new((-1.0).into(), 0.0.into(), 0.0.into(), 1.0.into());
    let cands = [
        Candidate {
            a: ComplexMatrix2::IDENTITY,
            b: ComplexMatrix2::IDENTITY,
        },
        Candidate { a: flip, b: flip },
    ];
    let g = srm_core::rf::c(0.5, 0.0);
    let ambiguous = root_is(disambiguate(&cands, g, g, srm_core::rf::c(0.0, 0.5), 0.1), |e| {
        matches!(e, Error::AmbiguousChoice { .. })
    });

    Ok(outcome(
        rank && nontx && degenerate && ambiguous,
        format!(
            "RankDeficient {rank}, NonTransmissive {nontx}, DegenerateEigen {degenerate}, AmbiguousChoice {ambiguous}"
        ),
    ))
}

fn report(n: &str, r: Result<Outcome>) -> bool {
    match r {
        Ok(o) => {
            println!("criterion {n}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            o.pass
        }
        Err(e) => {
            println!("criterion {n}: FAIL - error: {e}");
            false
        }
    }
}

fn main() {
    let mut ok = true;
    ok &= report("1", criterion_1());
    ok &= report("2", criterion_2());
    ok &= report("3", criterion_3());
    ok &= report("4", criterion_4());
    ok &= report("5", criterion_5());
    match criterion_6() {
        Ok(parts) => {
            for (tag, o) in ["6a", "6b", "6c"].iter().zip(&parts) {
                ok &= report(tag, Ok(Outcome { pass: o.pass, detail: o.detail.clone() }));
            }
            // not a gate: the observation is only reported
            if let Some(d) = parts.get(3) {
                println!("criterion 6d: REPORTED - {}", d.detail);
            }
        }
        Err(e) => ok &= report("6", Err(e)),
    }
    ok &= report("7", criterion_7());
    ok &= report("8", criterion_8());
    if !ok {
        std::process::exit(1);
    }
}
