//! Forward model: standards seen through the error boxes.

use super::config::KitConfig;
use super::line::{cascade_sections, TransmissionLineModel};
use super::load::LumpedLoadModel;
use super::perturb::{stream, Draw, PerturbationSpec, Source};
use crate::error::{Error, Result};
use crate::rf::matrix::{c, Complex};
use crate::rf::network::FrequencyNetwork;
use crate::rf::sparams::{star, t_to_s, SParams2};
use crate::srm::measurement::{CalMode, DefinedMeasurement, DisambiguationEstimate, ReflectDefinition, Side, SrmMeasurementSet};
use crate::srm::model::{ErrorModel, ErrorTerms};

/// Raw two-port measurement of `device` behind the error boxes.
pub fn embed(terms: &ErrorTerms, device: &SParams2) -> Result<SParams2> {
    let (left, right) = box_sparams(terms)?;
    Ok(star(&star(&left, device), &right))
}

/// Raw one-port readings `(Γa, Γb)` of reflections `rho_a` at port A and
/// `rho_b` at port B.
pub fn embed_one_port(terms: &ErrorTerms, rho_a: Complex, rho_b: Complex) -> Result<(Complex, Complex)> {
    let (left, right) = box_sparams(terms)?;
    Ok((left.input_reflection(rho_a), right.output_reflection(rho_b)))
}

fn box_sparams(terms: &ErrorTerms) -> Result<(SParams2, SParams2)> {
    Ok((t_to_s(&terms.a.scale(terms.k))?, t_to_s(&terms.b)?))
}

/// Symmetric-load pair bridged by a coupling capacitor `cx` between the two
/// reference planes.
pub fn crosstalk_pair(rho_a: Complex, rho_b: Complex, cx: f64, f: f64, z_ref: f64) -> SParams2 {
    if cx == 0.0 {
        return SParams2::reflect_pair(rho_a, rho_b);
    }
    let yc = c(0.0, 2.0 * std::f64::consts::PI * f * cx * z_ref);
    let ga = 1.0 + rho_a;
    let gb = 1.0 + rho_b;
    let den = 2.0 + yc * (ga + gb);
    let s11 = (2.0 * rho_a + yc * (rho_a * gb - ga)) / den;
    let s22 = (2.0 * rho_b + yc * (rho_b * ga - gb)) / den;
    let s21 = yc * ga * gb / den;
    SParams2::new(s11, s21, s21, s22)
}

/// What the generator actually realized, for checking a calibration against.
#[derive(Debug, Clone)]
pub struct SyntheticTruth {
    pub error_model: ErrorModel,
    /// Per load: actual reflections at the left and right port.
    pub load_gammas: Vec<[Vec<Complex>; 2]>,
    /// Actual match reflections at the left and right port.
    pub match_gammas: [Vec<Complex>; 2],
    /// Actual S-parameters of the network (or thru) standard.
    pub network: Vec<SParams2>,
}

#[derive(Debug, Clone)]
pub struct SyntheticSet {
    pub set: SrmMeasurementSet,
    pub dut_raw: FrequencyNetwork,
    pub dut_ref: FrequencyNetwork,
    pub truth: SyntheticTruth,
}

impl SyntheticSet {
    /// SOLR-style defined standards: every load measured at both ports and
    /// defined by its actual reflection.
    pub fn defined_loads(&self) -> Vec<DefinedMeasurement> {
        let freqs = self.set.frequencies().to_vec();
        let z = self.set.network.reference_impedance();
        self.set
            .loads
            .iter()
            .zip(&self.truth.load_gammas)
            .map(|(meas, [l, r])| {
                let left = FrequencyNetwork::one_port(format!("{}_left", meas.name), freqs.clone(), meas.gamma_left())
                    .expect("grid already validated")
                    .with_reference_impedance(z);
                let right = FrequencyNetwork::one_port(format!("{}_right", meas.name), freqs.clone(), meas.gamma_right())
                    .expect("grid already validated")
                    .with_reference_impedance(z);
                DefinedMeasurement {
                    name: meas.name.clone(),
                    measured_left: left,
                    measured_right: right,
                    definition_left: ReflectDefinition::Gamma(l.clone()),
                    definition_right: ReflectDefinition::Gamma(r.clone()),
                }
            })
            .collect()
    }
}

// Noise stream items, one per raw file.
const NOISE_NETWORK: u64 = 1 << 20;
const NOISE_NETWORK_LOAD: u64 = 2 << 20;
const NOISE_MATCH: u64 = 3 << 20;
const NOISE_DUT: u64 = 4 << 20;

struct Realizer<'a> {
    pert: &'a PerturbationSpec,
    run: u64,
}

impl Realizer<'_> {
    fn draw(&self, source: Source, item: u64) -> Option<Draw> {
        self.pert
            .enabled(source)
            .then(|| stream(self.pert.seed, self.run, source, item))
    }

    fn element_variation(&self, source: Source, item: u64, load: &LumpedLoadModel) -> LumpedLoadModel {
        match self.draw(source, item) {
            Some(mut d) => {
                let s = self.pert.element_variation;
                load.scaled(s * d.normal(), s * d.normal())
            }
            None => *load,
        }
    }

    /// Load and offset line variation of one realization of a nominal load.
    fn load_instance(
        &self,
        item: u64,
        load: &LumpedLoadModel,
        offset: &TransmissionLineModel,
    ) -> (LumpedLoadModel, TransmissionLineModel) {
        match self.draw(Source::Asymmetry, item) {
            Some(mut d) => {
                let s = self.pert.element_variation;
                let l = load.scaled(s * d.normal(), s * d.normal());
                let line = self.line_params(&mut d, offset);
                (l, line)
            }
            None => (*load, *offset),
        }
    }

    fn line_params(&self, d: &mut Draw, line: &TransmissionLineModel) -> TransmissionLineModel {
        let s = self.pert.line_param_variation;
        let mut out = *line;
        let zs = 1.0 + s * d.normal();
        out.params.zc = [line.params.zc[0] * zs, line.params.zc[1] * zs];
        out.params.gamma_scale = line.params.gamma_scale * (1.0 + s * d.normal());
        out
    }

    fn network_instance(&self, item: u64, line: &TransmissionLineModel) -> TransmissionLineModel {
        match self.draw(Source::Network, item) {
            Some(mut d) => {
                let mut out = self.line_params(&mut d, line);
                out.length_m = (line.length_m + self.pert.length_sigma * d.normal()).max(0.0);
                out
            }
            None => *line,
        }
    }

    fn crosstalk(&self, item: u64) -> f64 {
        self.draw(Source::Crosstalk, item)
            .map_or(0.0, |mut d| self.pert.crosstalk_c_sigma * d.normal())
    }

    fn noise(&self, item: u64) -> Option<(Draw, f64)> {
        self.draw(Source::Noise, item).map(|d| (d, self.pert.noise_sigma))
    }
}

fn add_noise_2p(data: &mut [SParams2], noise: Option<(Draw, f64)>) {
    if let Some((mut d, sigma)) = noise {
        for s in data {
            s.s11 += d.complex_normal(sigma);
            s.s21 += d.complex_normal(sigma);
            s.s12 += d.complex_normal(sigma);
            s.s22 += d.complex_normal(sigma);
        }
    }
}

fn add_noise_1p(data: &mut [Complex], noise: Option<(Draw, f64)>) {
    if let Some((mut d, sigma)) = noise {
        for g in data {
            *g += d.complex_normal(sigma);
        }
    }
}

/// Generates a complete measurement set for run 0 of `pert.seed`.
pub fn make_srm_set(kit: &KitConfig, boxes: &ErrorModel, pert: &PerturbationSpec, mode: CalMode) -> Result<SyntheticSet> {
    make_srm_set_run(kit, boxes, pert, mode, 0)
}

/// Generates the measurement set of Monte Carlo run `run`. Every random
/// quantity comes from its own stream keyed by `(seed, run, source, item)`.
pub fn make_srm_set_run(
    kit: &KitConfig,
    boxes: &ErrorModel,
    pert: &PerturbationSpec,
    mode: CalMode,
    run: u64,
) -> Result<SyntheticSet> {
    kit.validate()?;
    pert.validate()?;
    let freqs = boxes.frequencies.clone();
    let n = freqs.len();
    let z0 = kit.reference_impedance;
    let zc = c(z0, 0.0);
    let rz = Realizer { pert, run };
    let offset = kit.offset_line();
    let nloads = kit.loads.len() as u64;
    let two_port = |name: String, data: Vec<SParams2>| {
        FrequencyNetwork::two_port(name, freqs.clone(), data).map(|x| x.with_reference_impedance(zc))
    };
    let one_port = |name: String, data: Vec<Complex>| {
        FrequencyNetwork::one_port(name, freqs.clone(), data).map(|x| x.with_reference_impedance(zc))
    };
    let sweep = |load: &LumpedLoadModel, line: &TransmissionLineModel| -> Vec<Complex> {
        freqs.iter().map(|&f| load.gamma_with_offset(Some(line), f, z0)).collect()
    };
    let embed_at = |i: usize, dev: &SParams2| embed(&boxes.terms[i], dev).map_err(|e| e.at(i));

    // Symmetric loads, realized independently at each port.
    let mut loads = Vec::with_capacity(kit.loads.len());
    let mut load_gammas = Vec::with_capacity(kit.loads.len());
    for (j, nl) in kit.loads.iter().enumerate() {
        let j64 = j as u64;
        let (la, oa) = rz.load_instance(2 * j64, &nl.model(), &offset);
        let (lb, ob) = rz.load_instance(2 * j64 + 1, &nl.model(), &offset);
        let ga = sweep(&la, &oa);
        let gb = sweep(&lb, &ob);
        let cx = rz.crosstalk(j64);
        let mut raw = (0..n)
            .map(|i| embed_at(i, &crosstalk_pair(ga[i], gb[i], cx, freqs[i], z0)))
            .collect::<Result<Vec<_>>>()?;
        add_noise_2p(&mut raw, rz.noise(j64));
        loads.push(two_port(format!("load_{j}"), raw)?);
        load_gammas.push([ga, gb]);
    }

    // Network (or thru) standard.
    let nominal_net = kit.network_line();
    let (network_true, transmission): (Vec<SParams2>, Vec<Complex>) = if mode == CalMode::Thru {
        (vec![SParams2::THRU; n], vec![c(1.0, 0.0); n])
    } else {
        let actual = rz.network_instance(0, &nominal_net);
        (
            freqs.iter().map(|&f| actual.sparams(f, z0)).collect(),
            freqs.iter().map(|&f| nominal_net.sparams(f, z0).s21).collect(),
        )
    };
    let mut network_raw = (0..n).map(|i| embed_at(i, &network_true[i])).collect::<Result<Vec<_>>>()?;
    add_noise_2p(&mut network_raw, rz.noise(NOISE_NETWORK));
    let network = two_port("network".into(), network_raw)?;

    // Network-load standards: separate physical copies of network and load.
    let side = kit.network_load_side;
    let mut network_loads = Vec::new();
    if mode != CalMode::Thru {
        let mut nominal = nominal_net;
        if mode == CalMode::Half {
            nominal.length_m /= 2.0;
        }
        for (j, nl) in kit.loads.iter().enumerate() {
            let j64 = j as u64;
            let line = rz.network_instance(1 + j64, &nominal);
            let (load, off) = rz.load_instance(2 * nloads + j64, &nl.model(), &offset);
            let rho = sweep(&load, &off);
            let mut raw = (0..n)
                .map(|i| {
                    let s = line.sparams(freqs[i], z0);
                    let (ga, gb) = match side {
                        // left port looks into the network, load behind it
                        Side::Left => (s.input_reflection(rho[i]), c(0.0, 0.0)),
                        Side::Right => (c(0.0, 0.0), s.output_reflection(rho[i])),
                    };
                    embed_one_port(&boxes.terms[i], ga, gb)
                        .map(|(a, b)| if side == Side::Left { a } else { b })
                        .map_err(|e| e.at(i))
                })
                .collect::<Result<Vec<_>>>()?;
            add_noise_1p(&mut raw, rz.noise(NOISE_NETWORK_LOAD + j64));
            network_loads.push(one_port(format!("network_load_{j}"), raw)?);
        }
    }

    // Match: the actual element values may differ from the definition.
    let nominal_match = sweep(&kit.matched, &offset);
    let mut match_gammas: [Vec<Complex>; 2] = [Vec::new(), Vec::new()];
    let mut match_raw: [Vec<Complex>; 2] = [Vec::new(), Vec::new()];
    for p in 0..2 {
        let actual = rz.element_variation(Source::Match, p as u64, &kit.matched);
        let g = sweep(&actual, &offset);
        let mut raw = (0..n)
            .map(|i| {
                let (a, b) = embed_one_port(&boxes.terms[i], g[i], g[i]).map_err(|e| e.at(i))?;
                Ok(if p == 0 { a } else { b })
            })
            .collect::<Result<Vec<_>>>()?;
        add_noise_1p(&mut raw, rz.noise(NOISE_MATCH + p as u64));
        match_gammas[p] = g;
        match_raw[p] = raw;
    }
    let [match_left, match_right] = match_raw;
    let matched = DefinedMeasurement {
        name: "match".into(),
        measured_left: one_port("match_left".into(), match_left)?,
        measured_right: one_port("match_right".into(), match_right)?,
        definition_left: ReflectDefinition::Gamma(nominal_match.clone()),
        definition_right: ReflectDefinition::Gamma(nominal_match),
    };

    let estimate = DisambiguationEstimate {
        load_index: kit.estimate_load,
        reflect: sweep(&kit.loads[kit.estimate_load].model(), &offset),
        transmission,
    };

    // Verification device.
    let sections = kit.dut_sections();
    let dut_true: Vec<SParams2> = freqs.iter().map(|&f| cascade_sections(&sections, f, z0)).collect();
    let mut dut_raw = (0..n).map(|i| embed_at(i, &dut_true[i])).collect::<Result<Vec<_>>>()?;
    add_noise_2p(&mut dut_raw, rz.noise(NOISE_DUT));

    if network_true.iter().any(|s| s.s21.norm() == 0.0) {
        return Err(Error::NonTransmissive { magnitude: 0.0 });
    }

    Ok(SyntheticSet {
        set: SrmMeasurementSet {
            loads,
            network,
            network_loads,
            network_load_side: side,
            matched,
            extra_defined: Vec::new(),
            estimate,
        },
        dut_raw: two_port("dut_raw".into(), dut_raw)?,
        dut_ref: two_port("dut_ref".into(), dut_true)?,
        truth: SyntheticTruth {
            error_model: boxes.clone(),
            load_gammas,
            match_gammas,
            network: network_true,
        },
    })
}
