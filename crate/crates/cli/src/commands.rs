use std::fmt::Write as _;
use std::path::Path;

use srm_core::mc::{error_metric, run_mc, Bounds, McConfig};
use srm_core::rf::touchstone::format_touchstone;
use srm_core::rf::{read_touchstone, FrequencyNetwork, SPARAM_NAMES};
use srm_core::srm::{apply_correction, calibrate as solve, CalMode, CalibrateOptions, ErrorModel, KDecision};
use srm_core::synth::line::SPEED_OF_LIGHT;
use srm_core::synth::{make_srm_set_run, KitConfig, Source};
use srm_core::Execution;

use crate::inputs::load_measurements;
use crate::manifest::{FileEntry, Hints, ReflectEstimate, RunManifest, TransmissionEstimate};
use crate::{write_file, AmbiguityArg, ApplyArgs, CalibrateArgs, CliError, CompareArgs, McArgs, SimulateArgs, SourceArg};

fn load_kit(path: Option<&Path>) -> Result<KitConfig, CliError> {
    match path {
        Some(p) => {
            if !p.is_file() {
                return Err(CliError::data(format!("{}: no such file", p.display())));
            }
            KitConfig::load(p).map_err(|e| CliError::from(e).with_context(p))
        }
        None => Ok(KitConfig::builtin()),
    }
}

impl CliError {
    fn with_context(mut self, path: &Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

fn sources_from(args: &[SourceArg]) -> Vec<Source> {
    let mut out: Vec<Source> = args
        .iter()
        .flat_map(|s| match s {
            SourceArg::Noise => vec![Source::Noise],
            SourceArg::Asymmetry => vec![Source::Asymmetry],
            SourceArg::Network => vec![Source::Network],
            SourceArg::Match => vec![Source::Match],
            SourceArg::Crosstalk => vec![Source::Crosstalk],
            SourceArg::All => Source::ALL.to_vec(),
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

fn write_net(dir: &Path, name: &str, net: &FrequencyNetwork) -> Result<(), CliError> {
    write_file(&dir.join(name), &format_touchstone(net))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut kit = load_kit(args.config.as_deref())?;
    if let Some(m) = args.mode {
        kit.mode = m.into();
    }
    if let Some(s) = args.seed {
        kit.perturbation.seed = s;
    }
    if let Some(s) = &args.sources {
        kit.perturbation.sources = sources_from(s);
    }
    let mode = kit.mode;
    let boxes = kit.error_model()?;
    let syn = make_srm_set_run(&kit, &boxes, &kit.perturbation, mode, args.run)?;
    let out = &args.out;
    let mut m = RunManifest::new("simulate");
    m.config = args.config.clone();
    m.seed = Some(kit.perturbation.seed);
    if let Some(c) = &args.config {
        m.inputs.push(FileEntry::new("kit_config", None, c));
    }

    let mut emit = |role: &str, index: Option<usize>, name: String, net: &FrequencyNetwork| -> Result<(), CliError> {
        write_net(out, &name, net)?;
        m.outputs.push(FileEntry::new(role, index, name));
        Ok(())
    };
    for (i, l) in syn.set.loads.iter().enumerate() {
        emit("load", Some(i), format!("load_{i}.s2p"), l)?;
    }
    emit("network", None, "network.s2p".into(), &syn.set.network)?;
    for (i, l) in syn.set.network_loads.iter().enumerate() {
        emit("network_load", Some(i), format!("network_load_{i}.s1p"), l)?;
    }
    emit("match_left", None, "match_left.s1p".into(), &syn.set.matched.measured_left)?;
    emit("match_right", None, "match_right.s1p".into(), &syn.set.matched.measured_right)?;
    let freqs = syn.set.frequencies().to_vec();
    let z = syn.set.network.reference_impedance();
    for (role, def) in [
        ("match_def_left", &syn.set.matched.definition_left),
        ("match_def_right", &syn.set.matched.definition_right),
    ] {
        let net = FrequencyNetwork::one_port(role, freqs.clone(), def.gammas())?.with_reference_impedance(z);
        emit(role, None, format!("{role}.s1p"), &net)?;
    }
    emit("dut_raw", None, "dut_raw.s2p".into(), &syn.dut_raw)?;
    emit("dut_ref", None, "dut_ref.s2p".into(), &syn.dut_ref)?;
    write_file(&out.join("truth_error_model.json"), &boxes.to_json()?)?;
    m.outputs.push(FileEntry::new("truth_error_model", None, "truth_error_model.json"));

    let vp = SPEED_OF_LIGHT / kit.line.eps_eff.sqrt();
    let g0 = kit.loads[kit.estimate_load].model().gamma(0.0, kit.reference_impedance);
    m.hints = Some(Hints {
        mode,
        network_load_side: kit.network_load_side,
        estimate_load: kit.estimate_load,
        reflect_estimate: ReflectEstimate {
            gamma0: [g0.re, g0.im],
            delay_s: 2.0 * kit.offset_length_m / vp,
        },
        transmission_estimate: TransmissionEstimate {
            magnitude: 1.0,
            delay_s: if mode == CalMode::Thru { 0.0 } else { kit.network_length_m / vp },
        },
    });
    m.save(out)
}

fn decision_name(d: KDecision) -> &'static str {
    match d {
        KDecision::Direct => "direct",
        KDecision::Estimate => "estimate",
        KDecision::EstimateFlipRisk => "estimate_flip_risk",
        KDecision::Continuity => "continuity",
    }
}

pub fn calibrate(args: &CalibrateArgs) -> Result<(), CliError> {
    let inputs = load_measurements(args)?;
    let opts = CalibrateOptions {
        ambiguity_is_error: args.ambiguity == AmbiguityArg::Error,
        network_reciprocal: !args.non_reciprocal,
        execution: Execution::Parallel,
        ..CalibrateOptions::default()
    };
    let cal = solve(&inputs.set, inputs.mode, &opts)?;
    for w in &cal.warnings {
        eprintln!("warning: {w}");
    }
    write_file(&args.out, &cal.model.to_json()?)?;
    if let Some(p) = &args.diagnostics {
        let mut s = String::from(
            "frequency_hz,h_quality,f_quality,eigen_breakdown,cost_0,cost_1,chosen,margin,ambiguous,k_decision\n",
        );
        for (f, d) in cal.model.frequencies.iter().zip(&cal.diagnostics) {
            writeln!(
                s,
                "{f:.15e},{:.15e},{},{:.15e},{:.15e},{:.15e},{},{:.15e},{},{}",
                d.h_quality,
                d.f_quality.map(|q| format!("{q:.15e}")).unwrap_or_default(),
                d.eigen_breakdown,
                d.hypothesis_costs[0],
                d.hypothesis_costs[1],
                d.chosen_hypothesis,
                d.hypothesis_margin,
                d.ambiguous,
                decision_name(d.k_decision)
            )
            .expect("writing to a String");
        }
        write_file(p, &s)?;
    }
    Ok(())
}

fn read_net(p: &Path) -> Result<FrequencyNetwork, CliError> {
    read_touchstone(p).map_err(|e| CliError::from(e).with_context(p))
}

pub fn apply(args: &ApplyArgs) -> Result<(), CliError> {
    let model = ErrorModel::load(&args.model).map_err(|e| CliError::from(e).with_context(&args.model))?;
    let raw = read_net(&args.input)?;
    let corrected = apply_correction(&model, &raw)?;
    write_file(&args.out, &format_touchstone(&corrected))
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let cal = read_net(&args.cal)?;
    let reference = read_net(&args.reference)?;
    let metric = error_metric(&cal, &reference)?;
    let mut s = String::from("frequency_hz");
    for n in SPARAM_NAMES {
        write!(s, ",{n}_error_db").expect("writing to a String");
    }
    s.push('\n');
    for (f, row) in cal.frequencies().iter().zip(metric) {
        write!(s, "{f:.15e}").expect("writing to a String");
        for v in row {
            write!(s, ",{v:.15e}").expect("writing to a String");
        }
        s.push('\n');
    }
    write_file(&args.out, &s)
}

pub fn mc(args: &McArgs) -> Result<(), CliError> {
    let kit = load_kit(args.config.as_deref())?;
    let mode = args.mode.map(Into::into).unwrap_or(kit.mode);
    let mut cfg = McConfig::new(kit, mode, args.runs)?;
    if let Some(s) = args.seed {
        cfg.perturbation.seed = s;
    }
    if args.percentile {
        cfg.bounds = Bounds::Percentile;
    }
    cfg.budget = !args.no_budget;
    if !(0.0..=1.0).contains(&args.failure_limit) {
        return Err(CliError::config("--failure-limit must lie in [0, 1]"));
    }
    cfg.failure_limit = args.failure_limit;
    let sources = sources_from(&args.sources);
    let report = run_mc(&cfg, &sources)?;

    let out = &args.out;
    let mut m = RunManifest::new("mc");
    m.config = args.config.clone();
    m.seed = Some(cfg.perturbation.seed);
    if let Some(c) = &args.config {
        m.inputs.push(FileEntry::new("kit_config", None, c));
    }
    write_file(&out.join("mc_stats.csv"), &report.to_csv()?)?;
    m.outputs.push(FileEntry::new("mc_stats", None, "mc_stats.csv"));
    if cfg.budget {
        write_file(&out.join("mc_budget.csv"), &report.budget_csv()?)?;
        m.outputs.push(FileEntry::new("mc_budget", None, "mc_budget.csv"));
    }
    write_file(&out.join("mc_summary.json"), &report.summary_json()?)?;
    m.outputs.push(FileEntry::new("mc_summary", None, "mc_summary.json"));
    m.save(out)
}
