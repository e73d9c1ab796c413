//! Monte Carlo uncertainty campaigns.
//!
//! A run draws perturbations for the enabled sources, generates a full
//! measurement set, calibrates, and corrects the verification DUT. Runs are
//! independent and may execute in parallel; their results are gathered in
//! run order before any statistic is formed, so a report is bit-identical
//! for a given configuration regardless of thread count.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::rf::matrix::Complex;
use crate::rf::network::{check_grid, FrequencyNetwork};
use crate::rf::sparams::{SParams2, SPARAM_NAMES};
use crate::srm::measurement::CalMode;
use crate::srm::model::{apply_correction, ErrorModel};
use crate::srm::{calibrate, CalibrateOptions};
use crate::synth::{make_srm_set_run, KitConfig, PerturbationSpec, Source};

/// Reported value for an exactly zero error.
pub const METRIC_FLOOR_DB: f64 = -300.0;

/// `20·log10|a − b|`, clamped below at [`METRIC_FLOOR_DB`].
pub fn error_db(a: Complex, b: Complex) -> f64 {
    let d = (a - b).norm();
    if d == 0.0 {
        METRIC_FLOOR_DB
    } else {
        (20.0 * d.log10()).max(METRIC_FLOOR_DB)
    }
}

/// Per-frequency error of a calibrated two-port against a reference, in dB,
/// ordered S11, S12, S21, S22.
pub fn error_metric(cal: &FrequencyNetwork, reference: &FrequencyNetwork) -> Result<Vec<[f64; 4]>> {
    check_grid(cal.frequencies(), reference)?;
    let a = cal.two_port_data()?;
    let b = reference.two_port_data()?;
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| {
            let (x, y) = (x.entries(), y.entries());
            std::array::from_fn(|k| error_db(x[k], y[k]))
        })
        .collect())
}

/// How the 95 % bounds are formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bounds {
    /// Mean magnitude ∓ 1.96 sample standard deviations of the magnitude.
    #[default]
    Gaussian,
    /// 2.5th and 97.5th percentiles of the magnitude.
    Percentile,
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub kit: KitConfig,
    pub boxes: ErrorModel,
    /// Magnitudes and seed; the active sources are passed to [`run_mc`].
    pub perturbation: PerturbationSpec,
    pub mode: CalMode,
    pub runs: usize,
    /// Largest tolerated fraction of failed runs.
    pub failure_limit: f64,
    pub bounds: Bounds,
    /// Also run one campaign per single source.
    pub budget: bool,
    pub calibrate: CalibrateOptions,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(kit: KitConfig, mode: CalMode, runs: usize) -> Result<Self> {
        let boxes = kit.error_model()?;
        let perturbation = kit.perturbation.clone();
        Ok(Self {
            kit,
            boxes,
            perturbation,
            mode,
            runs,
            failure_limit: 0.01,
            bounds: Bounds::Gaussian,
            budget: true,
            calibrate: CalibrateOptions {
                execution: Execution::Sequential,
                ..CalibrateOptions::default()
            },
            execution: Execution::Parallel,
        })
    }
}

/// Statistics of one S-parameter at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SParamStats {
    pub mean: Complex,
    pub mean_mag: f64,
    /// Sample standard deviation of `|S|`.
    pub std_mag: f64,
    /// `sqrt(Σ|S − mean|² / (n − 1))`.
    pub std_complex: f64,
    pub lo95: f64,
    pub hi95: f64,
}

fn stats(samples: &[Complex], bounds: Bounds) -> SParamStats {
    let n = samples.len() as f64;
    // Accumulate offsets from the first sample: identical samples then give
    // exactly zero spread, and cancellation is reduced in general.
    let z0 = samples[0];
    let mean = z0 + samples.iter().map(|z| z - z0).sum::<Complex>() / n;
    let mags: Vec<f64> = samples.iter().map(|z| z.norm()).collect();
    let m0 = mags[0];
    let mean_mag = m0 + mags.iter().map(|m| m - m0).sum::<f64>() / n;
    let std_mag = (mags.iter().map(|m| (m - mean_mag).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let std_complex = (samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / (n - 1.0)).sqrt();
    let (lo95, hi95) = match bounds {
        Bounds::Gaussian => (mean_mag - 1.96 * std_mag, mean_mag + 1.96 * std_mag),
        Bounds::Percentile => {
            let mut sorted = mags;
            sorted.sort_by(f64::total_cmp);
            (percentile(&sorted, 0.025), percentile(&sorted, 0.975))
        }
    };
    SParamStats {
        mean,
        mean_mag,
        std_mag,
        std_complex,
        lo95,
        hi95,
    }
}

/// Linear interpolation between closest ranks.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// One campaign: a fixed set of enabled sources.
#[derive(Debug, Clone, Serialize)]
pub struct CampaignStats {
    pub sources: Vec<Source>,
    pub runs_ok: usize,
    /// `(run index, message)` of every excluded run.
    pub failures: Vec<(usize, String)>,
    /// Per frequency, per S-parameter in S11, S12, S21, S22 order.
    pub points: Vec<[SParamStats; 4]>,
}

impl CampaignStats {
    pub fn label(&self) -> String {
        if self.sources.is_empty() {
            "none".into()
        } else {
            self.sources.iter().map(|s| s.name()).collect::<Vec<_>>().join("+")
        }
    }

    /// Median over frequency of the magnitude standard deviation of one
    /// S-parameter (index in S11, S12, S21, S22 order).
    pub fn median_std(&self, sparam: usize) -> f64 {
        let mut v: Vec<f64> = self.points.iter().map(|p| p[sparam].std_mag).collect();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n == 0 {
            return f64::NAN;
        }
        if !n.is_multiple_of(2) {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub frequencies: Vec<f64>,
    pub mode: CalMode,
    pub runs: usize,
    pub seed: u64,
    pub bounds: Bounds,
    /// The DUT's true S-parameters.
    pub reference: Vec<SParams2>,
    /// All requested sources together.
    pub combined: CampaignStats,
    /// One campaign per requested source.
    pub budget: Vec<CampaignStats>,
}

/// Runs one campaign with exactly `sources` enabled.
pub fn run_campaign(cfg: &McConfig, sources: &[Source]) -> Result<CampaignStats> {
    if cfg.runs < 2 {
        return Err(Error::Precondition(format!("{} runs requested, at least 2 required", cfg.runs)));
    }
    let pert = cfg.perturbation.clone().with_sources(sources);
    let outcomes = map_indexed(cfg.runs, cfg.execution, |run| -> Result<Vec<SParams2>> {
        let syn = make_srm_set_run(&cfg.kit, &cfg.boxes, &pert, cfg.mode, run as u64)?;
        let cal = calibrate(&syn.set, cfg.mode, &cfg.calibrate)?;
        let dut = apply_correction(&cal.model, &syn.dut_raw)?;
        Ok(dut.two_port_data()?.to_vec())
    });

    let mut good = Vec::with_capacity(cfg.runs);
    let mut failures = Vec::new();
    for (run, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(v) => good.push(v),
            Err(e) if e.is_numerical() => failures.push((run, e.to_string())),
            Err(e) => return Err(e),
        }
    }
    let limit = (cfg.failure_limit * cfg.runs as f64).floor() as usize;
    if failures.len() > limit || good.len() < 2 {
        return Err(Error::CalibrationFailureRate {
            failed: failures.len(),
            total: cfg.runs,
            limit: cfg.failure_limit,
            first: failures.first().map(|f| format!("run {}: {}", f.0, f.1)).unwrap_or_default(),
        });
    }

    let nf = cfg.boxes.len();
    let points = (0..nf)
        .map(|i| {
            std::array::from_fn(|k| {
                let samples: Vec<Complex> = good.iter().map(|run| run[i].entries()[k]).collect();
                stats(&samples, cfg.bounds)
            })
        })
        .collect();
    Ok(CampaignStats {
        sources: sources.to_vec(),
        runs_ok: good.len(),
        failures,
        points,
    })
}

/// Runs the combined campaign and, if enabled, the per-source budget.
pub fn run_mc(cfg: &McConfig, sources: &[Source]) -> Result<McReport> {
    let mut sources = sources.to_vec();
    sources.sort();
    sources.dedup();
    let combined = run_campaign(cfg, &sources)?;
    let budget = if !cfg.budget {
        Vec::new()
    } else if sources.len() == 1 {
        vec![combined.clone()]
    } else {
        sources
            .iter()
            .map(|s| run_campaign(cfg, std::slice::from_ref(s)))
            .collect::<Result<_>>()?
    };
    let nominal = make_srm_set_run(&cfg.kit, &cfg.boxes, &PerturbationSpec::none(), cfg.mode, 0)?;
    Ok(McReport {
        frequencies: cfg.boxes.frequencies.clone(),
        mode: cfg.mode,
        runs: cfg.runs,
        seed: cfg.perturbation.seed,
        bounds: cfg.bounds,
        reference: nominal.dut_ref.two_port_data()?.to_vec(),
        combined,
        budget,
    })
}

const CSV_HEADER: [&str; 8] = ["frequency_hz", "sparam", "mean_re", "mean_im", "std_mag", "lo95", "hi95", "source"];

fn write_campaign<W: std::io::Write>(w: &mut csv::Writer<W>, freqs: &[f64], c: &CampaignStats) -> Result<()> {
    let label = c.label();
    for (f, point) in freqs.iter().zip(&c.points) {
        for (name, s) in SPARAM_NAMES.iter().zip(point) {
            w.write_record([
                format!("{f:.15e}"),
                name.to_string(),
                format!("{:.15e}", s.mean.re),
                format!("{:.15e}", s.mean.im),
                format!("{:.15e}", s.std_mag),
                format!("{:.15e}", s.lo95),
                format!("{:.15e}", s.hi95),
                label.clone(),
            ])
            .map_err(csv_error)?;
        }
    }
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Precondition(format!("CSV output: {other:?}")),
    }
}

impl McReport {
    /// Statistics of the combined campaign, one row per frequency and
    /// S-parameter.
    pub fn to_csv(&self) -> Result<String> {
        self.csv_of(std::iter::once(&self.combined))
    }

    /// Statistics of every single-source campaign, stacked.
    pub fn budget_csv(&self) -> Result<String> {
        self.csv_of(self.budget.iter())
    }

    fn csv_of<'a>(&self, campaigns: impl Iterator<Item = &'a CampaignStats>) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(csv_error)?;
        for c in campaigns {
            write_campaign(&mut w, &self.frequencies, c)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("CSV output is ASCII"))
    }

    /// Summary: run counts, failures and median spreads per campaign.
    pub fn summary_json(&self) -> Result<String> {
        let campaign = |c: &CampaignStats| {
            let medians: serde_json::Map<String, serde_json::Value> = SPARAM_NAMES
                .iter()
                .enumerate()
                .map(|(k, n)| (n.to_string(), serde_json::json!(c.median_std(k))))
                .collect();
            serde_json::json!({
                "sources": c.label(),
                "runs_ok": c.runs_ok,
                "runs_failed": c.failures.len(),
                "failures": c.failures.iter().map(|(r, m)| serde_json::json!({"run": r, "error": m})).collect::<Vec<_>>(),
                "median_std_mag": medians,
            })
        };
        let v = serde_json::json!({
            "mode": self.mode,
            "runs": self.runs,
            "seed": self.seed,
            "bounds": self.bounds,
            "bounds_quantity": "linear magnitude",
            "frequencies_hz": self.frequencies,
            "combined": campaign(&self.combined),
            "budget": self.budget.iter().map(campaign).collect::<Vec<_>>(),
        });
        Ok(serde_json::to_string_pretty(&v)?)
    }
}
