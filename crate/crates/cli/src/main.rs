use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod inputs;
mod manifest;

/// Two-port VNA calibration with symmetric loads, a reciprocal network and
/// one defined match.
#[derive(Parser, Debug)]
#[command(name = "srm", version, about)]
struct Cli {
    /// Worker threads for frequency- and run-parallel work. Output does not
    /// depend on this value.
    #[arg(long, short = 'j', global = true, env = "SRM_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic measurement directory from a kit configuration.
    Simulate(SimulateArgs),
    /// Solve the error model from a measurement directory or manifest.
    Calibrate(CalibrateArgs),
    /// Correct a raw two-port measurement with an error model.
    Apply(ApplyArgs),
    /// Tabulate 20·log10|S_cal − S_ref| per frequency and S-parameter.
    Compare(CompareArgs),
    /// Run a Monte Carlo uncertainty campaign.
    Mc(McArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Thru,
    Full,
    Half,
}

impl From<ModeArg> for srm_core::srm::CalMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Thru => Self::Thru,
            ModeArg::Full => Self::Full,
            ModeArg::Half => Self::Half,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for srm_core::srm::Side {
    fn from(s: SideArg) -> Self {
        match s {
            SideArg::Left => Self::Left,
            SideArg::Right => Self::Right,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AmbiguityArg {
    Warn,
    Error,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    Noise,
    Asymmetry,
    Network,
    Match,
    Crosstalk,
    All,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Kit configuration (JSON); the bundled example kit when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, short)]
    pub out: PathBuf,
    /// Override the mode from the config.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Override the perturbation seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the active perturbation sources (comma separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub sources: Option<Vec<SourceArg>>,
    /// Monte Carlo run index whose draws to reproduce.
    #[arg(long, default_value_t = 0)]
    pub run: u64,
}

#[derive(Args, Debug)]
pub struct CalibrateArgs {
    /// Measurement directory or manifest file.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Calibration mode; taken from the manifest, else `full`.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Port the network-load standards were measured from.
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    /// One-port Touchstone file defining the match at both ports.
    #[arg(long, conflicts_with = "match_impedance")]
    pub match_definition: Option<PathBuf>,
    /// Match defined as a constant real impedance in ohms.
    #[arg(long)]
    pub match_impedance: Option<f64>,
    /// Index of the load whose reflection is roughly known.
    #[arg(long)]
    pub estimate_load: Option<usize>,
    /// Rough reflection of that load at DC, as `re,im`.
    #[arg(long, value_delimiter = ',', num_args = 2, allow_negative_numbers = true)]
    pub reflect_estimate: Option<Vec<f64>>,
    /// Round-trip delay of that load's reflection in seconds.
    #[arg(long)]
    pub reflect_delay: Option<f64>,
    /// One-way delay of the network standard in seconds.
    #[arg(long)]
    pub transmission_delay: Option<f64>,
    /// What to do when the eigenvector ordering is ambiguous.
    #[arg(long, value_enum, default_value = "warn")]
    pub ambiguity: AmbiguityArg,
    /// Do not assume the network is reciprocal; k is then flagged unreliable.
    #[arg(long)]
    pub non_reciprocal: bool,
    /// Error model output (JSON).
    #[arg(long, short)]
    pub out: PathBuf,
    /// Per-frequency diagnostics (CSV).
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Raw two-port measurement (.s2p).
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Calibrated network (.s2p).
    #[arg(long)]
    pub cal: PathBuf,
    /// Reference network (.s2p).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct McArgs {
    /// Kit configuration (JSON); the bundled example kit when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long, short = 'n', default_value_t = 200)]
    pub runs: usize,
    /// Active perturbation sources (comma separated, or `all`).
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    pub sources: Vec<SourceArg>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Percentile instead of Gaussian 95 % bounds.
    #[arg(long)]
    pub percentile: bool,
    /// Skip the single-source budget campaigns.
    #[arg(long)]
    pub no_budget: bool,
    /// Largest tolerated fraction of failed runs.
    #[arg(long, default_value_t = 0.01)]
    pub failure_limit: f64,
    #[arg(long, short)]
    pub out: PathBuf,
}

/// An error with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;
    pub const NUMERICAL: u8 = 4;

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: Self::USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: Self::DATA,
            message: message.into(),
        }
    }
}

impl From<srm_core::Error> for CliError {
    fn from(e: srm_core::Error) -> Self {
        use srm_core::Error as E;
        let code = if e.is_numerical() {
            Self::NUMERICAL
        } else {
            match e.root() {
                E::Config(_) => Self::USAGE,
                _ => Self::DATA,
            }
        };
        let message = match e.frequency_index() {
            Some(i) => format!("numerical failure at frequency index {i}: {}", e.root()),
            None => e.to_string(),
        };
        Self { code, message }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::config("--jobs must be at least 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Apply(a) => commands::apply(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Mc(a) => commands::mc(&a),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
