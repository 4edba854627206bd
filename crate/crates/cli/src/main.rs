//! `sicmaser`: synthesize, fit and analyse field-swept spectra of an
//! optically pumped S = 3/2 defect, and evaluate the maser threshold.
//!
//! Exit codes: 0 success, 2 validation error (configuration, arguments,
//! malformed inputs), 3 numerical failure (no resonance in the bracket,
//! non-convergence, degenerate fit, no inversion).

// validation guards are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use sicmaser::{
    ConfigError, FitError, PopulationError, SpectrumError, SpinModelError, ThresholdError,
    TraceIoError,
};

#[derive(Parser)]
#[command(name = "sicmaser", version, about = "EPR spectra and maser threshold of optically pumped spin-3/2 defects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a field-swept first-derivative trace and write it as CSV
    Synth(SynthArgs),
    /// Tabulate exact and first-order splitting plus polarization vs angle
    SweepAngle(SweepAngleArgs),
    /// Fit one transition's satellite triplet in a trace window
    Fit(FitArgs),
    /// Fit the pump-power saturation law to (power_mw, delta_p) samples
    FitSaturation(FitSaturationArgs),
    /// Superradiance exponent from intensity and spin-count ratios
    Superradiance(SuperradianceArgs),
    /// Minimum cavity Q for masing and the margin of an actual cavity
    Threshold(ThresholdArgs),
    /// Tabulate the threshold Q along one parameter axis
    SweepThreshold(SweepThresholdArgs),
}

#[derive(clap::Args)]
struct SynthArgs {
    /// Flat key = value run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output trace CSV
    #[arg(long)]
    out: PathBuf,
    /// Noise seed; without it noise stays off regardless of noise_rms
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(clap::Args)]
struct SweepAngleArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output CSV (theta_deg, delta_b_mt_exact, delta_b_mt_firstorder, delta_p)
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    theta_start_deg: f64,
    #[arg(long, default_value_t = 180.0)]
    theta_stop_deg: f64,
    #[arg(long, default_value_t = 0.1)]
    theta_step_deg: f64,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long)]
    config: PathBuf,
    /// Input trace CSV
    #[arg(long)]
    trace: PathBuf,
    /// Fit report destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Window lower edge, mT (default: around the low-field transition)
    #[arg(long)]
    window_min_mt: Option<f64>,
    /// Window upper edge, mT
    #[arg(long)]
    window_max_mt: Option<f64>,
    /// 'abundance_constrained' or 'free' (default from config)
    #[arg(long)]
    weight_mode: Option<String>,
}

#[derive(clap::Args)]
struct FitSaturationArgs {
    /// CSV with header power_mw,delta_p
    #[arg(long)]
    data: PathBuf,
    /// Optional run configuration (fit iteration budget and tolerance)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Fit report destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SuperradianceArgs {
    /// Central-line intensity (or intensity ratio when --i-hf is 1)
    #[arg(long)]
    i_plus: f64,
    /// Satellite-line intensity
    #[arg(long)]
    i_hf: f64,
    /// Spin count behind the central line; defaults from isotope statistics
    #[arg(long)]
    n_plus: Option<f64>,
    /// Spin count behind one satellite; defaults from isotope statistics
    #[arg(long)]
    n_hf: Option<f64>,
    /// Optional run configuration (abundance and site count)
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args)]
struct ThresholdArgs {
    #[arg(long)]
    config: PathBuf,
    /// Actual cavity quality factor; defaults to q_factor from the config
    #[arg(long)]
    q_actual: Option<f64>,
}

#[derive(clap::Args)]
struct SweepThresholdArgs {
    #[arg(long)]
    config: PathBuf,
    /// One of: pump_rate, relaxation_rate, spin_decay_rate, cavity_freq,
    /// spin_count, spin_photon_coupling
    #[arg(long)]
    axis: String,
    /// Comma-separated axis values (Hz for rates/frequencies/couplings)
    #[arg(long)]
    values: String,
    /// Output CSV (axis_value, q_min, status)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Spin(SpinModelError),
    Population(PopulationError),
    Spectrum(SpectrumError),
    Fit(FitError),
    Threshold(ThresholdError),
    TraceIo(TraceIoError),
    Io(std::io::Error),
    Usage(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Spin(e) => write!(f, "{e}"),
            CliError::Population(e) => write!(f, "{e}"),
            CliError::Spectrum(e) => write!(f, "{e}"),
            CliError::Fit(e) => write!(f, "{e}"),
            CliError::Threshold(e) => write!(f, "{e}"),
            CliError::TraceIo(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Usage(msg) => write!(f, "{msg}"),
        }
    }
}

macro_rules! from_error {
    ($variant:ident, $ty:ty) => {
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::$variant(e)
            }
        }
    };
}
from_error!(Config, ConfigError);
from_error!(Spin, SpinModelError);
from_error!(Population, PopulationError);
from_error!(Spectrum, SpectrumError);
from_error!(Fit, FitError);
from_error!(Threshold, ThresholdError);
from_error!(TraceIo, TraceIoError);
from_error!(Io, std::io::Error);

impl CliError {
    /// 2 for validation problems, 3 for numerical failures.
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Spin(SpinModelError::NoResonance { .. }) => 3,
            CliError::Fit(FitError::NonConvergence { .. }) => 3,
            CliError::Fit(FitError::DegenerateFit) => 3,
            CliError::Threshold(ThresholdError::NoInversion { .. }) => 3,
            CliError::Spectrum(SpectrumError::BelowNoiseFloor { .. }) => 3,
            _ => 2,
        }
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => commands::synth(&args),
        Command::SweepAngle(args) => commands::sweep_angle(&args),
        Command::Fit(args) => commands::fit(&args),
        Command::FitSaturation(args) => commands::fit_saturation(&args),
        Command::Superradiance(args) => commands::superradiance(&args),
        Command::Threshold(args) => commands::threshold(&args),
        Command::SweepThreshold(args) => commands::sweep_threshold(&args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
