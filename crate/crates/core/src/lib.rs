//! Simulation and analysis toolkit for an optically pumped S = 3/2 spin
//! defect in a microwave cavity.
//!
//! - [`spin`]: spin Hamiltonian with axial zero-field splitting, exact
//!   resonance fields of the three allowed transitions, first-order angular
//!   splitting and the magic angle;
//! - [`population`]: thermal and optically pumped population differences,
//!   angular projection and pump-power saturation;
//! - [`spectrum`]: field-swept first-derivative synthesis with hyperfine
//!   satellite triplets, and peak-to-peak extraction;
//! - [`analysis`]: line-group and saturation-curve fits, the superradiance
//!   exponent, linewidth trends;
//! - [`threshold`]: the maser threshold condition and parameter sweeps;
//! - [`config`], [`trace_io`], [`report`]: the flat key = value run
//!   configuration and the CSV/report file formats.
//!
//! All computational functions are pure: values are freely shareable across
//! threads and sweeps may be parallelised by the caller.

// validation guards are written `!(x > 0.0)` so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod constants;
pub mod population;
pub mod report;
pub mod spectrum;
pub mod spin;
pub mod threshold;
pub mod trace_io;

pub use analysis::{
    fit_line_group, fit_saturation, linewidth_trend, superradiance_exponent, FitError, FitOptions,
    LineGroupFit, LinewidthTrend, SaturationFit, SuperradianceResult, WeightMode,
};
pub use config::{load_config, parse_config, ConfigError, RunConfig, WeightModeConfig};
pub use population::{
    angular_delta_p, boltzmann_delta_p, delta_p_from_intensities, saturation_delta_p,
    PopulationError, PopulationState, SaturationParams,
};
pub use spectrum::{
    isotope_site_probabilities, lorentzian_derivative, peak_to_peak, synthesize_spectrum,
    ExperimentConditions, FieldGrid, LineShapeParams, NoiseSpec, PeakToPeak, Polarization,
    SiteProbabilities, SpectrumError, SpectrumTrace, TraceMeta,
};
pub use spin::{
    build_hamiltonian, energy_levels, magic_angle, resonance_fields_exact, spin_operators,
    splitting_first_order, splitting_sweep, Orientation, SpinMatrix, SpinModelError, SpinSystem,
    SplittingSample, SubLine, Transition, TransitionLabel, TransitionSet,
};
pub use threshold::{
    masing_margin, threshold_q, threshold_sweep, MaserParams, MasingMargin, SweepAxis, SweepRow,
    SweepStatus, ThresholdError,
};
pub use trace_io::{read_trace, read_xy_csv, trace_from_string, trace_to_string, write_trace, TraceIoError};
