//! Synthesis of field-swept, first-derivative spectra and peak-to-peak
//! extraction.
//!
//! Every line is the analytic first derivative of a Lorentzian, normalised
//! so that `amplitude` is the extremum-to-extremum height (the quantity the
//! population analysis consumes). Each transition contributes a central line
//! plus two hyperfine satellites weighted by the single-nucleus site
//! statistics; configurations with several spin-bearing neighbours are
//! dropped as insignificant.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::spin::{
    resonance_fields_exact, Orientation, SpinModelError, SpinSystem, TransitionLabel,
};

/// Extremum-to-extremum width of a derivative Lorentzian with half-width
/// gamma is `PP_WIDTH_FACTOR * gamma` = 2 gamma / sqrt(3).
pub const PP_WIDTH_FACTOR: f64 = 1.154_700_538_379_251_7;

// Peak normalisation 8 sqrt(3) / 9: scales the raw derivative so the
// extrema sit at +-amplitude/2.
const SHAPE_NORM: f64 = 1.539_600_717_839_002;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("abundance must lie in [0, 1], got {0}")]
    InvalidAbundance(f64),
    #[error("site count must be at least 1")]
    InvalidSiteCount,
    #[error("line half-width must be positive, got {0} mT")]
    InvalidHalfWidth(f64),
    #[error("invalid field grid: {0}")]
    InvalidGrid(String),
    #[error(
        "field grid [{start_mt} mT, {stop_mt} mT] clips the line at {line_mt} mT \
         (needs {margin_mt} mT of margin)"
    )]
    GridTooNarrow {
        start_mt: f64,
        stop_mt: f64,
        line_mt: f64,
        margin_mt: f64,
    },
    #[error("window [{0} mT, {1} mT] contains no samples")]
    EmptyWindow(f64, f64),
    #[error("no line found: peak-to-peak excursion {found} is at or below the noise floor {floor}")]
    BelowNoiseFloor { found: f64, floor: f64 },
    #[error("polarization values must be finite")]
    NonFinitePolarization,
    #[error(transparent)]
    Spin(#[from] SpinModelError),
}

/// Probabilities of the nuclear-spin environment of a defect with `n`
/// equivalent neighbour sites and per-site spin-1/2 abundance `a`:
/// no spin-bearing neighbour, exactly one, or several.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteProbabilities {
    pub p_central: f64,
    pub p_one_satellite: f64,
    pub p_multi: f64,
}

impl SiteProbabilities {
    /// Central-to-single-satellite amplitude ratio `p_central / (p_one / 2)`.
    pub fn central_to_satellite_ratio(&self) -> f64 {
        self.p_central / (0.5 * self.p_one_satellite)
    }

    /// Single-satellite-to-central ratio used to tie satellite amplitudes to
    /// the central one in constrained fits.
    pub fn satellite_to_central_ratio(&self) -> f64 {
        0.5 * self.p_one_satellite / self.p_central
    }
}

/// Binomial site statistics: `p_central = (1-a)^n`,
/// `p_one = n a (1-a)^(n-1)`, remainder in `p_multi`.
pub fn isotope_site_probabilities(
    abundance: f64,
    n_sites: u32,
) -> Result<SiteProbabilities, SpectrumError> {
    if !(0.0..=1.0).contains(&abundance) {
        return Err(SpectrumError::InvalidAbundance(abundance));
    }
    if n_sites < 1 {
        return Err(SpectrumError::InvalidSiteCount);
    }
    let n = n_sites as f64;
    let p_central = (1.0 - abundance).powi(n_sites as i32);
    let p_one_satellite = n * abundance * (1.0 - abundance).powi(n_sites as i32 - 1);
    let p_multi = (1.0 - p_central - p_one_satellite).max(0.0);
    Ok(SiteProbabilities { p_central, p_one_satellite, p_multi })
}

/// One derivative-Lorentzian line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineShapeParams {
    /// Lorentzian half-width at half-maximum, mT.
    pub hwhm_mt: f64,
    /// Signed extremum-to-extremum height; negative flips the phase to the
    /// emission signature (down first, then up, read towards higher field).
    pub amplitude: f64,
    /// Centre field, mT.
    pub center_mt: f64,
}

impl LineShapeParams {
    pub fn new(hwhm_mt: f64, amplitude: f64, center_mt: f64) -> Result<Self, SpectrumError> {
        if !(hwhm_mt > 0.0) {
            return Err(SpectrumError::InvalidHalfWidth(hwhm_mt));
        }
        Ok(Self { hwhm_mt, amplitude, center_mt })
    }
}

/// First derivative of a Lorentzian absorption line, normalised so the
/// extremum-to-extremum height equals |amplitude|. Odd about the centre,
/// extrema at `center +- hwhm/sqrt(3)`.
pub fn lorentzian_derivative(field_mt: f64, params: &LineShapeParams) -> f64 {
    let u = field_mt - params.center_mt;
    let g = params.hwhm_mt;
    let d = u * u + g * g;
    -params.amplitude * SHAPE_NORM * g * g * g * u / (d * d)
}

pub(crate) fn lorentzian_derivative_raw(u: f64, gamma: f64, amplitude: f64) -> f64 {
    let d = u * u + gamma * gamma;
    -amplitude * SHAPE_NORM * gamma * gamma * gamma * u / (d * d)
}

/// Uniform field grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldGrid {
    pub start_mt: f64,
    pub stop_mt: f64,
    pub step_mt: f64,
}

impl FieldGrid {
    pub fn new(start_mt: f64, stop_mt: f64, step_mt: f64) -> Result<Self, SpectrumError> {
        if !(step_mt > 0.0) || !(stop_mt > start_mt) || !start_mt.is_finite() {
            return Err(SpectrumError::InvalidGrid(format!(
                "need start < stop and step > 0, got [{start_mt}, {stop_mt}] step {step_mt}"
            )));
        }
        Ok(Self { start_mt, stop_mt, step_mt })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_mt - self.start_mt) / self.step_mt + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start_mt + i as f64 * self.step_mt).collect()
    }
}

/// Acquisition conditions attached to a synthesised trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConditions {
    pub mw_frequency_ghz: f64,
    pub orientation: Orientation,
    pub temperature_k: f64,
    pub pump_power_mw: f64,
    pub q_factor: f64,
}

/// Signed population difference driving each transition's amplitude.
/// The central transition tracks the thermal value, not the pumping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    pub delta_p_minus: f64,
    pub delta_p_zero: f64,
    pub delta_p_plus: f64,
}

impl Polarization {
    pub fn delta_p(&self, label: TransitionLabel) -> f64 {
        match label {
            TransitionLabel::BMinus => self.delta_p_minus,
            TransitionLabel::BZero => self.delta_p_zero,
            TransitionLabel::BPlus => self.delta_p_plus,
        }
    }
}

/// Seeded additive white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub rms: f64,
    pub seed: u64,
}

/// Trace metadata; fields missing from a parsed file stay `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceMeta {
    pub mw_frequency_ghz: Option<f64>,
    pub theta_rad: Option<f64>,
    pub temperature_k: Option<f64>,
    pub pump_power_mw: Option<f64>,
    pub q_factor: Option<f64>,
    pub modulation_note: Option<String>,
}

/// Field-swept first-derivative signal on a uniform, strictly increasing
/// grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTrace {
    field_mt: Vec<f64>,
    signal: Vec<f64>,
    pub meta: TraceMeta,
}

impl SpectrumTrace {
    /// Spacing uniformity is enforced to one part in 1e9.
    pub fn new(field_mt: Vec<f64>, signal: Vec<f64>, meta: TraceMeta) -> Result<Self, SpectrumError> {
        if field_mt.len() < 2 || field_mt.len() != signal.len() {
            return Err(SpectrumError::InvalidGrid(format!(
                "need matching arrays of at least 2 samples, got {} fields and {} signals",
                field_mt.len(),
                signal.len()
            )));
        }
        let h0 = field_mt[1] - field_mt[0];
        if !(h0 > 0.0) {
            return Err(SpectrumError::InvalidGrid(
                "field grid must be strictly increasing".into(),
            ));
        }
        for w in field_mt.windows(2) {
            let h = w[1] - w[0];
            if !(h > 0.0) {
                return Err(SpectrumError::InvalidGrid(
                    "field grid must be strictly increasing".into(),
                ));
            }
            if ((h - h0) / h0).abs() > 1e-9 {
                return Err(SpectrumError::InvalidGrid(format!(
                    "field grid spacing is not uniform: {h} vs {h0}"
                )));
            }
        }
        Ok(Self { field_mt, signal, meta })
    }

    pub fn field_mt(&self) -> &[f64] {
        &self.field_mt
    }

    pub fn signal(&self) -> &[f64] {
        &self.signal
    }

    pub fn len(&self) -> usize {
        self.field_mt.len()
    }

    pub fn is_empty(&self) -> bool {
        self.field_mt.is_empty()
    }

    pub fn step_mt(&self) -> f64 {
        self.field_mt[1] - self.field_mt[0]
    }
}

/// Synthesises the three-transition spectrum: for every resolved transition,
/// a central line and two satellites at the hyperfine offsets, with
/// extremum-to-extremum amplitudes `delta_p * weight`. The grid must span
/// every sub-line by at least five half-widths.
pub fn synthesize_spectrum(
    system: &SpinSystem,
    conditions: &ExperimentConditions,
    grid: &FieldGrid,
    line_hwhm_mt: f64,
    polarization: &Polarization,
    noise: Option<NoiseSpec>,
) -> Result<SpectrumTrace, SpectrumError> {
    if !(line_hwhm_mt > 0.0) {
        return Err(SpectrumError::InvalidHalfWidth(line_hwhm_mt));
    }
    for v in [
        polarization.delta_p_minus,
        polarization.delta_p_zero,
        polarization.delta_p_plus,
    ] {
        if !v.is_finite() {
            return Err(SpectrumError::NonFinitePolarization);
        }
    }

    let set = resonance_fields_exact(system, conditions.mw_frequency_ghz, conditions.orientation)?;

    let margin = 5.0 * line_hwhm_mt;
    let mut lines: Vec<(f64, f64)> = Vec::with_capacity(9); // (centre, amplitude)
    for t in &set.transitions {
        let dp = polarization.delta_p(t.label);
        for sub in &t.sub_lines {
            let center = t.resonance_field_mt + sub.offset_mt;
            if center - margin < grid.start_mt || center + margin > grid.stop_mt {
                return Err(SpectrumError::GridTooNarrow {
                    start_mt: grid.start_mt,
                    stop_mt: grid.stop_mt,
                    line_mt: center,
                    margin_mt: margin,
                });
            }
            lines.push((center, dp * sub.weight));
        }
    }

    let field = grid.points();
    let mut signal = vec![0.0; field.len()];
    for (center, amplitude) in &lines {
        if *amplitude == 0.0 {
            continue;
        }
        for (s, b) in signal.iter_mut().zip(&field) {
            *s += lorentzian_derivative_raw(b - center, line_hwhm_mt, *amplitude);
        }
    }

    if let Some(spec) = noise {
        if spec.rms > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let normal = Normal::new(0.0, spec.rms)
                .map_err(|e| SpectrumError::InvalidGrid(format!("noise rms: {e}")))?;
            for s in &mut signal {
                *s += normal.sample(&mut rng);
            }
        }
    }

    let meta = TraceMeta {
        mw_frequency_ghz: Some(conditions.mw_frequency_ghz),
        theta_rad: Some(conditions.orientation.radians()),
        temperature_k: Some(conditions.temperature_k),
        pump_power_mw: Some(conditions.pump_power_mw),
        q_factor: Some(conditions.q_factor),
        modulation_note: Some("analytic first derivative".to_string()),
    };
    SpectrumTrace::new(field, signal, meta)
}

/// Peak-to-peak reading of one line group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakToPeak {
    /// Extremum-to-extremum height; negative when the minimum precedes the
    /// maximum in field (emission phase).
    pub amplitude: f64,
    /// Field distance between the extrema, mT.
    pub width_pp_mt: f64,
    /// Midpoint of the extrema, mT.
    pub center_mt: f64,
}

/// Locates the signal extrema inside `window` and reads off the signed
/// amplitude, peak-to-peak width and centre. Extremum positions and values
/// are refined below the grid step with a local quartic interpolant.
pub fn peak_to_peak(
    trace: &SpectrumTrace,
    window: (f64, f64),
    noise_floor: f64,
) -> Result<PeakToPeak, SpectrumError> {
    let (w_lo, w_hi) = window;
    let field = trace.field_mt();
    let signal = trace.signal();
    let idx: Vec<usize> = (0..field.len())
        .filter(|&i| field[i] >= w_lo && field[i] <= w_hi)
        .collect();
    if idx.is_empty() {
        return Err(SpectrumError::EmptyWindow(w_lo, w_hi));
    }

    let mut i_max = idx[0];
    let mut i_min = idx[0];
    for &i in &idx {
        if signal[i] > signal[i_max] {
            i_max = i;
        }
        if signal[i] < signal[i_min] {
            i_min = i;
        }
    }
    let raw_excursion = signal[i_max] - signal[i_min];
    if raw_excursion <= noise_floor || raw_excursion == 0.0 {
        return Err(SpectrumError::BelowNoiseFloor {
            found: raw_excursion,
            floor: noise_floor,
        });
    }

    let (b_max, s_max) = refine_extremum(field, signal, i_max);
    let (b_min, s_min) = refine_extremum(field, signal, i_min);

    let magnitude = s_max - s_min;
    let amplitude = if b_min < b_max { -magnitude } else { magnitude };
    Ok(PeakToPeak {
        amplitude,
        width_pp_mt: (b_max - b_min).abs(),
        center_mt: 0.5 * (b_max + b_min),
    })
}

/// Sub-grid extremum refinement: quartic interpolation through the five
/// samples around the grid extremum where possible, parabolic with three,
/// the raw sample at the boundary.
fn refine_extremum(field: &[f64], signal: &[f64], i: usize) -> (f64, f64) {
    let n = field.len();
    let h = field[1] - field[0];
    if i >= 2 && i + 2 < n {
        let f: [f64; 5] = [
            signal[i - 2],
            signal[i - 1],
            signal[i],
            signal[i + 1],
            signal[i + 2],
        ];
        if let Some((t, value)) = quartic_vertex(&f) {
            return (field[i] + t * h, value);
        }
    }
    if i >= 1 && i + 1 < n {
        let (t, value) = parabola_vertex(signal[i - 1], signal[i], signal[i + 1]);
        return (field[i] + t * h, value);
    }
    (field[i], signal[i])
}

/// Interpolating quartic through samples at t = -2..2; Newton search for the
/// stationary point nearest the centre. Returns None when the local
/// curvature vanishes or the stationary point escapes the stencil.
fn quartic_vertex(f: &[f64; 5]) -> Option<(f64, f64)> {
    let a0 = f[2];
    let a1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / 12.0;
    let a2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / 24.0;
    let a3 = (-f[0] + 2.0 * f[1] - 2.0 * f[3] + f[4]) / 12.0;
    let a4 = (f[0] - 4.0 * f[1] + 6.0 * f[2] - 4.0 * f[3] + f[4]) / 24.0;

    let mut t: f64 = 0.0;
    for _ in 0..40 {
        let d1 = a1 + t * (2.0 * a2 + t * (3.0 * a3 + t * 4.0 * a4));
        let d2 = 2.0 * a2 + t * (6.0 * a3 + t * 12.0 * a4);
        if d2 == 0.0 {
            return None;
        }
        let step = d1 / d2;
        t -= step;
        if !t.is_finite() || t.abs() > 1.5 {
            return None;
        }
        if step.abs() < 1e-14 {
            break;
        }
    }
    let value = a0 + t * (a1 + t * (a2 + t * (a3 + t * a4)));
    Some((t, value))
}

fn parabola_vertex(f_lo: f64, f_mid: f64, f_hi: f64) -> (f64, f64) {
    let denom = f_lo - 2.0 * f_mid + f_hi;
    if denom == 0.0 {
        return (0.0, f_mid);
    }
    let t = 0.5 * (f_lo - f_hi) / denom;
    let value = f_mid - 0.125 * (f_lo - f_hi) * (f_lo - f_hi) / denom;
    (t, value)
}
