//! Fitting and derived analyses: Lorentzian-derivative line groups,
//! pump-power saturation curves, the superradiance exponent, and linewidth
//! trends.
//!
//! Both fit models use analytic Jacobians inside a damped Gauss-Newton
//! optimizer; widths and the saturation power are kept positive by a
//! log-parameterization inside the optimizer, while the values reported back
//! are in physical units.

mod leastsq;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::population::SaturationParams;
use crate::spectrum::{peak_to_peak, SpectrumTrace, PP_WIDTH_FACTOR};

#[derive(Debug, Error)]
pub enum FitError {
    #[error("underdetermined fit: {points} points for {params} parameters")]
    Underdetermined { points: usize, params: usize },
    #[error("degenerate fit: normal equations singular (some parameter has no effect)")]
    DegenerateFit,
    #[error(
        "fit did not converge after {iterations} iterations \
         (residual rms {residual_rms:.3e}); last iterate {last_params:?}"
    )]
    NonConvergence {
        iterations: usize,
        residual_rms: f64,
        last_params: Vec<f64>,
    },
    #[error("undefined exponent: the spin-count ratio is 1")]
    UndefinedExponent,
    #[error("invalid fit input: {0}")]
    InvalidInput(String),
}

/// Convergence contract shared by both fit models.
#[derive(Debug, Clone, Copy)]
pub struct FitOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 500, rel_tol: 1e-8 }
    }
}

/// Amplitude coupling of the satellite lines to the central line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// Satellite amplitudes tied to the central one by the isotope-site
    /// statistics (`satellite_to_central = (p_one/2) / p_central`).
    AbundanceConstrained { satellite_to_central: f64 },
    /// Independent satellite amplitudes; needed to detect a superradiant
    /// excess of the central line.
    Free,
}

impl WeightMode {
    pub fn n_params(&self) -> usize {
        match self {
            WeightMode::AbundanceConstrained { .. } => 5,
            WeightMode::Free => 7,
        }
    }
}

/// A fitted (or initial-guess) triplet of one central line and two
/// hyperfine satellites.
#[derive(Debug, Clone, PartialEq)]
pub struct LineGroupFit {
    pub center_mt: f64,
    pub hwhm_central_mt: f64,
    pub hwhm_satellite_mt: f64,
    /// Central-line extremum-to-extremum amplitude, signed.
    pub amplitude: f64,
    pub satellite_amplitude_low: f64,
    pub satellite_amplitude_high: f64,
    /// Hyperfine satellite offset from the centre, mT.
    pub satellite_offset_mt: f64,
    pub weight_mode: WeightMode,
    /// Root-mean-square residual of the converged fit, signal units.
    pub residual_rms: f64,
    /// Per-parameter variance estimates in physical units, ordered as
    /// [center, hwhm_central, hwhm_satellite, amplitude(s)..., offset].
    pub covariance_diag: Vec<f64>,
    pub iterations: usize,
}

impl LineGroupFit {
    /// Bare initial guess with satellites tied by `mode`'s ratio (or equal
    /// to a third of the central amplitude in free mode).
    pub fn guess(
        center_mt: f64,
        hwhm_mt: f64,
        amplitude: f64,
        satellite_offset_mt: f64,
        mode: WeightMode,
    ) -> Self {
        let satellite = match mode {
            WeightMode::AbundanceConstrained { satellite_to_central } => {
                amplitude * satellite_to_central
            }
            WeightMode::Free => amplitude / 3.0,
        };
        Self {
            center_mt,
            hwhm_central_mt: hwhm_mt,
            hwhm_satellite_mt: hwhm_mt,
            amplitude,
            satellite_amplitude_low: satellite,
            satellite_amplitude_high: satellite,
            satellite_offset_mt,
            weight_mode: mode,
            residual_rms: 0.0,
            covariance_diag: Vec::new(),
            iterations: 0,
        }
    }

    /// Satellite intensity for scaling analyses: the arithmetic mean of the
    /// two satellite amplitude magnitudes (they may differ in a free fit).
    pub fn satellite_intensity(&self) -> f64 {
        0.5 * (self.satellite_amplitude_low.abs() + self.satellite_amplitude_high.abs())
    }

    /// |central| / mean |satellite| intensity ratio, the input to the
    /// superradiance exponent.
    pub fn intensity_ratio(&self) -> f64 {
        self.amplitude.abs() / self.satellite_intensity()
    }

    /// Initial guess read off the window: centre from the extrema midpoint,
    /// width from the extrema spacing, amplitude from the peak-to-peak
    /// height.
    pub fn guess_from_window(
        trace: &SpectrumTrace,
        window: (f64, f64),
        satellite_offset_mt: f64,
        mode: WeightMode,
        noise_floor: f64,
    ) -> Result<Self, FitError> {
        let pp = peak_to_peak(trace, window, noise_floor)
            .map_err(|e| FitError::InvalidInput(e.to_string()))?;
        let hwhm = (pp.width_pp_mt / PP_WIDTH_FACTOR).max(trace.step_mt());
        Ok(Self::guess(pp.center_mt, hwhm, pp.amplitude, satellite_offset_mt, mode))
    }
}

// Lorentzian-derivative profile value and partials at offset u.
struct LineEval {
    value: f64,
    d_amplitude: f64,
    d_u: f64,
    d_gamma: f64,
}

fn line_eval(u: f64, gamma: f64, amplitude: f64) -> LineEval {
    const K: f64 = 1.539_600_717_839_002; // 8 sqrt(3) / 9
    let g2 = gamma * gamma;
    let w = 1.0 / (u * u + g2);
    let w2 = w * w;
    let w3 = w2 * w;
    let shape = -K * g2 * gamma * u * w2;
    LineEval {
        value: amplitude * shape,
        d_amplitude: shape,
        d_u: -amplitude * K * g2 * gamma * (g2 - 3.0 * u * u) * w3,
        d_gamma: -amplitude * K * u * g2 * (3.0 * u * u - g2) * w3,
    }
}

// Internal packing: [c, ln(gc), ln(gs), A, (A_lo, A_hi), a].
fn pack(fit: &LineGroupFit, mode: WeightMode) -> DVector<f64> {
    let mut p = vec![
        fit.center_mt,
        fit.hwhm_central_mt.ln(),
        fit.hwhm_satellite_mt.ln(),
        fit.amplitude,
    ];
    if matches!(mode, WeightMode::Free) {
        p.push(fit.satellite_amplitude_low);
        p.push(fit.satellite_amplitude_high);
    }
    p.push(fit.satellite_offset_mt);
    DVector::from_vec(p)
}

fn line_group_eval(
    p: &DVector<f64>,
    mode: WeightMode,
    fields: &[f64],
    values: &[f64],
    residuals: &mut DVector<f64>,
    mut jacobian: Option<&mut DMatrix<f64>>,
) {
    let c = p[0];
    let gc = p[1].exp();
    let gs = p[2].exp();
    let a_central = p[3];
    let (a_lo, a_hi, offset_idx) = match mode {
        WeightMode::AbundanceConstrained { satellite_to_central } => (
            satellite_to_central * a_central,
            satellite_to_central * a_central,
            4,
        ),
        WeightMode::Free => (p[4], p[5], 6),
    };
    let offset = p[offset_idx];

    for (i, (&b, &y)) in fields.iter().zip(values).enumerate() {
        let central = line_eval(b - c, gc, a_central);
        let low = line_eval(b - c + offset, gs, a_lo);
        let high = line_eval(b - c - offset, gs, a_hi);
        residuals[i] = central.value + low.value + high.value - y;
        if let Some(jac) = jacobian.as_deref_mut() {
            jac[(i, 0)] = -(central.d_u + low.d_u + high.d_u);
            jac[(i, 1)] = gc * central.d_gamma;
            jac[(i, 2)] = gs * (low.d_gamma + high.d_gamma);
            match mode {
                WeightMode::AbundanceConstrained { satellite_to_central } => {
                    jac[(i, 3)] = central.d_amplitude
                        + satellite_to_central * (low.d_amplitude + high.d_amplitude);
                }
                WeightMode::Free => {
                    jac[(i, 3)] = central.d_amplitude;
                    jac[(i, 4)] = low.d_amplitude;
                    jac[(i, 5)] = high.d_amplitude;
                }
            }
            jac[(i, offset_idx)] = low.d_u - high.d_u;
        }
    }
}

/// Weighted least-squares fit of one transition's satellite triplet inside
/// `window`.
pub fn fit_line_group(
    trace: &SpectrumTrace,
    window: (f64, f64),
    initial: &LineGroupFit,
    mode: WeightMode,
    opts: &FitOptions,
) -> Result<LineGroupFit, FitError> {
    let (w_lo, w_hi) = window;
    let mut fields = Vec::new();
    let mut values = Vec::new();
    for (&b, &s) in trace.field_mt().iter().zip(trace.signal()) {
        if b >= w_lo && b <= w_hi {
            fields.push(b);
            values.push(s);
        }
    }
    let n_params = mode.n_params();
    if fields.len() < n_params {
        return Err(FitError::Underdetermined { points: fields.len(), params: n_params });
    }
    if !(initial.hwhm_central_mt > 0.0) || !(initial.hwhm_satellite_mt > 0.0) {
        return Err(FitError::InvalidInput(
            "initial half-widths must be positive".into(),
        ));
    }
    if initial.center_mt < w_lo || initial.center_mt > w_hi {
        return Err(FitError::InvalidInput(format!(
            "initial centre {} lies outside the window [{w_lo}, {w_hi}]",
            initial.center_mt
        )));
    }

    let eval = |p: &DVector<f64>, r: &mut DVector<f64>, jac: Option<&mut DMatrix<f64>>| {
        line_group_eval(p, mode, &fields, &values, r, jac);
    };
    let solution = leastsq::solve(
        eval,
        fields.len(),
        pack(initial, mode),
        &leastsq::Options { max_iter: opts.max_iter, rel_tol: opts.rel_tol },
    )
    .map_err(|e| map_solve_error(e, |p| unpack_physical(p, mode)))?;

    Ok(unpack_fit(&solution, mode))
}

fn map_solve_error(
    e: leastsq::SolveError,
    to_physical: impl Fn(&DVector<f64>) -> Vec<f64>,
) -> FitError {
    match e {
        leastsq::SolveError::Degenerate => FitError::DegenerateFit,
        leastsq::SolveError::NonConvergence { last_params, iterations, residual_rms } => {
            FitError::NonConvergence {
                iterations,
                residual_rms,
                last_params: to_physical(&last_params),
            }
        }
    }
}

fn unpack_physical(p: &DVector<f64>, mode: WeightMode) -> Vec<f64> {
    let mut out = vec![p[0], p[1].exp(), p[2].exp(), p[3]];
    match mode {
        WeightMode::AbundanceConstrained { .. } => out.push(p[4]),
        WeightMode::Free => {
            out.push(p[4]);
            out.push(p[5]);
            out.push(p[6]);
        }
    }
    out
}

fn unpack_fit(solution: &leastsq::Solution, mode: WeightMode) -> LineGroupFit {
    let p = &solution.params;
    let gc = p[1].exp();
    let gs = p[2].exp();
    let amplitude = p[3];
    let (a_lo, a_hi, offset_idx) = match mode {
        WeightMode::AbundanceConstrained { satellite_to_central } => {
            (satellite_to_central * amplitude, satellite_to_central * amplitude, 4)
        }
        WeightMode::Free => (p[4], p[5], 6),
    };
    // log-width variances mapped back with the local slope gamma
    let mut covariance: Vec<f64> = solution.covariance_diag.clone();
    covariance[1] *= gc * gc;
    covariance[2] *= gs * gs;
    LineGroupFit {
        center_mt: p[0],
        hwhm_central_mt: gc,
        hwhm_satellite_mt: gs,
        amplitude,
        satellite_amplitude_low: a_lo,
        satellite_amplitude_high: a_hi,
        satellite_offset_mt: p[offset_idx],
        weight_mode: mode,
        residual_rms: solution.residual_rms,
        covariance_diag: covariance,
        iterations: solution.iterations,
    }
}

/// Intensity-vs-spin-count scaling diagnostic `I_ratio = N_ratio ^ k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperradianceResult {
    pub intensity_ratio: f64,
    pub number_ratio: f64,
    /// Scaling exponent; 1 for independent emitters, 2 for superradiance.
    pub exponent_k: f64,
}

/// Exponent of the intensity-vs-count power law from the central/satellite
/// intensity ratio and the corresponding spin-count ratio.
pub fn superradiance_exponent(
    i_plus: f64,
    i_hf: f64,
    n_plus: f64,
    n_hf: f64,
) -> Result<SuperradianceResult, FitError> {
    for (name, v) in [("i_plus", i_plus), ("i_hf", i_hf), ("n_plus", n_plus), ("n_hf", n_hf)] {
        if !(v > 0.0) {
            return Err(FitError::InvalidInput(format!("{name} must be positive, got {v}")));
        }
    }
    let number_ratio = n_plus / n_hf;
    let log_n = number_ratio.ln();
    if log_n == 0.0 {
        return Err(FitError::UndefinedExponent);
    }
    let intensity_ratio = i_plus / i_hf;
    Ok(SuperradianceResult {
        intensity_ratio,
        number_ratio,
        exponent_k: intensity_ratio.ln() / log_n,
    })
}

/// Converged saturation-law fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationFit {
    pub params: SaturationParams,
    pub residual_rms: f64,
    /// Variances for [delta_p_max, p0_mw, p_alpha_mw].
    pub covariance_diag: Vec<f64>,
    pub iterations: usize,
}

/// Default starting point for the saturation fit: scale from the largest
/// |delta_p|, saturation power from the median power, absorption offset from
/// the smallest power.
pub fn saturation_initial_guess(points: &[(f64, f64)]) -> SaturationParams {
    let mut powers: Vec<f64> = points.iter().map(|p| p.0).collect();
    powers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale = points
        .iter()
        .map(|p| p.1)
        .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
        .unwrap_or(0.0);
    SaturationParams {
        delta_p_max: scale,
        p0_mw: powers[powers.len() / 2].max(1e-6),
        p_alpha_mw: powers[0],
    }
}

/// Least-squares fit of the logarithmic saturation law to
/// `(power_mw, delta_p)` samples.
pub fn fit_saturation(
    points: &[(f64, f64)],
    initial: &SaturationParams,
    opts: &FitOptions,
) -> Result<SaturationFit, FitError> {
    if points.len() < 4 {
        return Err(FitError::Underdetermined { points: points.len(), params: 3 });
    }
    let mut powers: Vec<f64> = points.iter().map(|p| p.0).collect();
    powers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if powers[0] < 0.0 {
        return Err(FitError::InvalidInput("powers must be non-negative".into()));
    }
    if powers.windows(2).any(|w| w[0] == w[1]) {
        return Err(FitError::InvalidInput("powers must be distinct".into()));
    }
    if !(initial.p0_mw > 0.0) {
        return Err(FitError::InvalidInput("initial p0_mw must be positive".into()));
    }

    // internal packing: [delta_p_max, ln(p0), p_alpha]
    let eval = |p: &DVector<f64>, r: &mut DVector<f64>, jac: Option<&mut DMatrix<f64>>| {
        let scale = p[0];
        let p0 = p[1].exp();
        let p_alpha = p[2];
        let denom = p0 + p_alpha;
        if !(denom > 0.0) {
            for i in 0..points.len() {
                r[i] = 1e150;
            }
            return;
        }
        for (i, &(power, y)) in points.iter().enumerate() {
            r[i] = scale * ((p0 + power) / denom).ln() - y;
        }
        if let Some(jac) = jac {
            for (i, &(power, _)) in points.iter().enumerate() {
                jac[(i, 0)] = ((p0 + power) / denom).ln();
                jac[(i, 1)] = scale * p0 * (1.0 / (p0 + power) - 1.0 / denom);
                jac[(i, 2)] = -scale / denom;
            }
        }
    };

    let start = DVector::from_vec(vec![
        initial.delta_p_max,
        initial.p0_mw.ln(),
        initial.p_alpha_mw,
    ]);
    let solution = leastsq::solve(
        eval,
        points.len(),
        start,
        &leastsq::Options { max_iter: opts.max_iter, rel_tol: opts.rel_tol },
    )
    .map_err(|e| map_solve_error(e, |p| vec![p[0], p[1].exp(), p[2]]))?;

    let p0 = solution.params[1].exp();
    let p_alpha = solution.params[2];
    if p_alpha < 0.0 {
        log::warn!("saturation fit converged to a negative absorption offset {p_alpha} mW");
    }
    let mut covariance = solution.covariance_diag.clone();
    covariance[1] *= p0 * p0;
    Ok(SaturationFit {
        params: SaturationParams {
            delta_p_max: solution.params[0],
            p0_mw: p0,
            p_alpha_mw: p_alpha,
        },
        residual_rms: solution.residual_rms,
        covariance_diag: covariance,
        iterations: solution.iterations,
    })
}

/// Pump-power linewidth trend.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthTrend {
    /// Width at the highest power over width at the lowest power.
    pub ratio_high_to_low: f64,
    /// True when the widths are monotone (non-strict) in power.
    pub monotone: bool,
}

/// Ratio and monotonicity of peak-to-peak widths across pump powers.
pub fn linewidth_trend(entries: &[(f64, f64)]) -> Result<LinewidthTrend, FitError> {
    if entries.len() < 2 {
        return Err(FitError::InvalidInput(
            "need at least two (power, width) entries".into(),
        ));
    }
    let mut sorted: Vec<(f64, f64)> = entries.to_vec();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if sorted.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(FitError::InvalidInput("powers must be distinct".into()));
    }
    let non_increasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
    let non_decreasing = sorted.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(LinewidthTrend {
        ratio_high_to_low: sorted.last().unwrap().1 / sorted[0].1,
        monotone: non_increasing || non_decreasing,
    })
}
