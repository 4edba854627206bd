//! Thermal and optically pumped population differences.
//!
//! Population differences are fractional and signed throughout: an inverted
//! (emissive) transition carries a negative value. Absolute values are a
//! display concern only.

use thiserror::Error;

use crate::constants::{BOLTZMANN, PLANCK};
use crate::spin::{second_legendre, Orientation, TransitionLabel};

/// Physical ceiling on |delta_p|: full polarisation into the +-1/2 doublet.
pub const DELTA_P_LIMIT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum PopulationError {
    #[error("temperature must be positive, got {0} K")]
    NonPositiveTemperature(f64),
    #[error("microwave frequency must be positive, got {0} GHz")]
    NonPositiveFrequency(f64),
    #[error("dark reference amplitude is zero; population scaling undefined")]
    ZeroDarkAmplitude,
    #[error("pump power must be non-negative, got {0} mW")]
    NegativePower(f64),
    #[error("invalid saturation parameters: {0}")]
    InvalidSaturation(String),
}

/// Signed population difference on one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PopulationState {
    pub delta_p: f64,
    pub transition: TransitionLabel,
}

impl PopulationState {
    /// Builds the state, warning (without clamping) when the physical
    /// |delta_p| <= 0.5 bound is violated: an out-of-range value signals bad
    /// inputs and must stay visible.
    pub fn new(delta_p: f64, transition: TransitionLabel) -> Self {
        if delta_p.abs() > DELTA_P_LIMIT {
            log::warn!(
                "population difference {delta_p} on {transition} exceeds the physical bound of +-0.5"
            );
        }
        Self { delta_p, transition }
    }
}

/// Parameters of the logarithmic pump-power saturation law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationParams {
    /// Asymptotic population difference scale (signed).
    pub delta_p_max: f64,
    /// Saturation power, mW.
    pub p0_mw: f64,
    /// Power offset from light absorption in the sample, mW.
    pub p_alpha_mw: f64,
}

impl SaturationParams {
    pub fn new(delta_p_max: f64, p0_mw: f64, p_alpha_mw: f64) -> Result<Self, PopulationError> {
        if !(p0_mw > 0.0) {
            return Err(PopulationError::InvalidSaturation(format!(
                "p0_mw must be positive, got {p0_mw}"
            )));
        }
        if !(p_alpha_mw >= 0.0) {
            return Err(PopulationError::InvalidSaturation(format!(
                "p_alpha_mw must be non-negative, got {p_alpha_mw}"
            )));
        }
        if delta_p_max.abs() > DELTA_P_LIMIT {
            log::warn!("delta_p_max {delta_p_max} exceeds the physical bound of +-0.5");
        }
        Ok(Self { delta_p_max, p0_mw, p_alpha_mw })
    }
}

/// Thermal-equilibrium population difference across one allowed transition,
/// from the four-level Boltzmann distribution with equal adjacent gaps
/// `h nu` (the zero-field correction of order D/nu is neglected).
///
/// The difference is taken across the middle (+-1/2) pair of the ladder.
pub fn boltzmann_delta_p(
    mw_frequency_ghz: f64,
    temperature_k: f64,
) -> Result<f64, PopulationError> {
    if !(temperature_k > 0.0) {
        return Err(PopulationError::NonPositiveTemperature(temperature_k));
    }
    if !(mw_frequency_ghz > 0.0) {
        return Err(PopulationError::NonPositiveFrequency(mw_frequency_ghz));
    }
    let y = PLANCK * mw_frequency_ghz * 1e9 / (BOLTZMANN * temperature_k);
    // levels at m h nu, m = -3/2 .. 3/2: p(-1/2) - p(+1/2) over the sum
    Ok((0.5 * y).sinh() / ((0.5 * y).cosh() + (1.5 * y).cosh()))
}

/// Population difference from the pumped and dark peak-to-peak amplitudes,
/// `delta_p = (i_exc / i_dark) delta_p_B`. Both amplitudes are signed, so an
/// emission-phase pumped line against an absorptive dark reference comes out
/// negative.
pub fn delta_p_from_intensities(
    i_exc: f64,
    i_dark: f64,
    delta_p_b: f64,
    transition: TransitionLabel,
) -> Result<PopulationState, PopulationError> {
    if i_dark == 0.0 {
        return Err(PopulationError::ZeroDarkAmplitude);
    }
    Ok(PopulationState::new(i_exc / i_dark * delta_p_b, transition))
}

/// Angular projection of the population difference,
/// `delta_p(theta) = 1/2 delta_p_max (3 cos^2 theta - 1)`.
pub fn angular_delta_p(delta_p_max: f64, orient: Orientation) -> f64 {
    if delta_p_max.abs() > DELTA_P_LIMIT {
        log::warn!("delta_p_max {delta_p_max} exceeds the physical bound of +-0.5");
    }
    0.5 * delta_p_max * second_legendre(orient.radians())
}

/// Pump-power saturation law
/// `delta_p(P) = delta_p_max ln((P0 + P) / (P0 + P_alpha))`.
pub fn saturation_delta_p(params: &SaturationParams, power_mw: f64) -> Result<f64, PopulationError> {
    if !(power_mw >= 0.0) {
        return Err(PopulationError::NegativePower(power_mw));
    }
    let denom = params.p0_mw + params.p_alpha_mw;
    if !(denom > 0.0) {
        return Err(PopulationError::InvalidSaturation(format!(
            "p0_mw + p_alpha_mw must be positive, got {denom}"
        )));
    }
    Ok(params.delta_p_max * ((params.p0_mw + power_mw) / denom).ln())
}

/// Diagonal of the population-difference tensor: the zero-field-splitting
/// tensor diag(D/3, D/3, -2D/3) scaled by `delta_p_max / (2 ZFS)` with
/// ZFS = 2 D. Valid in the high-field regime only.
pub fn population_tensor_diag(
    delta_p_max: f64,
    zfs_d_mhz: f64,
) -> Result<[f64; 3], PopulationError> {
    if !(zfs_d_mhz > 0.0) {
        return Err(PopulationError::InvalidSaturation(format!(
            "tensor scaling needs a positive D, got {zfs_d_mhz} MHz"
        )));
    }
    let scale = delta_p_max / (2.0 * 2.0 * zfs_d_mhz);
    Ok([
        scale * zfs_d_mhz / 3.0,
        scale * zfs_d_mhz / 3.0,
        scale * (-2.0 * zfs_d_mhz / 3.0),
    ])
}
