//! Maser threshold condition and parameter-space sweeps.
//!
//! The self-sustained emission condition is
//!
//! ```text
//! Q >= (w + g_eg)/(w - g_eg) * kappa_S w_c / (4 N g_s^2)
//! ```
//!
//! with pump rate `w`, relaxation rate `g_eg`, collective spin-mode decay
//! `kappa_S`, cavity angular frequency `w_c`, spin count `N` and single
//! spin-photon coupling `g_s`. All rates and frequencies are in rad/s here;
//! unit conversion from Hz is the CLI's job.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ThresholdError {
    #[error("no inversion: pump rate {pump} must exceed the relaxation rate {relaxation} (rad/s)")]
    NoInversion { pump: f64, relaxation: f64 },
    #[error("invalid threshold parameters: {0}")]
    InvalidParams(String),
    #[error("unknown sweep axis '{0}' (expected one of: pump_rate, relaxation_rate, spin_decay_rate, cavity_freq, spin_count, spin_photon_coupling)")]
    UnknownAxis(String),
}

/// The six quantities of the threshold condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaserParams {
    /// Pump rate w, s^-1.
    pub pump_rate: f64,
    /// Relaxation rate g_eg between the inverted sublevels, s^-1.
    pub relaxation_rate: f64,
    /// Decay rate of the spin collective mode (limited by T2*), s^-1.
    pub spin_decay_rate: f64,
    /// Cavity angular frequency w_c, rad/s.
    pub cavity_freq: f64,
    /// Number of participating spins N.
    pub spin_count: f64,
    /// Single spin-photon coupling g_s, rad/s (distinct from the electron
    /// g-factor).
    pub spin_photon_coupling: f64,
}

impl MaserParams {
    pub fn new(
        pump_rate: f64,
        relaxation_rate: f64,
        spin_decay_rate: f64,
        cavity_freq: f64,
        spin_count: f64,
        spin_photon_coupling: f64,
    ) -> Result<Self, ThresholdError> {
        let params = Self {
            pump_rate,
            relaxation_rate,
            spin_decay_rate,
            cavity_freq,
            spin_count,
            spin_photon_coupling,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<(), ThresholdError> {
        for (name, v) in [
            ("pump_rate", self.pump_rate),
            ("relaxation_rate", self.relaxation_rate),
            ("spin_decay_rate", self.spin_decay_rate),
            ("cavity_freq", self.cavity_freq),
            ("spin_count", self.spin_count),
            ("spin_photon_coupling", self.spin_photon_coupling),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ThresholdError::InvalidParams(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Minimum cavity quality factor for self-sustained emission.
pub fn threshold_q(params: &MaserParams) -> Result<f64, ThresholdError> {
    params.validate()?;
    if params.pump_rate <= params.relaxation_rate {
        return Err(ThresholdError::NoInversion {
            pump: params.pump_rate,
            relaxation: params.relaxation_rate,
        });
    }
    let prefactor =
        (params.pump_rate + params.relaxation_rate) / (params.pump_rate - params.relaxation_rate);
    let g2 = params.spin_photon_coupling * params.spin_photon_coupling;
    Ok(prefactor * params.spin_decay_rate * params.cavity_freq / (4.0 * params.spin_count * g2))
}

/// Threshold verdict for an actual cavity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MasingMargin {
    pub q_min: f64,
    /// `q_actual / q_min`; above 1 the threshold condition is satisfied.
    pub margin: f64,
    pub above_threshold: bool,
}

pub fn masing_margin(q_actual: f64, params: &MaserParams) -> Result<MasingMargin, ThresholdError> {
    if !(q_actual > 0.0) {
        return Err(ThresholdError::InvalidParams(format!(
            "q_actual must be positive, got {q_actual}"
        )));
    }
    let q_min = threshold_q(params)?;
    let margin = q_actual / q_min;
    Ok(MasingMargin { q_min, margin, above_threshold: margin >= 1.0 })
}

/// Sweepable parameter axes, named like the `MaserParams` fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    PumpRate,
    RelaxationRate,
    SpinDecayRate,
    CavityFreq,
    SpinCount,
    SpinPhotonCoupling,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self, ThresholdError> {
        match name {
            "pump_rate" => Ok(Self::PumpRate),
            "relaxation_rate" => Ok(Self::RelaxationRate),
            "spin_decay_rate" => Ok(Self::SpinDecayRate),
            "cavity_freq" => Ok(Self::CavityFreq),
            "spin_count" => Ok(Self::SpinCount),
            "spin_photon_coupling" => Ok(Self::SpinPhotonCoupling),
            other => Err(ThresholdError::UnknownAxis(other.to_string())),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::PumpRate => "pump_rate",
            Self::RelaxationRate => "relaxation_rate",
            Self::SpinDecayRate => "spin_decay_rate",
            Self::CavityFreq => "cavity_freq",
            Self::SpinCount => "spin_count",
            Self::SpinPhotonCoupling => "spin_photon_coupling",
        }
    }

    fn apply(&self, base: &MaserParams, value: f64) -> MaserParams {
        let mut p = *base;
        match self {
            Self::PumpRate => p.pump_rate = value,
            Self::RelaxationRate => p.relaxation_rate = value,
            Self::SpinDecayRate => p.spin_decay_rate = value,
            Self::CavityFreq => p.cavity_freq = value,
            Self::SpinCount => p.spin_count = value,
            Self::SpinPhotonCoupling => p.spin_photon_coupling = value,
        }
        p
    }
}

/// One sweep row; rows without inversion carry no threshold instead of being
/// dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub q_min: Option<f64>,
    pub status: SweepStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStatus {
    Ok,
    NoInversion,
}

impl SweepStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::NoInversion => "no-inversion",
        }
    }
}

/// Threshold Q along one parameter axis, rows in input order.
pub fn threshold_sweep(
    base: &MaserParams,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>, ThresholdError> {
    values
        .iter()
        .map(|&value| {
            let params = axis.apply(base, value);
            params.validate()?;
            match threshold_q(&params) {
                Ok(q_min) => Ok(SweepRow { axis_value: value, q_min: Some(q_min), status: SweepStatus::Ok }),
                Err(ThresholdError::NoInversion { .. }) => Ok(SweepRow {
                    axis_value: value,
                    q_min: None,
                    status: SweepStatus::NoInversion,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base_params() -> MaserParams {
        MaserParams::new(
            3.0e3,            // pump, s^-1
            1.0e3,            // relaxation, s^-1
            2.0 * std::f64::consts::PI * 1.0e6, // collective decay, s^-1
            2.0 * std::f64::consts::PI * 9.3e9, // cavity, rad/s
            7.8e13,
            0.3,
        )
        .unwrap()
    }

    #[test]
    fn strong_pumping_limit_reaches_the_prefactor_free_value() {
        let mut p = base_params();
        p.pump_rate = 1e12;
        let limit =
            p.spin_decay_rate * p.cavity_freq / (4.0 * p.spin_count * p.spin_photon_coupling.powi(2));
        let q = threshold_q(&p).unwrap();
        assert_relative_eq!(q, limit, max_relative = 1e-8);
    }

    #[test]
    fn pump_at_three_relaxations_doubles_the_limit() {
        let p = base_params(); // pump = 3 relaxation by construction
        let limit =
            p.spin_decay_rate * p.cavity_freq / (4.0 * p.spin_count * p.spin_photon_coupling.powi(2));
        assert_relative_eq!(threshold_q(&p).unwrap(), 2.0 * limit, max_relative = 1e-12);
    }

    #[test]
    fn hand_evaluated_formula_cross_check() {
        let p = base_params();
        let expected = ((p.pump_rate + p.relaxation_rate) / (p.pump_rate - p.relaxation_rate))
            * p.spin_decay_rate
            * p.cavity_freq
            / (4.0 * p.spin_count * p.spin_photon_coupling * p.spin_photon_coupling);
        assert_relative_eq!(threshold_q(&p).unwrap(), expected, max_relative = 1e-14);
    }

    #[test]
    fn no_inversion_is_an_error() {
        let mut p = base_params();
        p.pump_rate = p.relaxation_rate;
        assert!(matches!(threshold_q(&p), Err(ThresholdError::NoInversion { .. })));
        p.pump_rate = 0.5 * p.relaxation_rate;
        assert!(matches!(threshold_q(&p), Err(ThresholdError::NoInversion { .. })));
    }

    #[test]
    fn margin_is_one_at_threshold_and_homogeneous() {
        let p = base_params();
        let q_min = threshold_q(&p).unwrap();
        let at_threshold = masing_margin(q_min, &p).unwrap();
        assert_relative_eq!(at_threshold.margin, 1.0, epsilon = 1e-12);
        assert!(at_threshold.above_threshold);

        let doubled = masing_margin(2.0 * q_min, &p).unwrap();
        assert_relative_eq!(doubled.margin, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn measured_cavity_margin_scenario() {
        // parameters arranged for a threshold of 17000; a cavity at 84000
        // then sits at margin 84/17
        let mut p = base_params();
        let q_target = 17000.0;
        let raw = threshold_q(&p).unwrap();
        p.spin_photon_coupling *= (raw / q_target).sqrt();
        assert_relative_eq!(threshold_q(&p).unwrap(), q_target, max_relative = 1e-10);

        let m = masing_margin(84000.0, &p).unwrap();
        assert!((m.margin - 4.94).abs() < 0.01, "margin {}", m.margin);
        assert!(m.above_threshold);
    }

    #[test]
    fn collective_decay_and_spin_count_enter_as_a_ratio() {
        let p = base_params();
        let q = threshold_q(&p).unwrap();
        for c in [0.1, 3.0, 1e4] {
            let mut scaled = p;
            scaled.spin_decay_rate *= c;
            scaled.spin_count *= c;
            assert_relative_eq!(threshold_q(&scaled).unwrap(), q, max_relative = 1e-12);
        }
    }

    #[test]
    fn common_rate_rescaling_leaves_the_prefactor_unchanged() {
        let p = base_params();
        let q = threshold_q(&p).unwrap();
        for c in [0.5, 7.0] {
            let mut scaled = p;
            scaled.pump_rate *= c;
            scaled.relaxation_rate *= c;
            assert_relative_eq!(threshold_q(&scaled).unwrap(), q, max_relative = 1e-12);
        }
    }

    #[test]
    fn sweep_monotonicity_in_spin_count_and_decay() {
        let p = base_params();
        let counts: Vec<f64> = (1..8).map(|i| 1e13 * i as f64).collect();
        let rows = threshold_sweep(&p, SweepAxis::SpinCount, &counts).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].q_min.unwrap() < w[0].q_min.unwrap());
        }

        let decays: Vec<f64> = (1..8).map(|i| 1e6 * i as f64).collect();
        let rows = threshold_sweep(&p, SweepAxis::SpinDecayRate, &decays).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].q_min.unwrap() > w[0].q_min.unwrap());
        }
    }

    #[test]
    fn sweep_diverges_towards_the_inversion_pole() {
        let p = base_params();
        let pumps = [4.0e3, 2.0e3, 1.5e3, 1.1e3, 1.01e3, 1.0e3, 0.9e3];
        let rows = threshold_sweep(&p, SweepAxis::PumpRate, &pumps).unwrap();
        let mut last_q = 0.0;
        for row in &rows[..5] {
            let q = row.q_min.unwrap();
            assert!(q > last_q, "threshold must grow towards the pole");
            last_q = q;
        }
        assert_eq!(rows[5].status, SweepStatus::NoInversion);
        assert_eq!(rows[5].q_min, None);
        assert_eq!(rows[6].status, SweepStatus::NoInversion);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!(SweepAxis::parse("spin_count").unwrap(), SweepAxis::SpinCount);
        assert!(matches!(
            SweepAxis::parse("bogus"),
            Err(ThresholdError::UnknownAxis(_))
        ));
    }

    #[test]
    fn invalid_substituted_value_rejected() {
        let p = base_params();
        assert!(threshold_sweep(&p, SweepAxis::SpinCount, &[1e13, -1.0]).is_err());
    }
}
