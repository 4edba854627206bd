//! Shared scenario builders for the benchmark targets.

use sicmaser::{
    synthesize_spectrum, ExperimentConditions, FieldGrid, Orientation, Polarization, SpectrumTrace,
    SpinSystem,
};

pub fn v2_system() -> SpinSystem {
    SpinSystem::v2(0.9).unwrap()
}

pub fn room_temperature_conditions() -> ExperimentConditions {
    ExperimentConditions {
        mw_frequency_ghz: 9.3,
        orientation: Orientation::from_radians(0.0).unwrap(),
        temperature_k: 300.0,
        pump_power_mw: 50.0,
        q_factor: 17000.0,
    }
}

pub fn pumped_polarization() -> Polarization {
    Polarization {
        delta_p_minus: 0.03,
        delta_p_zero: 3.7e-4,
        delta_p_plus: -0.03,
    }
}

/// A clean three-transition trace on a half-width/25 grid.
pub fn standard_trace() -> SpectrumTrace {
    let grid = FieldGrid::new(326.0, 339.0, 0.039 / 25.0).unwrap();
    synthesize_spectrum(
        &v2_system(),
        &room_temperature_conditions(),
        &grid,
        0.039,
        &pumped_polarization(),
        None,
    )
    .unwrap()
}
