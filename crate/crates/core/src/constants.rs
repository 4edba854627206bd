//! Physical constants and the internal unit system.
//!
//! Everything in this crate works in "EPR-native" units: magnetic fields in
//! mT, energies and frequencies in MHz, angles in radians, temperatures in K.
//! The pivot between field and frequency is `mu_B/h`, which is numerically
//! the same in GHz/T and MHz/mT.

/// Planck constant, J s (exact, SI 2019).
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Boltzmann constant, J/K (exact, SI 2019).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Bohr magneton, J/T (CODATA 2022).
pub const BOHR_MAGNETON: f64 = 9.274_010_065_7e-24;

/// mu_B/h in MHz per mT (equivalently GHz/T), about 13.996.
pub const MU_B_OVER_H_MHZ_PER_MT: f64 = BOHR_MAGNETON / PLANCK * 1e-9;

/// Free-electron g-factor used as the default when none is configured.
pub const DEFAULT_G_FACTOR: f64 = 2.0023;
