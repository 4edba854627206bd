//! Flat `key = value` run configuration.
//!
//! Keys carry their unit as a suffix (`zfs_d_mhz`, `theta_deg`,
//! `field_start_mt`) so configs stay greppable and diffable. Unknown keys are
//! rejected with a suggestion; absent keys fall back to logged defaults.
//! A few keys have no defensible default (the hyperfine offset and the
//! threshold rates) and are only required by the commands that use them.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::analysis::FitOptions;
use crate::constants::DEFAULT_G_FACTOR;
use crate::spectrum::ExperimentConditions;
use crate::spin::{Orientation, SpinModelError, SpinSystem};
use crate::threshold::MaserParams;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config line {line}: expected 'key = value', got '{text}'")]
    Parse { line: usize, text: String },
    #[error("config line {line}: unknown key '{key}'{suggestion}")]
    UnknownKey {
        line: usize,
        key: String,
        suggestion: String,
    },
    #[error("config line {line}: duplicate key '{key}'")]
    DuplicateKey { line: usize, key: String },
    #[error("config line {line}: key '{key}' expects {expected}, got '{value}'")]
    InvalidValue {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing required key '{key}' ({reason})")]
    MissingKey { key: String, reason: &'static str },
    #[error("config: {0}")]
    Invalid(String),
}

impl From<SpinModelError> for ConfigError {
    fn from(e: SpinModelError) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

const KNOWN_KEYS: &[&str] = &[
    // spin system
    "spin",
    "g_factor",
    "zfs_d_mhz",
    "hyperfine_a_mt",
    "abundance_29si",
    "n_neighbor_sites",
    // conditions
    "mw_frequency_ghz",
    "theta_deg",
    "temperature_k",
    "pump_power_mw",
    "q_factor",
    // grid and synthesis
    "field_start_mt",
    "field_stop_mt",
    "field_step_mt",
    "line_hwhm_mt",
    "delta_p_minus",
    "delta_p_plus",
    "delta_p_max",
    "noise_rms",
    // fitting
    "fit_weight_mode",
    "fit_window_min_mt",
    "fit_window_max_mt",
    "fit_max_iter",
    "fit_rel_tol",
    "noise_floor",
    // threshold
    "pump_rate_hz",
    "relaxation_rate_hz",
    "kappa_s_hz",
    "spin_photon_coupling_hz",
    "cavity_freq_hz",
    "spin_count",
];

/// Satellite-amplitude coupling requested for fits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightModeConfig {
    AbundanceConstrained,
    Free,
}

/// Fully validated run configuration with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spin: f64,
    pub g_factor: f64,
    pub zfs_d_mhz: f64,
    pub hyperfine_a_mt: Option<f64>,
    pub abundance_29si: f64,
    pub n_neighbor_sites: u32,

    pub mw_frequency_ghz: f64,
    pub theta_deg: f64,
    pub temperature_k: f64,
    pub pump_power_mw: f64,
    pub q_factor: f64,

    pub field_start_mt: Option<f64>,
    pub field_stop_mt: Option<f64>,
    pub field_step_mt: Option<f64>,
    pub line_hwhm_mt: f64,
    pub delta_p_minus: f64,
    pub delta_p_plus: f64,
    pub delta_p_max: f64,
    pub noise_rms: f64,

    pub fit_weight_mode: WeightModeConfig,
    pub fit_window_min_mt: Option<f64>,
    pub fit_window_max_mt: Option<f64>,
    pub fit_max_iter: usize,
    pub fit_rel_tol: f64,
    pub noise_floor: f64,

    pub pump_rate_hz: Option<f64>,
    pub relaxation_rate_hz: Option<f64>,
    pub kappa_s_hz: Option<f64>,
    pub spin_photon_coupling_hz: Option<f64>,
    pub cavity_freq_hz: Option<f64>,
    pub spin_count: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spin: 1.5,
            g_factor: DEFAULT_G_FACTOR,
            zfs_d_mhz: 35.0,
            hyperfine_a_mt: None,
            abundance_29si: 0.047,
            n_neighbor_sites: 12,
            mw_frequency_ghz: 9.3,
            theta_deg: 0.0,
            temperature_k: 300.0,
            pump_power_mw: 0.0,
            q_factor: 17000.0,
            field_start_mt: None,
            field_stop_mt: None,
            field_step_mt: None,
            line_hwhm_mt: 0.039,
            delta_p_minus: 0.03,
            delta_p_plus: -0.03,
            delta_p_max: 0.03,
            noise_rms: 0.0,
            fit_weight_mode: WeightModeConfig::AbundanceConstrained,
            fit_window_min_mt: None,
            fit_window_max_mt: None,
            fit_max_iter: 500,
            fit_rel_tol: 1e-8,
            noise_floor: 0.0,
            pump_rate_hz: None,
            relaxation_rate_hz: None,
            kappa_s_hz: None,
            spin_photon_coupling_hz: None,
            cavity_freq_hz: None,
            spin_count: 7.8e13,
        }
    }
}

impl RunConfig {
    /// Field orientation in internal radians.
    pub fn orientation(&self) -> Result<Orientation, ConfigError> {
        Ok(Orientation::from_degrees(self.theta_deg)?)
    }

    /// Spin system with the hyperfine offset defaulted to zero when absent
    /// (sufficient for splitting sweeps, which never look at satellites).
    pub fn spin_system(&self) -> Result<SpinSystem, ConfigError> {
        let a = self.hyperfine_a_mt.unwrap_or_else(|| {
            log::info!("config: hyperfine_a_mt not set, satellites collapse onto the centre (0 mT)");
            0.0
        });
        Ok(SpinSystem::new(
            self.spin,
            self.g_factor,
            self.zfs_d_mhz,
            a,
            self.abundance_29si,
            self.n_neighbor_sites,
        )?)
    }

    /// Spin system for commands that resolve satellites; the hyperfine
    /// offset has no defensible default and must be configured.
    pub fn spin_system_with_hyperfine(&self) -> Result<SpinSystem, ConfigError> {
        let a = self.hyperfine_a_mt.ok_or(ConfigError::MissingKey {
            key: "hyperfine_a_mt".into(),
            reason: "the hyperfine satellite offset has no default",
        })?;
        Ok(SpinSystem::new(
            self.spin,
            self.g_factor,
            self.zfs_d_mhz,
            a,
            self.abundance_29si,
            self.n_neighbor_sites,
        )?)
    }

    pub fn conditions(&self) -> Result<ExperimentConditions, ConfigError> {
        Ok(ExperimentConditions {
            mw_frequency_ghz: self.mw_frequency_ghz,
            orientation: self.orientation()?,
            temperature_k: self.temperature_k,
            pump_power_mw: self.pump_power_mw,
            q_factor: self.q_factor,
        })
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions { max_iter: self.fit_max_iter, rel_tol: self.fit_rel_tol }
    }

    /// Threshold parameters converted from the configured Hz readings to
    /// the internal rad/s convention.
    pub fn maser_params(&self) -> Result<MaserParams, ConfigError> {
        let tau = 2.0 * std::f64::consts::PI;
        let required = |v: Option<f64>, key: &str| {
            v.ok_or(ConfigError::MissingKey {
                key: key.into(),
                reason: "no defensible default for threshold rates and couplings",
            })
        };
        let pump = required(self.pump_rate_hz, "pump_rate_hz")?;
        let relaxation = required(self.relaxation_rate_hz, "relaxation_rate_hz")?;
        let kappa = required(self.kappa_s_hz, "kappa_s_hz")?;
        let coupling = required(self.spin_photon_coupling_hz, "spin_photon_coupling_hz")?;
        let cavity = self.cavity_freq_hz.unwrap_or_else(|| {
            let v = self.mw_frequency_ghz * 1e9;
            log::info!("config: cavity_freq_hz not set, using mw_frequency_ghz ({v} Hz)");
            v
        });
        MaserParams::new(
            tau * pump,
            tau * relaxation,
            tau * kappa,
            tau * cavity,
            self.spin_count,
            tau * coupling,
        )
        .map_err(|e| ConfigError::Invalid(e.to_string()))
    }

}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
            line: line_no,
            text: line.to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey {
                line: line_no,
                key: key.clone(),
                suggestion: suggest(&key)
                    .map(|s| format!(" (did you mean '{s}'?)"))
                    .unwrap_or_default(),
            });
        }
        if seen.insert(key.clone(), (line_no, value)).is_some() {
            return Err(ConfigError::DuplicateKey { line: line_no, key });
        }
    }

    let mut config = RunConfig::default();
    let defaults = RunConfig::default();

    let take_f64 = |seen: &mut BTreeMap<String, (usize, String)>,
                    key: &str|
     -> Result<Option<f64>, ConfigError> {
        match seen.remove(key) {
            None => Ok(None),
            Some((line, value)) => value.parse::<f64>().map(Some).map_err(|_| {
                ConfigError::InvalidValue { line, key: key.into(), expected: "a number", value }
            }),
        }
    };

    macro_rules! f64_field {
        ($field:ident, $key:literal) => {
            match take_f64(&mut seen, $key)? {
                Some(v) => config.$field = v,
                None => log::info!("config: {} not set, using default {}", $key, defaults.$field),
            }
        };
    }
    macro_rules! opt_f64_field {
        ($field:ident, $key:literal) => {
            if let Some(v) = take_f64(&mut seen, $key)? {
                config.$field = Some(v);
            }
        };
    }

    f64_field!(spin, "spin");
    f64_field!(g_factor, "g_factor");
    f64_field!(zfs_d_mhz, "zfs_d_mhz");
    opt_f64_field!(hyperfine_a_mt, "hyperfine_a_mt");
    f64_field!(abundance_29si, "abundance_29si");
    f64_field!(mw_frequency_ghz, "mw_frequency_ghz");
    f64_field!(theta_deg, "theta_deg");
    f64_field!(temperature_k, "temperature_k");
    f64_field!(pump_power_mw, "pump_power_mw");
    f64_field!(q_factor, "q_factor");
    opt_f64_field!(field_start_mt, "field_start_mt");
    opt_f64_field!(field_stop_mt, "field_stop_mt");
    opt_f64_field!(field_step_mt, "field_step_mt");
    f64_field!(line_hwhm_mt, "line_hwhm_mt");
    f64_field!(delta_p_minus, "delta_p_minus");
    f64_field!(delta_p_plus, "delta_p_plus");
    f64_field!(delta_p_max, "delta_p_max");
    f64_field!(noise_rms, "noise_rms");
    opt_f64_field!(fit_window_min_mt, "fit_window_min_mt");
    opt_f64_field!(fit_window_max_mt, "fit_window_max_mt");
    f64_field!(fit_rel_tol, "fit_rel_tol");
    f64_field!(noise_floor, "noise_floor");
    opt_f64_field!(pump_rate_hz, "pump_rate_hz");
    opt_f64_field!(relaxation_rate_hz, "relaxation_rate_hz");
    opt_f64_field!(kappa_s_hz, "kappa_s_hz");
    opt_f64_field!(spin_photon_coupling_hz, "spin_photon_coupling_hz");
    opt_f64_field!(cavity_freq_hz, "cavity_freq_hz");
    f64_field!(spin_count, "spin_count");

    match seen.remove("n_neighbor_sites") {
        Some((line, value)) => {
            config.n_neighbor_sites = value.parse::<u32>().map_err(|_| {
                ConfigError::InvalidValue {
                    line,
                    key: "n_neighbor_sites".into(),
                    expected: "a positive integer",
                    value,
                }
            })?;
        }
        None => log::info!(
            "config: n_neighbor_sites not set, using default {}",
            defaults.n_neighbor_sites
        ),
    }
    match seen.remove("fit_max_iter") {
        Some((line, value)) => {
            config.fit_max_iter = value.parse::<usize>().map_err(|_| {
                ConfigError::InvalidValue {
                    line,
                    key: "fit_max_iter".into(),
                    expected: "a positive integer",
                    value,
                }
            })?;
        }
        None => {
            log::info!("config: fit_max_iter not set, using default {}", defaults.fit_max_iter)
        }
    }
    match seen.remove("fit_weight_mode") {
        Some((line, value)) => {
            config.fit_weight_mode = match value.as_str() {
                "abundance_constrained" => WeightModeConfig::AbundanceConstrained,
                "free" => WeightModeConfig::Free,
                _ => {
                    return Err(ConfigError::InvalidValue {
                        line,
                        key: "fit_weight_mode".into(),
                        expected: "'abundance_constrained' or 'free'",
                        value,
                    })
                }
            };
        }
        None => log::info!("config: fit_weight_mode not set, using default abundance_constrained"),
    }

    // immediate sanity checks so downstream errors name the key
    if !(config.mw_frequency_ghz > 0.0) {
        return Err(ConfigError::Invalid("mw_frequency_ghz must be positive".into()));
    }
    if !(config.temperature_k > 0.0) {
        return Err(ConfigError::Invalid("temperature_k must be positive".into()));
    }
    if !(config.line_hwhm_mt > 0.0) {
        return Err(ConfigError::Invalid("line_hwhm_mt must be positive".into()));
    }
    config.spin_system()?; // validates spin, g, D, abundance, sites

    Ok(config)
}

/// Closest known key for a typo, by prefix or edit distance.
fn suggest(unknown: &str) -> Option<&'static str> {
    let mut best: Option<(&'static str, usize)> = None;
    for candidate in KNOWN_KEYS {
        if candidate.starts_with(unknown) || unknown.starts_with(candidate) {
            return Some(candidate);
        }
        let d = edit_distance(unknown, candidate);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((candidate, d));
        }
    }
    best.filter(|&(_, d)| d <= 4).map(|(k, _)| k)
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_defaults_everything_else() {
        let config = parse_config("zfs_d_mhz = 35\n").unwrap();
        assert_eq!(config.zfs_d_mhz, 35.0);
        assert_eq!(config.g_factor, 2.0023);
        assert_eq!(config.mw_frequency_ghz, 9.3);
        assert_eq!(config.n_neighbor_sites, 12);
        assert_eq!(config.hyperfine_a_mt, None);
    }

    #[test]
    fn theta_converts_to_radians() {
        let config = parse_config("theta_deg = 54.7356\n").unwrap();
        let orient = config.orientation().unwrap();
        assert!((orient.radians() - 0.955317).abs() < 1e-5);
    }

    #[test]
    fn unknown_key_suggests_the_unit_suffixed_name() {
        let err = parse_config("zfs_d = 35\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { key, suggestion, .. } => {
                assert_eq!(key, "zfs_d");
                assert!(suggestion.contains("zfs_d_mhz"), "suggestion: {suggestion}");
            }
            other => panic!("expected unknown-key error, got {other}"),
        }
    }

    #[test]
    fn parse_and_value_errors_carry_line_numbers() {
        let err = parse_config("# fine\nzfs_d_mhz 35\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));

        let err = parse_config("zfs_d_mhz = thirty-five\n").unwrap_err();
        assert!(matches!(err, ConfigError::InvalidValue { line: 1, .. }));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = parse_config("zfs_d_mhz = 35\nzfs_d_mhz = 36\n").unwrap_err();
        assert!(matches!(err, ConfigError::DuplicateKey { line: 2, .. }));
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "\n# spin system\n  zfs_d_mhz = 17.5  \n\n# conditions\ntheta_deg = 90\n";
        let config = parse_config(text).unwrap();
        assert_eq!(config.zfs_d_mhz, 17.5);
        assert_eq!(config.theta_deg, 90.0);
    }

    #[test]
    fn hyperfine_required_only_where_satellites_matter() {
        let config = parse_config("zfs_d_mhz = 35\n").unwrap();
        assert!(config.spin_system().is_ok());
        assert!(matches!(
            config.spin_system_with_hyperfine(),
            Err(ConfigError::MissingKey { .. })
        ));
        let with = parse_config("hyperfine_a_mt = 0.2\n").unwrap();
        assert_eq!(with.spin_system_with_hyperfine().unwrap().hyperfine_a_mt, 0.2);
    }

    #[test]
    fn threshold_params_convert_hz_to_rad_per_s() {
        let text = "pump_rate_hz = 3000\nrelaxation_rate_hz = 1000\nkappa_s_hz = 1e6\nspin_photon_coupling_hz = 0.05\n";
        let config = parse_config(text).unwrap();
        let params = config.maser_params().unwrap();
        let tau = 2.0 * std::f64::consts::PI;
        assert_eq!(params.pump_rate, tau * 3000.0);
        assert_eq!(params.cavity_freq, tau * 9.3e9);
        assert_eq!(params.spin_count, 7.8e13);
    }

    #[test]
    fn missing_threshold_rates_named_in_error() {
        let config = parse_config("zfs_d_mhz = 35\n").unwrap();
        match config.maser_params() {
            Err(ConfigError::MissingKey { key, .. }) => assert_eq!(key, "pump_rate_hz"),
            other => panic!("expected missing-key error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_physical_values_rejected() {
        assert!(parse_config("temperature_k = -4\n").is_err());
        assert!(parse_config("spin = 1.3\n").is_err());
        assert!(parse_config("abundance_29si = 1.5\n").is_err());
    }
}
