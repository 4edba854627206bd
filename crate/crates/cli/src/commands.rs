//! Command implementations. Machine-readable results go to stdout or the
//! requested files; everything else (logs, errors) goes to stderr.

use std::fmt::Write as _;
use std::path::Path;

use sicmaser::report::Report;
use sicmaser::spectrum::PP_WIDTH_FACTOR;
use sicmaser::{
    angular_delta_p, boltzmann_delta_p, fit_line_group, isotope_site_probabilities, load_config,
    masing_margin, read_trace, read_xy_csv, resonance_fields_exact, superradiance_exponent,
    synthesize_spectrum, threshold_sweep, write_trace, FieldGrid, LineGroupFit, NoiseSpec,
    Orientation, Polarization, RunConfig, SpinSystem, SweepAxis, TransitionLabel, WeightMode,
    WeightModeConfig,
};

use crate::{
    CliError, FitArgs, FitSaturationArgs, SuperradianceArgs, SweepAngleArgs, SweepThresholdArgs,
    SynthArgs, ThresholdArgs,
};

fn fmt_f64(v: f64) -> String {
    format!("{v:.17e}")
}

fn weight_mode_for(system: &SpinSystem, mode: WeightModeConfig) -> Result<WeightMode, CliError> {
    Ok(match mode {
        WeightModeConfig::Free => WeightMode::Free,
        WeightModeConfig::AbundanceConstrained => {
            let probs =
                isotope_site_probabilities(system.abundance_i_half, system.n_neighbor_sites)?;
            WeightMode::AbundanceConstrained {
                satellite_to_central: probs.satellite_to_central_ratio(),
            }
        }
    })
}

fn emit_report(report: &Report, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => report.write(path).map_err(CliError::Io),
        None => {
            print!("{}", report.render());
            Ok(())
        }
    }
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let system = config.spin_system_with_hyperfine()?;
    let conditions = config.conditions()?;

    let delta_p_b = boltzmann_delta_p(config.mw_frequency_ghz, config.temperature_k)?;
    let polarization = Polarization {
        delta_p_minus: config.delta_p_minus,
        delta_p_zero: delta_p_b,
        delta_p_plus: config.delta_p_plus,
    };

    let gamma = config.line_hwhm_mt;
    let step = config.field_step_mt.unwrap_or_else(|| {
        let v = gamma / 25.0;
        log::info!("config: field_step_mt not set, using line_hwhm_mt/25 = {v} mT");
        v
    });
    let grid = match (config.field_start_mt, config.field_stop_mt) {
        (Some(start), Some(stop)) => FieldGrid::new(start, stop, step)?,
        _ => {
            let set = resonance_fields_exact(&system, config.mw_frequency_ghz, conditions.orientation)?;
            let centers: Vec<f64> = set
                .transitions
                .iter()
                .flat_map(|t| t.sub_lines.iter().map(move |s| t.resonance_field_mt + s.offset_mt))
                .collect();
            let lo = centers.iter().cloned().fold(f64::MAX, f64::min) - 10.0 * gamma;
            let hi = centers.iter().cloned().fold(f64::MIN, f64::max) + 10.0 * gamma;
            log::info!("config: field grid not set, spanning [{lo}, {hi}] mT");
            FieldGrid::new(lo, hi, step)?
        }
    };

    let noise = match args.seed {
        Some(seed) if config.noise_rms > 0.0 => Some(NoiseSpec { rms: config.noise_rms, seed }),
        Some(_) => {
            log::info!("seed given but noise_rms is 0; synthesizing a clean trace");
            None
        }
        None => None,
    };

    let trace = synthesize_spectrum(&system, &conditions, &grid, gamma, &polarization, noise)?;
    write_trace(&args.out, &trace)?;
    Ok(())
}

pub fn sweep_angle(args: &SweepAngleArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let system = config.spin_system()?;
    if !(args.theta_step_deg > 0.0) || !(args.theta_stop_deg >= args.theta_start_deg) {
        return Err(CliError::Usage(
            "need theta_start <= theta_stop and a positive theta step".into(),
        ));
    }

    let n = ((args.theta_stop_deg - args.theta_start_deg) / args.theta_step_deg + 1e-9).floor()
        as usize
        + 1;
    let mut out = String::from("theta_deg,delta_b_mt_exact,delta_b_mt_firstorder,delta_p\n");
    for k in 0..n {
        let theta_deg =
            (args.theta_start_deg + k as f64 * args.theta_step_deg).min(args.theta_stop_deg);
        let orient = Orientation::from_degrees(theta_deg)?;
        let set = resonance_fields_exact(&system, config.mw_frequency_ghz, orient)?;
        let first_order = sicmaser::splitting_first_order(&system, orient);
        let delta_p = angular_delta_p(config.delta_p_max, orient);
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(theta_deg),
            fmt_f64(set.delta_b_mt()),
            fmt_f64(first_order),
            fmt_f64(delta_p)
        );
    }
    std::fs::write(&args.out, out).map_err(CliError::Io)
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let system = config.spin_system_with_hyperfine()?;
    let trace = read_trace(&args.trace)?;

    let mw_frequency_ghz = trace.meta.mw_frequency_ghz.unwrap_or(config.mw_frequency_ghz);
    let orient = match trace.meta.theta_rad {
        Some(theta) => Orientation::from_radians(theta)?,
        None => config.orientation()?,
    };

    let a = system.hyperfine_a_mt;
    let window = match (
        args.window_min_mt.or(config.fit_window_min_mt),
        args.window_max_mt.or(config.fit_window_max_mt),
    ) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            let set = resonance_fields_exact(&system, mw_frequency_ghz, orient)?;
            let b_minus = set.transition(TransitionLabel::BMinus).resonance_field_mt;
            let margin = a + 8.0 * config.line_hwhm_mt;
            log::info!(
                "fit window not set, using the low-field group [{}, {}] mT",
                b_minus - margin,
                b_minus + margin
            );
            (b_minus - margin, b_minus + margin)
        }
    };

    let mode_config = match args.weight_mode.as_deref() {
        None => config.fit_weight_mode,
        Some("abundance_constrained") => WeightModeConfig::AbundanceConstrained,
        Some("free") => WeightModeConfig::Free,
        Some(other) => {
            return Err(CliError::Usage(format!(
                "--weight-mode expects 'abundance_constrained' or 'free', got '{other}'"
            )))
        }
    };
    let mode = weight_mode_for(&system, mode_config)?;

    let initial = LineGroupFit::guess_from_window(&trace, window, a, mode, config.noise_floor)?;
    let fit = fit_line_group(&trace, window, &initial, mode, &config.fit_options())?;

    let mut report = Report::new();
    report
        .comment("line-group fit report")
        .entry("status", "converged")
        .entry(
            "weight_mode",
            match mode_config {
                WeightModeConfig::AbundanceConstrained => "abundance_constrained",
                WeightModeConfig::Free => "free",
            },
        )
        .entry_f64("window_min_mt", window.0)
        .entry_f64("window_max_mt", window.1)
        .entry_f64("center_mt", fit.center_mt)
        .entry_f64("hwhm_central_mt", fit.hwhm_central_mt)
        .entry_f64("hwhm_satellite_mt", fit.hwhm_satellite_mt)
        .entry_f64("amplitude", fit.amplitude)
        .entry_f64("satellite_amplitude_low", fit.satellite_amplitude_low)
        .entry_f64("satellite_amplitude_high", fit.satellite_amplitude_high)
        .entry_f64("satellite_offset_mt", fit.satellite_offset_mt)
        .entry_f64("width_pp_mt", PP_WIDTH_FACTOR * fit.hwhm_central_mt)
        .entry_f64("residual_rms", fit.residual_rms)
        .entry("iterations", fit.iterations);
    let var_names: &[&str] = match mode {
        WeightMode::AbundanceConstrained { .. } => &[
            "var_center_mt",
            "var_hwhm_central_mt",
            "var_hwhm_satellite_mt",
            "var_amplitude",
            "var_satellite_offset_mt",
        ],
        WeightMode::Free => &[
            "var_center_mt",
            "var_hwhm_central_mt",
            "var_hwhm_satellite_mt",
            "var_amplitude",
            "var_satellite_amplitude_low",
            "var_satellite_amplitude_high",
            "var_satellite_offset_mt",
        ],
    };
    for (name, value) in var_names.iter().zip(&fit.covariance_diag) {
        report.entry_f64(name, *value);
    }
    emit_report(&report, args.out.as_deref())
}

pub fn fit_saturation(args: &FitSaturationArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let points = read_xy_csv(&args.data, "power_mw,delta_p")?;
    let initial = sicmaser::analysis::saturation_initial_guess(&points);
    let fit = sicmaser::fit_saturation(&points, &initial, &config.fit_options())?;

    let mut report = Report::new();
    report
        .comment("saturation fit report")
        .entry("status", "converged")
        .entry("n_points", points.len())
        .entry_f64("delta_p_max", fit.params.delta_p_max)
        .entry_f64("p0_mw", fit.params.p0_mw)
        .entry_f64("p_alpha_mw", fit.params.p_alpha_mw)
        .entry_f64("residual_rms", fit.residual_rms)
        .entry("iterations", fit.iterations)
        .entry_f64("var_delta_p_max", fit.covariance_diag[0])
        .entry_f64("var_p0_mw", fit.covariance_diag[1])
        .entry_f64("var_p_alpha_mw", fit.covariance_diag[2]);
    emit_report(&report, args.out.as_deref())
}

pub fn superradiance(args: &SuperradianceArgs) -> Result<(), CliError> {
    let config = match &args.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    let (n_plus, n_hf) = match (args.n_plus, args.n_hf) {
        (Some(p), Some(h)) => (p, h),
        (None, None) => {
            let probs =
                isotope_site_probabilities(config.abundance_29si, config.n_neighbor_sites)?;
            (probs.p_central, 0.5 * probs.p_one_satellite)
        }
        _ => {
            return Err(CliError::Usage(
                "--n-plus and --n-hf must be given together (or both omitted)".into(),
            ))
        }
    };
    let result = superradiance_exponent(args.i_plus, args.i_hf, n_plus, n_hf)?;

    let mut report = Report::new();
    report
        .comment("superradiance scaling")
        .entry_f64("intensity_ratio", result.intensity_ratio)
        .entry_f64("number_ratio", result.number_ratio)
        .entry_f64("exponent_k", result.exponent_k);
    emit_report(&report, None)
}

pub fn threshold(args: &ThresholdArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let params = config.maser_params()?;
    let q_actual = args.q_actual.unwrap_or(config.q_factor);
    let margin = masing_margin(q_actual, &params)?;

    let tau = 2.0 * std::f64::consts::PI;
    let mut report = Report::new();
    report.comment("maser threshold (rates given in Hz and rad/s)");
    for (name, value) in [
        ("pump_rate", params.pump_rate),
        ("relaxation_rate", params.relaxation_rate),
        ("kappa_s", params.spin_decay_rate),
        ("cavity_freq", params.cavity_freq),
        ("spin_photon_coupling", params.spin_photon_coupling),
    ] {
        report.entry_f64(&format!("{name}_hz"), value / tau);
        report.entry_f64(&format!("{name}_rad_per_s"), value);
    }
    report
        .entry_f64("spin_count", params.spin_count)
        .entry_f64("q_min", margin.q_min)
        .entry_f64("q_actual", q_actual)
        .entry_f64("margin", margin.margin)
        .entry("above_threshold", margin.above_threshold);
    emit_report(&report, None)
}

pub fn sweep_threshold(args: &SweepThresholdArgs) -> Result<(), CliError> {
    let config = load_config(&args.config)?;
    let base = config.maser_params()?;
    let axis = SweepAxis::parse(&args.axis)?;

    let mut input_values = Vec::new();
    for item in args.values.split(',') {
        let v: f64 = item.trim().parse().map_err(|_| {
            CliError::Usage(format!("--values: '{item}' is not a number"))
        })?;
        input_values.push(v);
    }
    if input_values.is_empty() {
        return Err(CliError::Usage("--values must list at least one value".into()));
    }

    // rate-like axes are given in Hz, like the config keys
    let tau = 2.0 * std::f64::consts::PI;
    let scale = match axis {
        SweepAxis::SpinCount => 1.0,
        _ => tau,
    };
    let internal: Vec<f64> = input_values.iter().map(|v| v * scale).collect();
    let rows = threshold_sweep(&base, axis, &internal)?;

    let mut out = String::from("axis_value,q_min,status\n");
    for (row, &given) in rows.iter().zip(&input_values) {
        let q_min = row.q_min.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(out, "{},{},{}", fmt_f64(given), q_min, row.status.as_str());
    }
    std::fs::write(&args.out, out).map_err(CliError::Io)
}
