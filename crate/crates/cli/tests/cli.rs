//! End-to-end behaviour of the binary: exit codes, error wording, report
//! contents, pipeline identity.

use std::path::Path;
use std::process::{Command, Output};

use sicmaser::report::parse_report;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sicmaser"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to spawn sicmaser")
}

fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn superradiance_with_default_counts_reports_the_squared_law() {
    let out = run(&["superradiance", "--i-plus", "13.64", "--i-hf", "1.0"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report = parse_report(&stdout_of(&out));
    let k: f64 = report["exponent_k"].parse().unwrap();
    assert!((k - 2.1458).abs() < 1e-3, "k = {k}");
    let n_ratio: f64 = report["number_ratio"].parse().unwrap();
    assert!((n_ratio - 3.38).abs() < 0.005);
}

#[test]
fn unknown_config_key_exits_2_with_a_suggestion() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(&conf, "zfs_d = 35\n");
    let out = run(&["threshold", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("zfs_d_mhz"), "stderr: {err}");
}

#[test]
fn synth_without_hyperfine_names_the_missing_key() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(&conf, "zfs_d_mhz = 35\n");
    let out = run(&[
        "synth",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("hyperfine_a_mt"));
}

#[test]
fn threshold_without_inversion_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(
        &conf,
        "pump_rate_hz = 1000\nrelaxation_rate_hz = 2000\nkappa_s_hz = 1e6\nspin_photon_coupling_hz = 0.05\n",
    );
    let out = run(&["threshold", "--config", conf.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("no inversion"));
}

#[test]
fn malformed_and_shuffled_traces_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(&conf, "hyperfine_a_mt = 0.9\n");

    let shuffled = dir.path().join("shuffled.csv");
    write(&shuffled, "field_mT,signal\n330.0,0.1\n331.0,0.2\n330.5,0.3\n");
    let out = run(&[
        "fit",
        "--config",
        conf.to_str().unwrap(),
        "--trace",
        shuffled.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("not strictly increasing"));

    let headerless = dir.path().join("headerless.csv");
    write(&headerless, "330.0,0.1\n331.0,0.2\n");
    let out = run(&[
        "fit",
        "--config",
        conf.to_str().unwrap(),
        "--trace",
        headerless.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("missing header"));
}

#[test]
fn synth_then_fit_recovers_the_configured_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(
        &conf,
        "zfs_d_mhz = 35\nhyperfine_a_mt = 0.9\nline_hwhm_mt = 0.039\ndelta_p_minus = 0.03\ndelta_p_plus = -0.03\n",
    );
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "synth",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));

    let out = run(&[
        "fit",
        "--config",
        conf.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report = parse_report(&stdout_of(&out));

    let hwhm: f64 = report["hwhm_central_mt"].parse().unwrap();
    assert!((hwhm - 0.039).abs() / 0.039 < 1e-3, "hwhm {hwhm}");
    let offset: f64 = report["satellite_offset_mt"].parse().unwrap();
    assert!((offset - 0.9).abs() < 1e-4, "offset {offset}");
    // central amplitude = delta_p_minus * p_central
    let amplitude: f64 = report["amplitude"].parse().unwrap();
    let expected = 0.03 * 0.56120;
    assert!((amplitude - expected).abs() / expected < 1e-3, "amplitude {amplitude}");
    // the window centred on the low-field transition at 9.3 GHz, g = 2.0023
    let center: f64 = report["center_mt"].parse().unwrap();
    assert!((center - 329.35).abs() < 0.05, "center {center}");
}

#[test]
fn fit_saturation_round_trips_known_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sat.csv");
    let truth = sicmaser::SaturationParams::new(0.031, 12.0, 2.0).unwrap();
    let mut text = String::from("power_mw,delta_p\n");
    for i in 0..10 {
        let p = 1.0 + 5.0 * i as f64;
        let dp = sicmaser::saturation_delta_p(&truth, p).unwrap();
        text.push_str(&format!("{p},{dp:.17e}\n"));
    }
    write(&data, &text);

    let out = run(&["fit-saturation", "--data", data.to_str().unwrap()]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report = parse_report(&stdout_of(&out));
    let dp_max: f64 = report["delta_p_max"].parse().unwrap();
    let p0: f64 = report["p0_mw"].parse().unwrap();
    let p_alpha: f64 = report["p_alpha_mw"].parse().unwrap();
    assert!((dp_max - 0.031).abs() / 0.031 < 1e-6);
    assert!((p0 - 12.0).abs() / 12.0 < 1e-5);
    assert!((p_alpha - 2.0).abs() / 2.0 < 1e-5);
}

#[test]
fn sweep_threshold_marks_no_inversion_rows() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(
        &conf,
        "pump_rate_hz = 3000\nrelaxation_rate_hz = 1000\nkappa_s_hz = 1e6\nspin_photon_coupling_hz = 0.05\n",
    );
    let csv = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep-threshold",
        "--config",
        conf.to_str().unwrap(),
        "--axis",
        "pump_rate",
        "--values",
        "4000,2000,500",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis_value,q_min,status");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].ends_with(",ok"));
    assert!(lines[2].ends_with(",ok"));
    assert!(lines[3].ends_with(",,no-inversion"));
}

#[test]
fn unknown_sweep_axis_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(
        &conf,
        "pump_rate_hz = 3000\nrelaxation_rate_hz = 1000\nkappa_s_hz = 1e6\nspin_photon_coupling_hz = 0.05\n",
    );
    let out = run(&[
        "sweep-threshold",
        "--config",
        conf.to_str().unwrap(),
        "--axis",
        "bogus",
        "--values",
        "1,2",
        "--out",
        dir.path().join("x.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown sweep axis"));
}

#[test]
fn missing_config_file_exits_2() {
    let out = run(&["threshold", "--config", "/nonexistent/run.conf"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unreachable_resonance_exits_3() {
    // a 1 MHz quantum never matches any gap inside the field bracket
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    write(&conf, "mw_frequency_ghz = 0.001\n");
    let out = run(&[
        "sweep-angle",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.path().join("s.csv").to_str().unwrap(),
        "--theta-step-deg",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).contains("no resonance"));
}
