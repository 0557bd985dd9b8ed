//! End-to-end tests of the `cqed` binary: every subcommand, both output
//! formats, and the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cqed::synth;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cqed")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn cqed")
}

fn stdout_of(out: &Output) -> String {
    assert!(
        out.status.success(),
        "expected success, got {:?}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn json_of(out: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout_of(out)).expect("valid JSON on stdout")
}

#[test]
fn simulate_spectrum_is_deterministic_per_seed() {
    let a = stdout_of(&run(&["simulate", "spectrum", "--seed", "7"]));
    let b = stdout_of(&run(&["simulate", "spectrum", "--seed", "7"]));
    let c = stdout_of(&run(&["simulate", "spectrum", "--seed", "8"]));
    assert_eq!(a, b, "same seed must give identical bytes");
    assert_eq!(a, c, "noiseless default must not depend on the seed");
    assert!(a.starts_with("detuning_GHz,counts"), "got header {:?}", a.lines().next());

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(dir.path(), "noisy.json", r#"{"noise_rel": 0.05}"#);
    let cfg = cfg.to_str().unwrap();
    let n7 = stdout_of(&run(&["simulate", "spectrum", "--config", cfg, "--seed", "7"]));
    let n8 = stdout_of(&run(&["simulate", "spectrum", "--config", cfg, "--seed", "8"]));
    assert_ne!(n7, n8, "different seeds must give different noise");
}

#[test]
fn simulate_bloch_emits_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(
        dir.path(),
        "bloch.json",
        r#"{"g": 1.94, "kappa": 19.0, "kappa_e": 3.99, "gamma0": 0.0245,
            "y_re": 0.01, "t_end_ns": 1.0, "dt_ns": 0.001}"#,
    );
    let out = stdout_of(&run(&["simulate", "bloch", "--config", cfg.to_str().unwrap()]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("time_ns,re_sigma_ge,im_sigma_ge,sigma_z"));
    assert_eq!(lines.count(), 1001, "1000 steps plus the initial sample");

    // without --config there is nothing to integrate
    let out = run(&["simulate", "bloch"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_fig_views_in_both_formats() {
    for view in ["fig2c", "fig3c", "fig4b", "fig4e", "fig5a", "fig5b", "fig5c", "fig14"] {
        let v = json_of(&run(&["simulate", "fig-views", view]));
        assert_eq!(v["view"], view);
        assert!(v["curves"].as_array().map_or(false, |c| !c.is_empty()), "{view} has curves");
    }
    let csv = stdout_of(&run(&["simulate", "fig-views", "fig2c", "--format", "csv"]));
    assert!(csv.lines().count() > 100, "csv view output should be a long table");

    let out = run(&["simulate", "fig-views", "nosuch"]);
    assert_eq!(out.status.code(), Some(2), "unknown view is a usage error");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fig2c"), "error should list available views, got: {err}");
}

#[test]
fn fit_lorentzian_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let trace = synth::lorentzian_spectrum(619.5, 0.062, 1000.0, 0.0, 50.0, 200.0, 1);
    let input = write_file(dir.path(), "spectrum.csv", &trace.to_csv_string());
    let input = input.to_str().unwrap();

    let v = json_of(&run(&["fit", "lorentzian", "--input", input]));
    let names: Vec<&str> = v["names"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    let lambda = v["values"][names.iter().position(|n| *n == "lambda_c").unwrap()].as_f64().unwrap();
    assert!((lambda - 619.5).abs() < 0.01, "lambda_c = {lambda}");
    let q = v["q"].as_f64().unwrap();
    assert!((q - 619.5 / 0.062).abs() / q < 0.1, "q = {q}");

    let csv = stdout_of(&run(&["fit", "lorentzian", "--input", input, "--format", "csv"]));
    assert!(csv.starts_with("name,value,stderr"));
    assert!(csv.contains("lambda_c,"));
}

#[test]
fn fit_lifetime_and_detuning_series() {
    let dir = tempfile::tempdir().unwrap();
    let hist = synth::exponential_histogram(6.5, 2000.0, 20.0, None, 100.0, 2);
    let input = write_file(dir.path(), "decay.csv", &hist.to_csv_string());
    let v = json_of(&run(&["fit", "lifetime", "--input", input.to_str().unwrap()]));
    let tau = v["values"][0].as_f64().unwrap();
    assert!((tau - 6.5).abs() < 0.3, "tau = {tau}");

    // detuning series need kappa from the config; without it: usage error
    let pts = synth::lifetime_series(6.5, 20.6, 28.6, 0.01, 3);
    let mut csv = String::from("detuning_GHz,counts\n");
    for (x, y) in &pts {
        csv.push_str(&format!("{x},{y}\n"));
    }
    let series = write_file(dir.path(), "series.csv", &csv);
    let series = series.to_str().unwrap();
    let out = run(&["fit", "lifetime-vs-detuning", "--input", series]);
    assert_eq!(out.status.code(), Some(2));

    let cfg = write_file(dir.path(), "kappa.json", r#"{"kappa": 28.6}"#);
    let v = json_of(&run(&[
        "fit", "lifetime-vs-detuning", "--input", series, "--config", cfg.to_str().unwrap(),
    ]));
    let tau0 = v["values"][0].as_f64().unwrap();
    let c = v["values"][1].as_f64().unwrap();
    assert!((tau0 - 6.5).abs() < 0.3, "tau0 = {tau0}");
    assert!((c - 20.6).abs() < 1.5, "c = {c}");
}

#[test]
fn fit_linewidth_reports_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let pts = synth::linewidth_series(0.0975, 8.13, 19.0, 0.01, 4);
    let mut csv = String::from("detuning_GHz,counts\n");
    for (x, y) in &pts {
        csv.push_str(&format!("{x},{y}\n"));
    }
    let series = write_file(dir.path(), "lw.csv", &csv);
    let cfg = write_file(dir.path(), "kappa.json", r#"{"kappa": 19.0}"#);
    let v = json_of(&run(&[
        "fit", "linewidth-vs-detuning",
        "--input", series.to_str().unwrap(),
        "--config", cfg.to_str().unwrap(),
    ]));
    let g = v["g"].as_f64().unwrap();
    assert!((g - 1.94).abs() < 0.1, "g = {g}");
}

#[test]
fn fit_transmission_and_reflection() {
    let dir = tempfile::tempdir().unwrap();
    let scan = synth::transmission_scan(1.94, 19.0, 0.0975, 0.0, 0.0, 1000.0, 0.005, 5);
    let input = write_file(dir.path(), "scan.csv", &scan.to_csv_string());
    let v = json_of(&run(&["fit", "transmission", "--input", input.to_str().unwrap()]));
    let names: Vec<&str> = v["names"].as_array().unwrap().iter().map(|s| s.as_str().unwrap()).collect();
    let g = v["values"][names.iter().position(|n| *n == "g").unwrap()].as_f64().unwrap();
    assert!((g - 1.94).abs() < 0.1, "g = {g}");
    assert!(v["dip_contrast"].as_f64().unwrap() > 0.9);

    let refl = synth::reflection_scan(0.21, 19.0, 330e3, 21.9e3, 0.005, 6);
    let input = write_file(dir.path(), "refl.csv", &refl.to_csv_string());
    let input = input.to_str().unwrap();
    // reflection requires the background level in the config
    let out = run(&["fit", "reflection", "--input", input]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_file(dir.path(), "bg.json", r#"{"background": 21.9e3}"#);
    let v = json_of(&run(&["fit", "reflection", "--input", input, "--config", cfg.to_str().unwrap()]));
    let ratio = v["values"][0].as_f64().unwrap();
    assert!((ratio - 0.21).abs() < 0.02, "kappa_e/kappa = {ratio}");
    assert_eq!(v["ambiguous_branch"], false);
}

#[test]
fn malformed_trace_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    // descending abscissa: the error must name the offending line
    let bad = write_file(
        dir.path(),
        "bad.csv",
        "wavelength_nm,counts\n619.0,10\n618.0,11\n",
    );
    let out = run(&["fit", "lorentzian", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "error should name the line, got: {err}");

    let missing = dir.path().join("nosuch.csv");
    let out = run(&["fit", "lorentzian", "--input", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn design_lattice_scale_and_searches() {
    let v = json_of(&run(&["design", "lattice"]));
    let a = v["a_defect"].as_array().unwrap();
    assert_eq!(a.len(), 8);
    assert!((a[0].as_f64().unwrap() - 185.4).abs() < 1e-9);
    assert!((a[7].as_f64().unwrap() - 206.0).abs() < 1e-9);

    let v = json_of(&run(&["design", "scale", "95"]));
    assert!((v["a"].as_f64().unwrap() - 195.7).abs() < 1e-9);
    assert!((v["w_wg"].as_f64().unwrap() - 261.25).abs() < 1e-9);

    let v = json_of(&run(&["design", "beta-map"]));
    assert!(!v["contours"].as_array().unwrap().is_empty());

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_file(
        dir.path(),
        "dip.json",
        r#"{"params": {"g": 0.99, "kappa": 50.0, "kappa_e": 30.0, "kappa_in": null,
            "gamma0": 0.052, "gamma_dep": 0.0, "omega_c": 0.0, "omega_a": 0.0}}"#,
    );
    let v = json_of(&run(&["design", "dip-search", "--config", cfg.to_str().unwrap()]));
    assert!(v["min_reflection"].as_f64().unwrap() < 1e-4);

    // dip-search without params is a usage error
    let out = run(&["design", "dip-search"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_and_classify_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_file(
        dir.path(),
        "manifest.json",
        r#"[
          {"sample_id": "S1", "array_id": "A1", "device_id": "D1",
           "scaling": 100.0, "m_w": 3, "dose": null, "trace_paths": {},
           "flags": {"visually_broken": false, "no_resonance": false,
                     "not_in_reflection": false, "q_censored": false},
           "resonance_nm": 619.0, "fwhm_nm": 0.06, "q": 10000.0},
          {"sample_id": "S1", "array_id": "A1", "device_id": "D2",
           "scaling": 100.0, "m_w": 3, "dose": null, "trace_paths": {},
           "flags": {"visually_broken": true, "no_resonance": true,
                     "not_in_reflection": false, "q_censored": false},
           "resonance_nm": null, "fwhm_nm": null, "q": null}
        ]"#,
    );
    let v = json_of(&run(&["stats", "--input", manifest.to_str().unwrap()]));
    assert_eq!(v["investigated"], 2);
    assert_eq!(v["with_resonance"], 1);
    assert!((v["yield_fraction"].as_f64().unwrap() - 0.5).abs() < 1e-12);

    let trace = synth::lorentzian_spectrum(619.5, 0.1, 500.0, 0.0, 10.0, 50.0, 9);
    let input = write_file(dir.path(), "psb.csv", &trace.to_csv_string());
    let v = json_of(&run(&["classify", "--input", input.to_str().unwrap()]));
    assert_eq!(v["state"], "bright");

    let inputs = write_file(
        dir.path(),
        "report.json",
        r#"{"kappa": [19.0, 0.3], "kappa_e_over_kappa": [0.21, 0.003],
            "lifetime": {"a": 6.5, "b": 20.6, "var_a": 0.04, "var_b": 1.21, "cov": 0.0},
            "lambda_c_nm": 619.0}"#,
    );
    let v = json_of(&run(&["report", "--config", inputs.to_str().unwrap()]));
    let rows = v["rows"].as_array().unwrap();
    let row = |name: &str| {
        rows.iter()
            .find(|r| r["name"] == name)
            .unwrap_or_else(|| panic!("missing row {name}"))["value"]
            .as_f64()
            .unwrap()
    };
    assert!((row("cooperativity") - 20.6).abs() < 1e-9);
    assert!((row("beta") - 0.9537).abs() < 0.001);
    assert!((row("kappa_e_GHz") - 3.99).abs() < 1e-9);
}
