use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_slab-spectra")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("slab-spectra-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn run(cmd: &str, cfg: &str, dir: &Path) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg).unwrap();
    Command::new(bin())
        .args([cmd, "--config", path.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap()])
        .output()
        .unwrap()
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

#[test]
fn zero_profile_spectrum_is_empty() {
    let d = scratch("zero");
    let o = run("spectrum", r#"{"profile": {"kind": "step", "kappa": 0.0}, "grid": {"cells": 8}}"#, &d);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&d, "spectrum.json");
    assert_eq!(r["result"]["eigenvalues"].as_array().unwrap().len(), 0);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(r["grid_levels"].as_array().unwrap().len(), 2);
    assert!(r["two_grid_deltas"].is_object());
    assert!(r["unresolved"].is_null());
}

#[test]
fn schema_violation_exits_2_and_names_field() {
    let d = scratch("schema");
    let o = run("spectrum", r#"{"profile": {"kind": "step", "kappa": 1.0}, "grid": {"cells": 8, "cels": 2}}"#, &d);
    assert_eq!(o.status.code(), Some(2));
    let r = report(&d, "spectrum.invalid.json");
    assert_eq!(r["violations"][0]["field"], "grid.cels");
}

#[test]
fn validate_config_cases() {
    let d = scratch("validate");
    let ok = run("validate_config", r#"{"profile": {"kind": "step", "kappa": 1.0}, "grid": {"cells": 8}}"#, &d);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&d, "validate_config.json")["valid"], true);

    let big = run("validate_config", r#"{"profile": {"kind": "step", "kappa": 1.0}, "grid": {"cells": 8}, "delta": 0.2}"#, &d);
    assert_eq!(big.status.code(), Some(2));
    let r = report(&d, "validate_config.invalid.json");
    assert_eq!(r["violations"][0]["field"], "delta");
    assert!(r["violations"][0]["message"].as_str().unwrap().contains("min{1/(2a)"));

    // p0 and p1 mixed inside one term: K1 is not a multiple of 1
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b) = (0.5, s * 1.5f64.sqrt());
    let cfg = format!(
        r#"{{"profile": {{"kind": "step", "kappa": 1.0}}, "grid": {{"cells": 8}},
           "collision": {{"mode": "polynomial", "terms": [{{"k": 1.0, "coeffs": [{a}, {b}]}}, {{"k": 0.5, "coeffs": [{a}, {nb}]}}]}}}}"#,
        nb = -b
    );
    let bad = run("validate_config", &cfg, &d);
    assert_eq!(bad.status.code(), Some(2));
    let r = report(&d, "validate_config.invalid.json");
    assert!(r["violations"][0]["field"].as_str().unwrap().contains("eigenfunction"));
}

#[test]
fn numerical_failure_exits_3_with_diagnostic() {
    let d = scratch("numfail");
    let cfg = r#"{"profile": {"kind": "step", "kappa": 1.0}, "grid": {"cells": 8, "nx": 256, "dt": 0.05, "x_max": 2.0},
                  "evolve": {"t_end": 5.0, "initial": {"kind": "smooth", "a_x": 0.0, "a_mu": 0.0}}}"#;
    let o = run("evolve", cfg, &d);
    assert_eq!(o.status.code(), Some(3));
    let r = report(&d, "evolve.diagnostic.json");
    assert_eq!(r["error"]["kind"], "simulation");
}

#[test]
fn kappa_scan_gives_values_with_error_bars() {
    let d = scratch("kscan");
    let cfg = r#"{"profile": {"kind": "step", "kappa": 1.0}, "grid": {"cells": 32},
                  "kappa_scan": {"range": [0.0, 8.0], "confirm": false}}"#;
    let o = run("kappa-scan", cfg, &d);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&d, "kappa-scan.json");
    let v = r["result"]["scan"]["values"].as_array().unwrap();
    assert!(v.len() >= 5, "{}", v.len());
    assert!(v.iter().all(|x| x["err"].as_f64().unwrap() > 0.0));
    let csv = std::fs::read_to_string(d.join("out").join("kappa-scan.csv")).unwrap();
    assert!(csv.starts_with("kappa,err,"));
}

#[test]
fn growth_is_byte_identical_for_same_seed() {
    let cfg = r#"{"profile": {"kind": "step", "kappa": 0.6}, "seed": 7,
                  "grid": {"cells": 16, "mu": {"kind": "half_range_gauss", "per_half": 4}, "nx": 400, "dt": 0.1},
                  "growth": {"t_end": 40.0, "initial": {"kind": "random", "seed": 3, "terms": 3}, "per_decade": 8}}"#;
    let (a, b) = (scratch("growth-a"), scratch("growth-b"));
    assert_eq!(run("growth", cfg, &a).status.code(), Some(0));
    assert_eq!(run("growth", cfg, &b).status.code(), Some(0));
    let ca = std::fs::read(a.join("out").join("growth.csv")).unwrap();
    let cb = std::fs::read(b.join("out").join("growth.csv")).unwrap();
    assert_eq!(ca, cb);
    let r = report(&a, "growth.json");
    assert!(r.get("unresolved").is_some());
    assert_eq!(r["result"]["initial"]["seed"], 3 ^ 7);
}

#[test]
fn classify_reports_both_levels() {
    let d = scratch("classify");
    let o = run("classify", r#"{"profile": {"kind": "step", "kappa": 1.7}, "grid": {"cells": 16}}"#, &d);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&d, "classify.json");
    assert_eq!(r["result"]["classification"], "none");
    assert_eq!(r["result"]["levels"].as_array().unwrap().len(), 2);
}
