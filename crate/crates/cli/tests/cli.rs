//! End-to-end checks of the command-line interface: output schemas,
//! determinism for a fixed config + seed, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_genusexp"))
}

fn write_tmp(name: &str, content: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("genusexp-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn quartic_potential() -> PathBuf {
    write_tmp(
        "quartic.json",
        r#"{ "m": 1, "terms": [{ "word": "1111", "t": "1/20" }] }"#,
    )
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn enumerate_emits_expected_csv() {
    let potential = quartic_potential();
    let out = run(&[
        "enumerate",
        "--potential",
        potential.to_str().unwrap(),
        "--root",
        "1111",
        "--gmax",
        "1",
        "--kmax",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("genus,k,count"));
    // one quartic star alone: 2 planar, 1 genus-1
    assert!(text.contains("0,(0),2"));
    assert!(text.contains("1,(0),1"));
}

#[test]
fn solve_reports_gue_moments_for_empty_potential() {
    let potential = write_tmp("empty.json", r#"{ "m": 1, "terms": [] }"#);
    let out = run(&[
        "solve",
        "--potential",
        potential.to_str().unwrap(),
        "--k-order",
        "0",
        "--deg-max",
        "4",
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let tables = json["tables"].as_array().unwrap();
    let planar = &tables[0];
    let entries = planar["entries"].as_array().unwrap();
    // the X^4 row must carry the Catalan number 2
    let x4 = entries
        .iter()
        .find(|e| e["slots"][0] == "1111")
        .expect("X^4 entry present");
    assert_eq!(x4["coefficients"][0]["value"], "2");
}

#[test]
fn free_energy_header_and_values() {
    let potential = quartic_potential();
    let out = run(&[
        "free-energy",
        "--potential",
        potential.to_str().unwrap(),
        "--k-order",
        "2",
        "--gmax",
        "1",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("genus,k,coefficient"));
    assert!(text.contains("0,(1),-2"));
    assert!(text.contains("1,(1),-1"));
}

#[test]
fn simulate_outputs_are_byte_identical_for_fixed_seed() {
    let ensemble = write_tmp(
        "ensemble.json",
        r#"{
            "m": 1, "n_list": [4], "potential": [{ "word": "1111", "t": "1/10" }],
            "c": 0.5, "seed": 99, "steps": 3000, "burn_in": 500,
            "chains": 2, "thin": 1, "observables": ["11"]
        }"#,
    );
    let run_once = || {
        let out = run(&["simulate", "--config", ensemble.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let a = run_once();
    let b = run_once();
    assert_eq!(a, b, "simulate output must be deterministic");
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("N,observable,mean,stderr\n"));
    assert!(text.contains("4,11,"));
}

#[test]
fn quadrature_subcommand_checks_sd_identity() {
    let ensemble = write_tmp(
        "quad.json",
        r#"{
            "m": 1, "n_list": [1], "potential": [{ "word": "1111", "t": "1/10" }],
            "c": 0.5, "seed": 1, "steps": 10, "burn_in": 1, "observables": ["11"]
        }"#,
    );
    let out = run(&[
        "quadrature",
        "--config",
        ensemble.to_str().unwrap(),
        "--observable",
        "11",
        "--sd-check",
        "111",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("E[11] ="));
    assert!(text.contains("SD residual"));
}

#[test]
fn malformed_config_exits_one() {
    let bad = write_tmp("bad.json", r#"{ "m": 1, "terms": [{ "word": "13" }] }"#);
    let out = run(&[
        "enumerate",
        "--potential",
        bad.to_str().unwrap(),
        "--root",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("error"), "stderr: {err}");
}

#[test]
fn missing_numeric_t_is_rejected_for_simulation() {
    let ensemble = write_tmp(
        "no_t.json",
        r#"{
            "m": 1, "n_list": [4], "potential": [{ "word": "1111" }],
            "c": 0.5, "seed": 3, "steps": 100, "burn_in": 10, "observables": ["11"]
        }"#,
    );
    let out = run(&["simulate", "--config", ensemble.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn nonconvex_potential_is_refused_without_override() {
    let ensemble = write_tmp(
        "nonconvex.json",
        r#"{
            "m": 1, "n_list": [4], "potential": [{ "word": "1111", "t": "-1/10" }],
            "c": 0.5, "seed": 3, "steps": 100, "burn_in": 10, "observables": ["11"]
        }"#,
    );
    let out = run(&["simulate", "--config", ensemble.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("convexity"), "stderr: {err}");
}

#[test]
fn missing_seed_is_rejected() {
    // reproducibility: no wall-clock fallback, the seed field is mandatory
    let ensemble = write_tmp(
        "no_seed.json",
        r#"{
            "m": 1, "n_list": [4], "potential": [{ "word": "1111", "t": "1/10" }],
            "c": 0.5, "steps": 100, "burn_in": 10, "observables": ["11"]
        }"#,
    );
    let out = run(&["simulate", "--config", ensemble.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("seed"), "stderr: {err}");
}

#[test]
fn check_suite_passes_and_exits_zero() {
    let out = run(&["check", "--suite", "residual", "--order", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("PASS"));
    assert!(text.contains("all checks passed"));
}
