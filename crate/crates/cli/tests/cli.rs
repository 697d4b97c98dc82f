use std::process::Command;

use serde_json::Value;
use tpcert_cli::{run, Outcome, EXIT_INDETERMINATE, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE};

fn tpcert(args: &[&str]) -> Outcome {
    run(std::iter::once("tpcert").chain(args.iter().copied()))
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = tpcert(args);
    let v = serde_json::from_str(&out.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}\n{}{}", out.stdout, out.stderr));
    (out.code, v)
}

fn mid(v: &Value) -> f64 {
    v["mid"].as_str().unwrap().parse().unwrap()
}

#[test]
fn bessel_values() {
    let (code, v) = json(&["bessel", "--j", "0", "--x", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!((mid(&v["value"]) - 1.2660658777520084).abs() < 1e-15);
    assert_eq!(v["target_met"], true);

    let (code, v) = json(&["bessel", "--j", "3", "--x", "0"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(mid(&v["value"]), 0.0);
}

#[test]
fn bessel_domain_error() {
    let out = tpcert(&["bessel", "--j", "1", "--x", "-1"]);
    assert_eq!(out.code, EXIT_USAGE);
    assert!(out.stdout.is_empty());
    assert!(out.stderr.starts_with("error:"));
}

#[test]
fn bessel_quadrature_matches_series() {
    let (_, s) = json(&["bessel", "--j", "4", "--x", "5/2"]);
    let (code, q) = json(&["bessel", "--j", "4", "--x", "5/2", "--method", "quadrature"]);
    assert_eq!(code, EXIT_OK);
    assert!((mid(&s["value"]) - mid(&q["value"])).abs() < 1e-25);
    assert_eq!(tpcert(&["bessel", "--j", "1.5", "--x", "1", "--method", "quadrature"]).code, EXIT_USAGE);
}

#[test]
fn bessel_formats() {
    let human = tpcert(&["--format", "human", "bessel", "--j", "1", "--x", "2"]);
    assert!(human.stdout.starts_with("I_1(2) = 1.5906368546373290633"), "{}", human.stdout);
    assert!(human.stdout.contains(" ± "));
    let csv = tpcert(&["--format", "csv", "bessel", "--j", "1", "--x", "2"]);
    let lines: Vec<&str> = csv.stdout.lines().collect();
    assert_eq!(lines[0], "order,x,mid,rad");
    assert!(lines[1].starts_with("1,2,"));
}

#[test]
fn unreachable_target_is_indeterminate() {
    let out = tpcert(&["--precision-cap", "64", "--target-rad", "1e-60", "bessel", "--j", "2", "--x", "7"]);
    assert_eq!(out.code, EXIT_INDETERMINATE);
}

#[test]
fn check_tp_bessel_strict() {
    let (code, v) = json(&["check-tp", "bessel", "--k", "0,1,2", "--x", "0.5,1,2", "--order", "3", "--strict"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "StrictlyPositive");
    assert_eq!(v["order"], 3);
    assert_eq!(v["minors_checked"], 19);
    assert!(v["witness"].is_null());
}

#[test]
fn check_tp_toeplitz() {
    let (code, v) = json(&["check-tp", "toeplitz", "--x", "1", "--rows", "0..5", "--cols", "0..5", "--order", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "StrictlyPositive");
}

#[test]
fn check_tp_karlin_nonnegative() {
    let args = ["check-tp", "karlin", "--alpha", "3", "--lambda", "1", "--xs", "1,2,3", "--ys", "0,1,2", "--order", "3"];
    let (code, v) = json(&args);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "Nonnegative");

    let mut strict = args.to_vec();
    strict.push("--strict");
    let (code, v) = json(&strict);
    assert_eq!(code, EXIT_NEGATIVE);
    assert!(v["witness"]["rows"].is_array());
}

#[test]
fn check_tp_violation() {
    let (code, v) = json(&["check-tp", "explicit", "--entries", "1,2;3,4"]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert_eq!(v["verdict"], "Violated");
    assert_eq!(v["witness"]["cols"], serde_json::json!([0, 1]));
}

#[test]
fn vandermonde_is_strictly_positive() {
    let (code, v) = json(&["check-tp", "vandermonde", "--xs", "1/2,1,3", "--ys", "0,1/3,2", "--strict"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "StrictlyPositive");
}

#[test]
fn matrix_output() {
    let (code, v) = json(&["matrix", "bessel", "--k", "0,1", "--x", "1,2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["provenance"]["kernel"], "bessel");
    let csv = tpcert(&["--format", "csv", "matrix", "explicit", "--entries", "1,2;3,4"]);
    assert_eq!(csv.stdout.lines().next(), Some("# lossy: midpoints only"));
    assert_eq!(csv.stdout.lines().count(), 3);
}

#[test]
fn grassmann_examples() {
    let (code, v) = json(&["grassmann", "--k", "0,1,2,3", "--x", "1,2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["verdict"], "StrictlyTotallyPositive");

    let (code, v) = json(&["pluecker", "--entries", "1,2,3;2,4,6"]);
    assert_eq!(code, EXIT_NEGATIVE);
    assert_eq!(v["verdict"], "Not");
    assert_eq!(v["coordinates"].as_array().unwrap().len(), 3);

    assert_eq!(tpcert(&["grassmann", "--k", "0,1", "--x", "1,2"]).code, EXIT_USAGE);
    assert_eq!(tpcert(&["grassmann", "--k", "0,1,2"]).code, EXIT_USAGE);
}

#[test]
fn heatflow_examples() {
    let (code, v) = json(&["heatflow", "residual", "--m", "2", "--w", "1", "--kmax", "12", "--x1", "0.5", "--h", "1e-4"]);
    assert_eq!(code, EXIT_OK);
    assert!(v["max_interior_relative"].as_f64().unwrap() <= 1e-6);
    assert!(v.get("components").is_none());

    let (code, v) = json(&["heatflow", "integrate", "--m", "2", "--w", "1", "--kmax", "14", "--X1", "1", "--step", "1e-3"]);
    assert_eq!(code, EXIT_OK);
    assert!(v["endpoint_vs_direct_max_error"].as_f64().unwrap() <= 1e-6);
    assert!(v["cone_min"].as_f64().unwrap() >= -1e-10);

    let (code, v) = json(&["heatflow", "bound", "--m", "2", "--R", "2", "--kmax", "14"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["holds"], true);
}

#[test]
fn heatflow_offsets_must_match_dimension() {
    assert_eq!(tpcert(&["heatflow", "residual", "--m", "3", "--w", "1", "--kmax", "6", "--x1", "1"]).code, EXIT_USAGE);
}

#[test]
fn integrate_csv_has_one_column_per_member() {
    let out = tpcert(&["--format", "csv", "heatflow", "integrate", "--m", "1", "--kmax", "4", "--X1", "0.5", "--samples", "0.25"]);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "x1,\"k=(0)\",\"k=(1)\",\"k=(2)\",\"k=(3)\",\"k=(4)\"");
    assert_eq!(lines.len(), 4);
}

#[test]
fn sampling_is_reproducible() {
    let a = tpcert(&["--seed", "7", "sample", "bessel-tp", "--m", "3", "--count", "5"]);
    let b = tpcert(&["--seed", "7", "sample", "bessel-tp", "--m", "3", "--count", "5"]);
    let c = tpcert(&["--seed", "8", "sample", "bessel-tp", "--m", "3", "--count", "5"]);
    assert_eq!(a, b);
    assert_ne!(a.stdout, c.stdout);
    let v: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["strictly_positive"], 5);
}

#[test]
fn usage_errors() {
    assert_eq!(tpcert(&["check-tp"]).code, EXIT_USAGE);
    assert_eq!(tpcert(&["--precision-start", "512", "--precision-cap", "64", "bessel", "--j", "0", "--x", "1"]).code, EXIT_USAGE);
    assert_eq!(tpcert(&["--target-rad", "0", "bessel", "--j", "0", "--x", "1"]).code, EXIT_USAGE);
    assert_eq!(tpcert(&["check-tp", "toeplitz", "--x", "1", "--rows", "3..1", "--cols", "0..2"]).code, EXIT_USAGE);
    assert_eq!(tpcert(&["--help"]).code, EXIT_OK);
}

#[test]
fn binary_honours_env_cap() {
    let out = Command::new(env!("CARGO_BIN_EXE_tpcert"))
        .env("TPCERT_PRECISION_CAP", "64")
        .args(["--target-rad", "1e-60", "bessel", "--j", "2", "--x", "7"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_INDETERMINATE));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["precision"], 64);

    let out = Command::new(env!("CARGO_BIN_EXE_tpcert")).args(["bessel", "--j", "0", "--x", "-2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}
