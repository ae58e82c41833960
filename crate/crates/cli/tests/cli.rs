use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn geolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_geolab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/report.schema.json");
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&raw).unwrap()
}

/// Parses stdout as a report and checks it against the shipped schema.
fn report(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    });
    let validator = schema();
    let errors: Vec<String> = validator.iter_errors(&v).map(|e| format!("{e} at {}", e.instance_path)).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
    v
}

#[test]
fn square_has_two_half_geodesics() {
    let out = geolab(&["polygon-classify", "--n", "4"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r["results"].as_array().unwrap().len(), 2);
    assert_eq!(r["summary"]["holds"], true);
    assert_eq!(r["details"]["certificate"]["exhausted"], true);
}

#[test]
fn triangle_has_none_and_the_empty_report_is_valid() {
    let out = geolab(&["polygon-classify", "--n", "3"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert!(r["results"].as_array().unwrap().is_empty());
}

#[test]
fn verdict_mismatch_exits_one() {
    // A pass tolerance below rounding error leaves the meridians unverified.
    let out = geolab(&["polygon-classify", "--n", "4", "--tol", "1e-20"]);
    assert_eq!(code(&out), 1);
    assert_eq!(report(&out)["summary"]["holds"], false);
}

#[test]
fn tube_guard_violation_exits_two() {
    let out = geolab(&["tube-verify", "--n", "4", "--eps", "0.4"]);
    assert_eq!(code(&out), 2);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("apothem"));
}

#[test]
fn validation_failures_exit_two() {
    assert_eq!(code(&geolab(&["polygon-classify", "--n", "2"])), 2);
    assert_eq!(code(&geolab(&["ellipsoid-search", "--axes", "1,2"])), 2);
    assert_eq!(code(&geolab(&["ellipsoid-classify", "--axes", "2,1,3"])), 2);
    assert_eq!(code(&geolab(&["no-such-experiment"])), 2);
    assert_eq!(code(&geolab(&["ellipsoid-classify", "--format", "svg"])), 2);
    let threads = Command::new(env!("CARGO_BIN_EXE_geolab"))
        .args(["polygon-classify", "--n", "3"])
        .env("GEOLAB_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&threads), 2);
}

#[test]
fn outputs_are_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["polygon-distance", "--n", "4", "--pairs", "20", "--h", "0.1", "--h", "0.05"];
    for (format, check) in [("json", "{"), ("csv", "h,pairs,declared_error"), ("svg", "<svg")] {
        let path = dir.path().join(format!("out.{format}"));
        let mut args = base.to_vec();
        let p = path.to_str().unwrap();
        args.extend(["--format", format, "--out", p]);
        let out = geolab(&args);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        assert!(std::fs::read_to_string(&path).unwrap().starts_with(check));
    }
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 3, "leftover files: {names:?}");

    let unwritable = geolab(&["polygon-classify", "--n", "3", "--out", "/nonexistent-dir/r.json"]);
    assert_eq!(code(&unwritable), 2);
}

#[test]
fn reruns_reproduce_the_payload() {
    let args = ["ellipsoid-search", "--trials", "6", "--seed", "3"];
    let (a, b) = (report(&geolab(&args)), report(&geolab(&args)));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["spec"], b["spec"]);
    assert_eq!(a["provenance"]["seed"], 3);
}

#[test]
fn tube_reports_match_the_schema() {
    let verify = geolab(&["tube-verify", "--eps", "0.2", "--samples", "24"]);
    let r = report(&verify);
    assert_eq!(r["results"][0]["h"], 0.04);
    assert!(r["summary"]["caveat"].is_string());

    let gh = geolab(&["tube-gh", "--eps", "0.2", "--eps", "0.1", "--samples", "6", "--format", "csv"]);
    let csv = String::from_utf8(gh.stdout).unwrap();
    assert_eq!(csv.lines().next(), Some("eps,h,samples,max_distortion"));
    assert_eq!(csv.lines().count(), 3);

    let probe = geolab(&["tube-systole", "--n", "3", "--eps", "0.1", "--runs", "2", "--no-lifts", "--samples", "24"]);
    let r = report(&probe);
    assert_eq!(r["results"][0]["random_runs"], 2);
    assert!(r["summary"]["caveat"].as_str().unwrap().contains("not an enumeration"));
}

#[test]
fn ellipsoid_classification_report() {
    let out = geolab(&["ellipsoid-classify", "--axes", "1,1,1", "--resolution", "0.01", "--samples", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["results"].as_array().unwrap().len(), 3);
    assert!(r["results"].as_array().unwrap().iter().all(|s| s["verdict"] == "PASS"));
}
