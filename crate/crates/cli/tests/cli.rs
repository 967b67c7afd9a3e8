use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn frontlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frontlab")).args(args).env_remove("FRONTLAB_JOBS").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn classify_reports_region() {
    let v = json(&frontlab(&["classify", "--d", "1", "--alpha", "1", "--mu", "-1"]));
    assert_eq!(v["label"], "Rabs");
}

#[test]
fn nonnegative_mu_is_a_domain_error() {
    let out = frontlab(&["classify", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("error: code=domain"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    assert_eq!(frontlab(&["classify", "--bogus"]).status.code(), Some(2));
}

#[test]
fn boundaries_as_csv() {
    let out = frontlab(&["boundaries", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let at = |name: &str| row[header.iter().position(|h| *h == name).unwrap()].parse::<f64>().unwrap();
    assert_eq!(at("mu_rem"), -10.0);
    assert_eq!(at("mu_abs0"), -7.75);
}

#[test]
fn absolute_spreading_speed() {
    let v = json(&frontlab(&["sabs", "--mu", "-0.5"]));
    let s = v["s_abs"].as_f64().unwrap();
    assert!((s - 2.3547).abs() < 1e-2, "{s}");
}

#[test]
fn output_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = frontlab(&["double-roots", "--numeric", "--format", "csv", "--out", path.to_str().unwrap()]);
        assert!(out.status.success());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn short_simulation_writes_trace() {
    let v = json(&frontlab(&["simulate", "--mu", "-9", "--L", "40", "--T", "20", "--companion"]));
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r["core_pos"].is_number()));
}

#[test]
fn repro_bundle_has_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sh");
    let out = frontlab(&["repro-figure", "sh-abs", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert_eq!(files.len(), 3);
    for f in files {
        assert!(out_dir.join(f["file"].as_str().unwrap()).exists());
    }
}
