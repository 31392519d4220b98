use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_toric-deform"))
}

fn jobs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../jobs")
}

fn run(args: &[&str]) -> (i32, Value, String) {
    let Output { status, stdout, stderr } = bin().args(args).output().expect("binary runs");
    let json = serde_json::from_slice(&stdout).unwrap_or(Value::Null);
    (status.code().expect("exit code"), json, String::from_utf8_lossy(&stderr).into_owned())
}

fn stage(job: &Path, name: &str) -> (i32, Value) {
    let (code, v, _) = run(&["pipeline", "--job", job.to_str().unwrap(), "--stage", name]);
    (code, v)
}

#[test]
fn hj_expands_fractions() {
    let (code, v, _) = run(&["hj", "--nq", "5/2"]);
    assert_eq!(code, 0);
    assert_eq!(v["chain"], "[3,2]");
    assert_eq!(v["e"], 4);
}

#[test]
fn hj_values_chains() {
    let (_, v, _) = run(&["hj", "--chain", "[2]"]);
    assert_eq!((v["n"].as_u64(), v["q"].as_u64()), (Some(2), Some(1)));
    let (_, v, _) = run(&["hj", "--chain", "[]"]);
    assert_eq!(v["n"], 1);
    assert_eq!(v["smooth"], true);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["hj", "--nq", "4/2"]).0, 1);
    assert_eq!(run(&["hj"]).0, 1);
    assert_eq!(run(&["pipeline", "--job", "missing.json", "--stage", "gens"]).0, 1);
    assert_eq!(run(&["nonsense"]).0, 1);
}

#[test]
fn malformed_chain_literal_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"base":{"kind":"equal-char-0","truncation":2},"chain":"[2,","deformation":{"consecutive":{}}}"#)
        .unwrap();
    let (code, _, err) = run(&["pipeline", "--job", path.to_str().unwrap(), "--stage", "gens"]);
    assert_eq!(code, 1);
    assert!(err.contains("parse error"), "{err}");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"base":{"kind":"equal-char-0","truncation":2},"chain":"[2]","deformation":{"consecutive":{}},"extra":1}"#)
        .unwrap();
    assert_eq!(stage(&path, "gens").0, 1);
}

#[test]
fn trivial_analyze_reports_the_chain_at_the_origin() {
    let (code, v) = stage(&jobs().join("trivial-22.json"), "analyze");
    assert_eq!(code, 0);
    let r = &v["result"]["reports"][0];
    assert_eq!(r["verdict"], "singular");
    assert_eq!(r["reduced"], serde_json::json!([2, 2]));
    assert_eq!(r["n-prime"], r["n"]);
    assert_eq!(v["input"]["chain"], "[2,2]");
    assert_eq!(v["truncation"], 2);
}

#[test]
fn a1_walkthrough_is_smooth_and_agrees() {
    let job = jobs().join("a1-smoothing.json");
    assert_eq!(stage(&job, "normalize").0, 0);
    let (code, v) = stage(&job, "analyze");
    assert_eq!(code, 0);
    for r in v["result"]["reports"].as_array().unwrap() {
        assert_eq!(r["verdict"], "smooth");
    }
    let (code, v) = stage(&job, "oracle-scan");
    assert_eq!(code, 0);
    assert_eq!(v["result"]["agreement"], "pass");
    assert!(v["result"]["scan"]["singular"].as_array().unwrap().is_empty());
}

#[test]
fn a3_walkthrough_has_an_a1_point() {
    for name in ["a3-partial.json", "a3-mixed.json"] {
        let (code, v) = stage(&jobs().join(name), "oracle-scan");
        assert_eq!(code, 0, "{name}");
        let singular = v["result"]["scan"]["singular"].as_array().unwrap();
        assert_eq!(singular.len(), 1, "{name}");
        assert_eq!(singular[0]["corank"], 3);
        assert_eq!(singular[0]["report"]["reduced"], serde_json::json!([2]));
    }
}

#[test]
fn obstructed_completion_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obstructed.json");
    fs::write(&path, r#"{"base":{"kind":"equal-char-0","truncation":2},"chain":"[2,2]","deformation":{"consecutive":{"2":"1"}}}"#)
        .unwrap();
    let (code, v) = stage(&path, "complete");
    assert_eq!(code, 2);
    assert_eq!(v["status"], "obstructed");
}

#[test]
fn workspace_cache_does_not_change_reports() {
    let dir = tempfile::tempdir().unwrap();
    let job = jobs().join("a3-partial.json");
    let args = ["pipeline", "--job", job.to_str().unwrap(), "--stage", "normalize"];
    let plain = bin().args(args).output().unwrap().stdout;
    let ws = ["--workspace", dir.path().to_str().unwrap()];
    let first = bin().args(args).args(ws).output().unwrap().stdout;
    let cached = bin().args(args).args(ws).output().unwrap().stdout;
    assert_eq!(plain, first);
    assert_eq!(first, cached);
    assert!(fs::read_dir(dir.path()).unwrap().next().is_some());
}

#[test]
fn truncation_flag_overrides_the_job() {
    let job = jobs().join("a3-partial.json");
    let (code, v, _) = run(&["pipeline", "--job", job.to_str().unwrap(), "--stage", "analyze", "--truncation", "5"]);
    assert_eq!(code, 0);
    assert_eq!(v["truncation"], 5);
    assert_eq!(v["result"]["reports"][0]["reduced"], serde_json::json!([2]));
}

#[test]
fn empty_fuzz_exits_zero() {
    let (code, v, _) = run(&["fuzz", "--count", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["tally"]["passed"], 0);
}

#[test]
fn fuzz_is_deterministic_and_replayable() {
    let dir = tempfile::tempdir().unwrap();
    let save = dir.path().to_str().unwrap();
    let args = ["fuzz", "--count", "12", "--seed", "3", "--field", "5", "--field", "7"];
    let a = bin().args(args).args(["--save", save, "--save-all"]).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    for entry in fs::read_dir(dir.path()).unwrap() {
        let path = entry.unwrap().path();
        let out = bin().arg("replay").arg(&path).output().unwrap();
        let saved: Value = serde_json::from_slice(&fs::read(&path).unwrap()).unwrap();
        let fresh: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(saved, fresh, "{}", path.display());
    }
}

#[test]
fn fuzz_rejects_fields_of_the_wrong_characteristic() {
    assert_eq!(run(&["fuzz", "--count", "1", "--kind", "mixed-char", "--field", "5"]).0, 1);
    assert_eq!(run(&["fuzz", "--count", "1", "--kind", "equal-char-p", "--field", "7"]).0, 1);
}
