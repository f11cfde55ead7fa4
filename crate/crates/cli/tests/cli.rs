use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besov-trace")).args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn strip_runtime(mut v: Value) -> Value {
    for r in v["records"].as_array_mut().unwrap() {
        r.as_object_mut().unwrap().remove("runtime");
    }
    v
}

#[test]
fn hardy_suite_gives_two_passing_records() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "--suite", "hardy"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(dir.path());
    let recs = r["records"].as_array().unwrap();
    let names: Vec<&str> = recs.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["hardy_prefix", "hardy_tail"]);
    assert!(recs.iter().all(|r| r["status"] == "pass"));
    assert!(dir.path().join("plots/hardy_prefix_ratios.svg").exists());
}

#[test]
fn unknown_suite_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["verify", "--suite", "hardy", "--suite", "nonexistent"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn empty_suite_list_gives_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    std::fs::write(&cfg, "suites = []\n").unwrap();
    let o = bin(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    assert_eq!(report(dir.path())["records"].as_array().unwrap().len(), 0);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sed = 3\n").unwrap();
    let o = bin(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_apart_from_runtime() {
    let args = ["verify", "--suite", "hardy", "--suite", "disjointness", "--suite", "remez", "--depth", "4", "--seed", "7"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(bin(&args, a.path()).status.success());
    assert!(bin(&args, b.path()).status.success());
    let (ra, rb) = (report(a.path()), report(b.path()));
    assert_eq!(ra["seed"], 7);
    assert_eq!(ra["depth"], 4);
    assert_eq!(strip_runtime(ra), strip_runtime(rb));
}

#[test]
fn build_set_writes_all_atoms() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["build-set"], dir.path());
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("atoms.csv")).unwrap();
    // Header plus 4^5 atoms.
    assert_eq!(text.lines().count(), 1 + 1024);
    let reg: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("regularity.json")).unwrap()).unwrap();
    assert!(reg["ratio"].as_f64().unwrap() >= 1.0);
}

#[test]
fn extend_writes_field_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["extend", "--grid", "64", "--depth", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read_to_string(dir.path().join("field.csv")).unwrap().lines().count(), 1 + 64 * 64);
    let s: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("extend.json")).unwrap()).unwrap();
    assert!(s["trace_max_error"].as_f64().unwrap().is_finite());

    let o = bin(&["extend", "--grid", "32", "--depth", "3", "--binary"], dir.path());
    assert!(o.status.success());
    assert_eq!(std::fs::metadata(dir.path().join("field.bin")).unwrap().len(), 8 * 32 * 32);
}

#[test]
fn norms_verb_writes_json_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["norms", "--depth", "3"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("norms.json")).unwrap()).unwrap();
    assert_eq!(v["norms"].as_array().unwrap().len(), 10);
    assert!(dir.path().join("norms.csv").exists());
    assert!(std::fs::read_to_string(dir.path().join("norms.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn report_verb_exit_code_follows_records() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bin(&["verify", "--suite", "whitney", "--depth", "3"], dir.path()).status.success());
    let o = bin(&["report"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("whitney"));

    let mut r = report(dir.path());
    r["records"][0]["status"] = "fail".into();
    std::fs::write(dir.path().join("report.json"), r.to_string()).unwrap();
    assert_eq!(bin(&["report"], dir.path()).status.code(), Some(1));
}

#[test]
fn missing_report_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bin(&["report"], dir.path()).status.code(), Some(2));
}
