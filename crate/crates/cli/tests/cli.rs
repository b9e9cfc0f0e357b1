use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn isplab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isplab")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn config(dir: &Path, name: &str, space: &str, mode: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, format!(r#"{{"space": "{space}", "scalar_mode": "{mode}"}}"#)).unwrap();
    path
}

/// Temp dir holding a stage-2 (l2)^N build at `st.json`.
fn built() -> TempDir {
    let dir = TempDir::new().unwrap();
    config(dir.path(), "l2_power.json", "l2_power", "binary64");
    let out = isplab(&["build", "l2_power.json", "--stages", "2", "--out", "st.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir
}

fn mutate_state(dir: &Path, f: impl FnOnce(&mut Value)) {
    let path = dir.join("st.json");
    let mut v: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    f(&mut v);
    fs::write(&path, serde_json::to_string(&v).unwrap()).unwrap();
}

#[test]
fn classify_verdicts() {
    let dir = TempDir::new().unwrap();
    config(dir.path(), "l2p.json", "l2_power", "binary64");
    config(dir.path(), "opl.json", "omega_plus_l2", "binary64");
    config(dir.path(), "l2.json", "l2", "binary64");
    let out = isplab(&["classify", "l2p.json"], dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "ISP: no (infinite codimension at every level)");
    let out = isplab(&["classify", "opl.json", "--format", "json"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["isp"], Value::Bool(true));
    assert_eq!(code(&isplab(&["classify", "l2.json"], dir.path())), 2);
}

#[test]
fn build_then_verify() {
    let dir = built();
    let out = isplab(&["verify", "st.json", "--seed", "3"], dir.path());
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("verify: ok"));
    let out = isplab(&["verify", "st.json", "--format", "json"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["ok"], Value::Bool(true));
    assert!(!v["suites"].as_array().unwrap().is_empty());
}

#[test]
fn builds_are_reproducible_and_resumable() {
    let dir = built();
    let d = dir.path();
    isplab(&["build", "l2_power.json", "--stages", "2", "--out", "again.json"], d);
    isplab(&["build", "l2_power.json", "--stages", "1", "--out", "one.json"], d);
    let out = isplab(&["build", "l2_power.json", "--stages", "2", "--from", "one.json", "--out", "two.json"], d);
    assert_eq!(code(&out), 0);
    let first = fs::read(d.join("st.json")).unwrap();
    assert_eq!(first, fs::read(d.join("again.json")).unwrap());
    assert_eq!(first, fs::read(d.join("two.json")).unwrap());
}

#[test]
fn mutated_alpha_fails_verify() {
    let dir = built();
    mutate_state(dir.path(), |v| {
        let a1 = v["a"][0].as_u64().unwrap() as usize;
        let old = v["alpha"][a1].as_str().unwrap().to_string();
        let new = if old == "0x1.0000000000000p+7" { "0x1.0000000000000p+8" } else { "0x1.0000000000000p+7" };
        v["alpha"][a1] = Value::String(new.into());
    });
    let out = isplab(&["verify", "st.json"], dir.path());
    assert_eq!(code(&out), 4, "{}", stdout(&out));
    assert!(stdout(&out).contains("verify: FAILED"));
}

#[test]
fn mutated_index_fails_verify() {
    let dir = built();
    mutate_state(dir.path(), |v| {
        let delta2 = v["Delta"][2].as_u64().unwrap() as usize;
        let a2 = v["a"][1].as_u64().unwrap() as usize;
        let (lo, hi) = (2 * delta2, a2 - 1);
        let x = v["pos_to_index"][lo][1].clone();
        v["pos_to_index"][lo][1] = v["pos_to_index"][hi][1].clone();
        v["pos_to_index"][hi][1] = x;
    });
    assert_eq!(code(&isplab(&["verify", "st.json"], dir.path())), 4);
    // loading for analysis re-verifies too
    let out = isplab(&["report", "st.json"], dir.path());
    assert_eq!(code(&out), 4);
}

#[test]
fn cyclic_writes_witness() {
    let dir = built();
    let out = isplab(
        &["cyclic", "st.json", "--vector", "e(1,0)+e(2,3)", "--norm", "1", "--eps", "0.25", "--out", "w.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let w: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert!(w["achieved_error_f64"].as_f64().unwrap() < 0.25);
    assert_eq!(w["norm"], Value::from(1));
    assert_eq!(w["vector"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes_by_failure_class() {
    let dir = built();
    let d = dir.path();
    config(d, "bad.json", "nowhere", "binary64");
    config(d, "l2r.json", "l2_power", "rational");
    fs::write(d.join("junk.json"), "{").unwrap();
    assert_eq!(code(&isplab(&["build", "bad.json", "--out", "x.json"], d)), 2);
    assert_eq!(code(&isplab(&["build", "l2r.json", "--out", "x.json"], d)), 2);
    assert_eq!(code(&isplab(&["build", "l2_power.json", "--stages", "0", "--out", "x.json"], d)), 2);
    assert_eq!(code(&isplab(&["verify", "junk.json"], d)), 2);
    assert_eq!(code(&isplab(&["cyclic", "st.json", "--vector", "e(1,0)-e(1,0)"], d)), 2);
    assert_eq!(code(&isplab(&["cyclic", "st.json", "--vector", "f(1)"], d)), 2);
    assert_eq!(code(&isplab(&["cyclic", "st.json", "--vector", "e(1,0)", "--eps", "0"], d)), 2);
    // no committed stage n < 2 has N_n = 2
    assert_eq!(code(&isplab(&["cyclic", "st.json", "--vector", "e(1,0)", "--norm", "2"], d)), 3);
    let out = isplab(&["build", "l2_power.json", "--stages", "4", "--from", "st.json", "--out", "x.json"], d);
    assert_eq!(code(&out), 3);
    assert!(!d.join("x.json").exists());
}

#[test]
fn report_formats() {
    let dir = built();
    let out = isplab(&["report", "st.json"], dir.path());
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("l2_power (binary64), 2 stage(s)"));
    assert!(text.contains("final2"));
    let out = isplab(&["report", "st.json", "--format", "json"], dir.path());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["stages"].as_array().unwrap().len(), 2);
    assert_eq!(v["stages"][1]["a"], Value::from(546));
}
