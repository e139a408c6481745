use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_xyzsov"))
}

fn tmp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("xyzsov-cli-{}-{name}", std::process::id()))
}

#[test]
fn verify_algebra_writes_versioned_report() {
    let out = tmp("algebra.json");
    let csv = tmp("algebra.csv");
    let st = bin()
        .args(["verify-algebra", "--n", "2", "--seed", "4", "--out"])
        .arg(&out)
        .arg("--csv")
        .arg(&csv)
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["summary"]["fail"], 0);
    assert_eq!(v["suites"], serde_json::json!(["algebra", "transfer"]));
    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("suite,name,criterion"));
    assert_eq!(table.lines().count(), v["checks"].as_array().unwrap().len() + 1);
}

#[test]
fn output_is_deterministic() {
    let a = bin().args(["spectrum", "--n", "2", "--seed", "9"]).output().unwrap();
    let b = bin().args(["spectrum", "--n", "2", "--seed", "9"]).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failures_give_nonzero_exit() {
    let cfg = tmp("broken.toml");
    std::fs::write(&cfg, "name = \"broken\"\nbreak_constraint = true\n").unwrap();
    let st = bin().args(["bethe", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(st.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&st.stderr).contains("constraint"));
}

#[test]
fn bad_input_is_an_error() {
    let st = bin().args(["report", "--suite", "nope"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("available"));
    let st = bin().args(["sov", "--n", "40"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = bin().args(["report", "--tolerance-scale", "-1"]).output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}
