use std::process::{Command, Output};

use serde_json::Value;

fn qt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qtradeoff"))
        .args(args)
        .env_remove("QT_DIM_CAP")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn entropy_uniform_eight() {
    let out = qt(&["entropy", "--uniform", "8", "--eps", "0.5"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["measured"]["h_max"], 2.0);
}

#[test]
fn composed_small() {
    let out = qt(&["verify-composed", "--n", "2", "--q", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let r = json(&out);
    assert_eq!(r["measured"]["queries"], 2);
    assert_eq!(r["passed"], true);
}

#[test]
fn curve_csv_rows() {
    let out = qt(&["tradeoff-curve", "--log-x", "100", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 51);
    assert_eq!(lines[1], "1,100,50,50,50");
}

#[test]
fn approx_without_noise() {
    let out = qt(&["verify-approx", "--eps", "0", "--z", "3"]);
    assert!(out.status.success());
    let r = json(&out);
    assert!(r["measured"]["max_error_norm"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn clean_builtin_and_reduce_dump() {
    assert!(qt(&["verify-clean", "--protocol", "gt4"]).status.success());
    let out = qt(&["reduce-dump", "--n", "4", "--s", "2,3", "--format", "csv"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1 + 2 * 4 * 2);
}

#[test]
fn cap_env_is_honoured() {
    let out = Command::new(env!("CARGO_BIN_EXE_qtradeoff"))
        .args(["verify-composed", "--n", "2", "--q", "2"])
        .env("QT_DIM_CAP", "64")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn malformed_input_fails() {
    assert_eq!(qt(&["verify-clean", "--protocol", "bogus"]).status.code(), Some(2));
    assert_eq!(qt(&["entropy", "--masses", "0.5,0.6", "--eps", "0.1"]).status.code(), Some(2));
    assert_eq!(qt(&["gt-bound", "--n", "2"]).status.code(), Some(2));
    assert_eq!(qt(&["verify-composed", "--n", "0", "--q", "1"]).status.code(), Some(2));
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("qt-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gt.json");
    let out = qt(&["gt-bound", "--n", "65536", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(r["measured"]["T"], 3);
    std::fs::remove_dir_all(dir).unwrap();
}
