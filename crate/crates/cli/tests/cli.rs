use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qcv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcv"))
        .args(args)
        .current_dir(workspace())
        .output()
        .expect("qcv runs")
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn ops_check_passes() {
    let out = qcv(&["ops-check", "--n", "40"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn info_worked_numbers() {
    let out = qcv(&["info", "--n", "6000", "--r", "0.05"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["states"].as_f64().unwrap() - 15.0).abs() < 1e-9);
    let out = qcv(&["info", "--sq", "-20"]);
    assert!((json(&out)["bits"].as_f64().unwrap() - 6.6439).abs() < 1e-4);
}

#[test]
fn info_needs_exactly_one_input() {
    assert_eq!(code(&qcv(&["info", "--n", "100"])), 2);
    assert_eq!(code(&qcv(&["info", "--n", "100", "--r", "0.1", "--sq", "-3"])), 2);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("overlap.json");
    std::fs::write(&cfg, r#"{"atoms": [10], "colour": "red"}"#).unwrap();
    let out = qcv(&["overlap", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn fig2_writes_tables_with_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = qcv(&["fig2", "--config", "configs/fig2.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let inset = std::fs::read_to_string(dir.path().join("fig2_inset.csv")).unwrap();
    assert!(inset.starts_with("L dk / T [1],Z2 [1],Z1 [1],H [rad/s]"));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig2_map.json")).unwrap()).unwrap();
    let notes = meta["assumptions"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("R_B")));
}

#[test]
fn squeeze_output_is_deterministic() {
    let args = ["squeeze", "--protocol", "tact", "--n", "30", "--points", "7"];
    let (a, b) = (qcv(&args), qcv(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn compile_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.json");
    let seq = seq.to_str().unwrap();
    let out = qcv(&["compile", "--target", "Z1^2 + 0.3 X1 Z2", "--dt", "0.02", "--out", seq]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = qcv(&["verify", "--seq", seq, "--n", "4", "--tolerance", "1e-3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["unitarity_deviation"].as_f64().unwrap() < 1e-10);
    assert!(v["min_fidelity"].as_f64().unwrap() > 0.999);
    // the same sequence cannot meet an unreasonable bound
    assert_eq!(code(&qcv(&["verify", "--seq", seq, "--n", "4", "--tolerance", "1e-14"])), 3);
}

#[test]
fn compile_routes_cubic_targets_to_the_gadget_synthesizer() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("x3.json");
    let out = qcv(&["compile", "--target", "X1^3", "--dt", "0.1", "--time", "0.02", "--out", seq.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["method"].as_str().unwrap().starts_with("x3"));
}

#[test]
fn bad_expression_is_a_config_error() {
    let out = qcv(&["compile", "--target", "X1 +* Z", "--dt", "0.1", "--out", "/dev/null"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn network_sweep_from_repo_configs() {
    let out = qcv(&["network", "--spec", "configs/michelson.json", "--sweep", "configs/sweep.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("value [1/m],output_power [1]"));
    assert_eq!(text.lines().count(), 6);
}
