use std::process::{Command, Output};

use serde_json::Value;

fn unext(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unext"))
        .args(args)
        .env_remove("UNEXT_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn state_oneshot_regimes_and_exit_codes() {
    let out = unext(&["bound", "state-oneshot", "--family", "iso", "--F", "0.99", "--d", "2", "--eps", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["regime"], "Finite");
    assert_eq!(v["method"], "smooth-min");
    assert!(v["bound"].as_f64().unwrap() > 1.0);

    let out = unext(&["bound", "state-oneshot", "--family", "iso", "--F", "0.9", "--d", "2", "--eps", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["regime"], "Zero");

    let out = unext(&["bound", "state-oneshot", "--family", "maxent", "--d", "2", "--eps", "0.3", "--method", "relaxed-td"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["regime"], "NoBound");
    assert!(v["bound"].is_null());
}

#[test]
fn channel_commands() {
    let out = unext(&["bound", "channel-oneshot", "--family", "erasure", "--p", "0.5", "--d", "2", "--eps", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["regime"], "Zero");

    let out = unext(&["bound", "channel-oneshot", "--family", "identity", "--d", "2"]);
    let v = json(&out);
    assert!((v["bound"].as_f64().unwrap() - 1.0).abs() < 1e-7);

    let out = unext(&["bound", "channel-nshot", "--family", "erasure", "--p", "0.3", "--eps", "1e-7", "--n", "4", "--ell", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ell"], 1);
    assert_eq!(v["alpha"], 1.5);
    assert_eq!(v["n"], 4);
    assert!((v["per_copy_bound"].as_f64().unwrap() - v["bound"].as_f64().unwrap() / 4.0).abs() < 1e-12);
}

#[test]
fn measures() {
    let v = json(&unext(&["bound", "measure", "--kind", "emax", "--family", "maxent", "--d", "3"]));
    assert!((v["E"].as_f64().unwrap() - 3f64.log2()).abs() < 1e-6);
    let v = json(&unext(&["bound", "measure", "--kind", "channel-geo", "--family", "erasure", "--p", "0.25", "--ell", "0"]));
    assert!((v["E"].as_f64().unwrap() - 0.5 * 1.75f64.log2()).abs() < 1e-6);
    assert_eq!(v["alpha"], 2.0);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(unext(&["bound", "state-oneshot", "--nope"]).status.code(), Some(64));
    assert_eq!(unext(&["bound", "state-oneshot", "--family", "iso"]).status.code(), Some(64));
    assert_eq!(unext(&["bound", "state-oneshot", "--family", "erasure", "--p", "0.1"]).status.code(), Some(64));
    assert_eq!(unext(&["bound", "state-oneshot", "--family", "iso", "--F", "0.9", "--eps", "2"]).status.code(), Some(64));
    assert_eq!(unext(&["run", "--experiment", "bogus"]).status.code(), Some(64));
    assert_eq!(unext(&["--help"]).status.code(), Some(0));
    assert_eq!(unext(&["--version"]).status.code(), Some(0));
}

#[test]
fn state_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.json");
    let phi = unext::quantum::max_entangled(2).unwrap();
    std::fs::write(&path, serde_json::to_string(&phi.to_json()).unwrap()).unwrap();
    let v = json(&unext(&["bound", "state-oneshot", "--family", "file", "--file", path.to_str().unwrap()]));
    assert!((v["bound"].as_f64().unwrap() - 1.0).abs() < 1e-7);
    assert_eq!(unext(&["bound", "state-oneshot", "--family", "file", "--file", "/nonexistent.json"]).status.code(), Some(1));
}

#[test]
fn run_and_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        "experiment = \"erasure-oneshot\"\n[grid]\np = [0.1, 0.3, 0.5]\nd = [2]\nepsilon = [0.05]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = unext(&["run", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--sequential"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["rows"], 3);
    let csv = out_dir.join("erasure-oneshot.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("d,epsilon,p,bound,regime,E,J,method\n"));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("erasure-oneshot.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["execution"], "sequential");
    assert_eq!(manifest["config"]["experiment"], "erasure-oneshot");

    let check = unext(&["check", csv.to_str().unwrap()]);
    assert_eq!(check.status.code(), Some(0));
    std::fs::write(&csv, text.replacen(",Zero,", ",Finite,", 1)).unwrap();
    assert_eq!(unext(&["check", csv.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_unext"))
        .args(["run", "--experiment", "iso-nshot-emax"])
        .env("UNEXT_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("iso-nshot-emax.csv").exists());
    assert!(dir.path().join("iso-nshot-emax.manifest.json").exists());
}
