use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::tempdir;

fn boxnn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boxnn"))
        .args(args)
        .env_remove("BOXNN_DATA_DIR")
        .output()
        .unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = boxnn(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_train_certify_eval() {
    let dir = tempdir().unwrap();
    let data = dir.path().join("data");
    let config = dir.path().join("synth.toml");
    let model = dir.path().join("m.bin");
    std::fs::write(&config, "boxes = 2\nepochs = 5\nbatch_size = 32\nlr = 0.01\ntau = 5.0\nclip = 3.0\nstratified = true\n").unwrap();

    json_ok(&[
        "--json",
        "synth",
        "--samples-per-class",
        "50",
        "--out",
        s(&data.join("synth")),
    ]);
    let trained = json_ok(&[
        "--json",
        "train",
        "--data-dir",
        s(&data),
        "--dataset",
        "synth",
        "--config",
        s(&config),
        "--out",
        s(&model),
    ]);
    assert_eq!(trained["history"].as_array().unwrap().len(), 5);

    let one = json_ok(&[
        "--json",
        "certify",
        "--data-dir",
        s(&data),
        "--dataset",
        "synth",
        "--model",
        s(&model),
        "--index",
        "0",
    ]);
    assert!(one["certificate"]["certified_radius"].as_u64().is_some());

    let certs = dir.path().join("certs.csv");
    let out = boxnn(&[
        "certify",
        "--data-dir",
        s(&data),
        "--dataset",
        "synth",
        "--model",
        s(&model),
        "--out",
        s(&certs),
    ]);
    assert!(out.status.success());
    assert_eq!(
        std::fs::read_to_string(&certs).unwrap().lines().count(),
        1 + 100
    );

    let baselines = dir.path().join("baselines.csv");
    std::fs::write(&baselines, "method,eps,acc\nA,0,0.5\nB,1,0.25\n").unwrap();
    let report = dir.path().join("report");
    let eval = json_ok(&[
        "--json",
        "eval",
        "--data-dir",
        s(&data),
        "--dataset",
        "synth",
        "--model",
        s(&model),
        "--baselines",
        s(&baselines),
        "--out",
        s(&report),
    ]);
    assert_eq!(eval["clean_accuracy"].as_f64(), Some(1.0));
    assert!(eval["median_certified_radius"].as_i64().unwrap() >= 1);
    let table = std::fs::read_to_string(report.join("comparison.csv")).unwrap();
    assert!(table.starts_with("eps,Box-NN,A,B\n"));
}

#[test]
fn verify_small_run_passes() {
    let v = json_ok(&[
        "--json",
        "verify",
        "--instances",
        "5",
        "--inputs",
        "3",
        "--mc-samples",
        "2000",
    ]);
    assert_eq!(v["pass"], Value::Bool(true));
    assert_eq!(v["soundness"]["violations"].as_u64(), Some(0));
}

#[test]
fn failures_exit_nonzero_with_json_error() {
    let dir = tempdir().unwrap();
    let out = boxnn(&[
        "eval",
        "--data-dir",
        s(dir.path()),
        "--model",
        s(&dir.path().join("missing.bin")),
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("missing.bin"));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "boxes = 0\n").unwrap();
    let out = boxnn(&[
        "train",
        "--data-dir",
        s(dir.path()),
        "--config",
        s(&bad),
        "--out",
        s(&dir.path().join("m")),
    ]);
    assert_eq!(out.status.code(), Some(1));

    assert!(!boxnn(&["eval"]).status.success());
}
