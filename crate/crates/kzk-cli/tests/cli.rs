//! End-to-end tests of the `kzk` binary: exit codes, artifact layout, and
//! byte-stability of the data files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn kzk(args: &[&str], out_root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kzk"))
        .args(args)
        .env("KZK_OUT", out_root)
        .output()
        .expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn eigen_table_prints_squared_integers_for_the_pi_strip() {
    let tmp = TempDir::new().unwrap();
    let out = kzk(&["eigen-table", "--family", "a", "--L", "3.141592653589793", "--count", "16"], tmp.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("l,lambda"));
    for (i, line) in lines.enumerate() {
        let l = (i + 1) as f64;
        let lambda: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((lambda - l * l).abs() < 1e-9, "mode {i}: {lambda}");
    }
}

#[test]
fn usage_errors_exit_64() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(kzk(&["frobnicate"], tmp.path()).status.code(), Some(64));
    assert_eq!(kzk(&[], tmp.path()).status.code(), Some(64));
    assert!(kzk(&["--help"], tmp.path()).status.success());
}

#[test]
fn validate_reports_violations_without_writing_anything() {
    let tmp = TempDir::new().unwrap();
    let good = write_cfg(tmp.path(), "good.cfg", "");
    let bad = write_cfg(
        tmp.path(),
        "bad.cfg",
        "[equation]\nnonlinearity = \"power\"\np = 3.0\n",
    );

    let out = kzk(&["validate", &good], tmp.path());
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "ok");

    let out = kzk(&["validate", &bad], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("p outside [0, 8/3)"));

    let entries: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    let mut sorted = entries.clone();
    sorted.sort();
    assert_eq!(sorted, ["bad.cfg", "good.cfg"], "validate must not create files");
}

#[test]
fn runs_are_byte_identical_and_timestamps_stay_in_the_meta_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "run.cfg",
        "[domain]\nx_max = 15.0\n\
         [discretization]\nnx = 151\nny_modes = 4\nt_final = 0.05\n\
         [initial]\ncenter = 8.0\n\
         [output]\ndirectory = \"art\"\ncadence = 10\n",
    );
    let root1 = tmp.path().join("first");
    let root2 = tmp.path().join("second");
    assert!(kzk(&["run", &cfg], &root1).status.success());
    assert!(kzk(&["run", &cfg], &root2).status.success());

    let csv1 = fs::read(root1.join("art/diagnostics.csv")).unwrap();
    let csv2 = fs::read(root2.join("art/diagnostics.csv")).unwrap();
    assert_eq!(csv1, csv2, "data files must be byte-identical across reruns");
    assert!(root1.join("art/run_meta.txt").exists());

    let header = String::from_utf8_lossy(&csv1).lines().next().unwrap().to_string();
    assert!(header.starts_with("t,mass,"), "unexpected header {header}");
}

#[test]
fn invalid_configs_stop_every_artifact_subcommand() {
    let tmp = TempDir::new().unwrap();
    let bad = write_cfg(tmp.path(), "bad.cfg", "[domain]\nlength = -2.0\n");
    for sub in ["run", "oracle", "inequalities", "experiment"] {
        let out = kzk(&[sub, &bad], tmp.path());
        assert_eq!(out.status.code(), Some(1), "{sub} must refuse the config");
        assert!(String::from_utf8(out.stderr).unwrap().contains("strip width"));
    }
}

#[test]
fn decay_experiment_with_failing_gate_exits_one_with_a_report() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "gate.cfg",
        "[equation]\nb = 1.0\n[experiment]\npreset = \"decay_weak\"\n",
    );
    let out = kzk(&["experiment", &cfg], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("decay threshold"), "stderr: {err}");
}

#[test]
fn conservation_experiment_writes_a_passing_verdict() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "drift.cfg",
        "[experiment]\npreset = \"conservation_drift\"\n[output]\ndirectory = \"exp\"\n",
    );
    let out = kzk(&["experiment", &cfg], tmp.path());
    assert!(out.status.success());
    let verdict = fs::read_to_string(tmp.path().join("exp/conservation_drift_verdict.json")).unwrap();
    assert!(verdict.contains("\"pass\": true"), "{verdict}");
    assert!(tmp.path().join("exp/conservation_drift_meta.txt").exists());
}

#[test]
fn missing_config_file_is_a_runtime_failure() {
    let tmp = TempDir::new().unwrap();
    let out = kzk(&["run", "no_such_file.cfg"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}
