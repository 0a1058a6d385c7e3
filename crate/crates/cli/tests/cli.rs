use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dirac-lab"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn algebra_check_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--json", "algebra-check", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("alpha_anticommutators"), "{text}");
    assert!(text.contains("\"failed\": []"), "{text}");
    let report = std::fs::read_to_string(dir.path().join("algebra_report.json")).unwrap();
    assert!(report.contains("eigenpairs_3d"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"pass\""));
    assert!(!manifest.contains("\"fail\""));
}

#[test]
fn algebra_check_detects_injected_fault() {
    let out = bin().args(["algebra-check", "--inject-fault"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAILED"), "{text}");
    assert!(text.contains("hermiticity"), "{text}");
}

#[test]
fn bundled_aligned_sweep_converges_and_is_deterministic() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = bin()
            .args(["sweep", "--spec"])
            .arg(config("aligned-1d.toml"))
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let csv = std::fs::read_to_string(dir_a.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5, "header plus one row per epsilon");
    assert!(csv.starts_with("epsilon,t,pairing,closed_form,abs_error"));
    let csv_b = std::fs::read_to_string(dir_b.path().join("sweep.csv")).unwrap();
    assert_eq!(csv, csv_b, "repeated runs must be bit-identical");

    let report = std::fs::read_to_string(dir_a.path().join("report.json")).unwrap();
    assert!(report.contains("\"verdict\": \"converged\""), "{report}");
    let manifest = std::fs::read_to_string(dir_a.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("sweep.csv"));
    let parsed: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(parsed["spec_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn bundled_divergence_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["--json", "sweep", "--spec"])
        .arg(config("divergence-3d.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let report = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&report).unwrap();
    let slope = parsed["slope"].as_f64().unwrap();
    assert!((slope - 3.0).abs() < 0.5, "slope {slope}");
}

#[test]
fn invalid_spec_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let good = std::fs::read_to_string(config("aligned-1d.toml")).unwrap();
    std::fs::write(&path, good.replace("[0.2, 0.1, 0.05, 0.025]", "[0.1, 0.2]")).unwrap();
    let out = bin().args(["sweep", "--spec"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon_not_decreasing"), "{}", stderr(&out));
}

#[test]
fn missing_arguments_exit_with_usage_code() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["sweep"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn extfield_free_run_emits_step_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["extfield", "--spec"])
        .arg(config("extfield-free.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let steps = std::fs::read_to_string(dir.path().join("steps.csv")).unwrap();
    assert!(steps.starts_with("t,norm,defect_sup"));
    assert_eq!(steps.lines().count(), 11, "header plus one row per step");
    let refinement = std::fs::read_to_string(dir.path().join("refinement.json")).unwrap();
    assert!(refinement.contains("observed_order"));
}

#[test]
fn evolve_writes_density_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["evolve-1d", "--spec"])
        .arg(config("general-1d.toml"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let density = std::fs::read_to_string(dir.path().join("density_00.csv")).unwrap();
    assert!(density.starts_with("x,t,density"));
    assert!(density.lines().count() > 1000);
    assert!(dir.path().join("plot.gp").exists());
}
