use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn menid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_menid")).args(args).output().unwrap()
}

fn reference(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/reference").join(file)
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

#[test]
fn help_succeeds() {
    for cmd in [vec!["--help"], vec!["learn", "--help"], vec!["calibrate", "--help"]] {
        assert!(menid(&cmd).status.success());
    }
}

#[test]
fn missing_rules_file_is_a_config_error() {
    let out = menid(&["validate", "--rules", "/nonexistent/rules.json", "--env", reference("target.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/rules.json"));
}

#[test]
fn invalid_parameters_exit_with_two() {
    let cfg = reference("config.json");
    let out = menid(&["learn", "--config", cfg.to_str().unwrap(), "--set", "penalty=-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = menid(&["calibrate", "--dist", "0.7,0.7"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reference_scenario_validates() {
    let out = menid(&["validate", "--config", reference("config.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn calibrate_writes_one_row_per_sample_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = menid(&[
        "calibrate", "--dist", "0.5,0.5", "--max-n", "400", "-S", "200", "--out", dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&dir.path().join("calibration.csv"));
    assert_eq!(rows.len(), 1 + 400);
    assert_eq!(rows[0][0], "N");
    assert_eq!(rows[1][0], "1");
    assert_eq!(rows[400][0], "400");
}

#[test]
fn experiment_writes_a_curve_per_setting() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = reference("config.json");
    let out = menid(&[
        "experiment", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap(),
        "--set", "replications=1", "--set", "divergence_repeats=5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let curves: Vec<PathBuf> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap().to_string_lossy().starts_with("reward_curve_"))
        .collect();
    assert_eq!(curves.len(), 6);
    for c in &curves {
        let rows = read_csv(c);
        assert_eq!(rows[0], ["time", "mean", "std"]);
        assert_eq!(rows.len(), 1 + 60);
        // A single replication has no spread.
        assert!(rows[1..].iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
    }
    assert!(dir.path().join("divergence.csv").exists());
}
