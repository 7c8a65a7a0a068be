//! Drives the `dadmms` binary end to end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dadmms::metrics::CSV_HEADER;

const BIN: &str = env!("CARGO_BIN_EXE_dadmms");

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn dadmms(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("DADMMS_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn small_run(dir: &Path, workers: &str) -> Vec<u8> {
    let cfg = config_path("linreg_ring5.toml");
    let out = dir.join(format!("w{workers}"));
    let o = dadmms(&[
        "run",
        cfg.to_str().unwrap(),
        "--trials",
        "4",
        "--iters",
        "10",
        "--seed",
        "3",
        "--workers",
        workers,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(out.join("series.csv")).unwrap()
}

#[test]
fn theory_prints_ring5_constants() {
    let cfg = config_path("theory_ring5.toml");
    let o = dadmms(&["theory", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1.70"), "{text}");
    assert!(text.contains("1.236"), "{text}");
}

#[test]
fn theory_json_is_machine_readable() {
    let cfg = config_path("theory_ring5.toml");
    let o = dadmms(&["theory", cfg.to_str().unwrap(), "--json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["tau_g"].as_f64().unwrap() - 1.7013).abs() < 1e-3);
    assert!((v["tau_f_threshold"].as_f64().unwrap() - 1.2361).abs() < 1e-3);
    assert_eq!(v["condition_holds"].as_bool(), Some(true));
}

#[test]
fn missing_hyperparameter_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config_path("linreg_ring5.toml")).unwrap();
    let broken = dir.path().join("broken.toml");
    fs::write(&broken, text.replace("rho = 5.0", "")).unwrap();
    let o = dadmms(&["run", broken.to_str().unwrap(), "--trials", "1", "--iters", "1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho"));
}

#[test]
fn run_writes_series_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = config_path("linreg_ring5.toml");
    let o = dadmms(&[
        "run",
        cfg.to_str().unwrap(),
        "--trials",
        "2",
        "--iters",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    // iterations 0 and 1, five agents plus the average
    assert_eq!(lines.count(), 2 * 6);
    let manifest: toml::Value = toml::from_str(&fs::read_to_string(out.join("manifest.toml")).unwrap()).unwrap();
    assert_eq!(manifest["trial_seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn output_is_identical_across_reruns_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = small_run(dir.path(), "1");
    let b = small_run(dir.path(), "1");
    let c = small_run(dir.path(), "3");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn compare_merges_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let cfg = config_path("linreg_ring5_compare.toml");
    let o = dadmms(&[
        "compare",
        cfg.to_str().unwrap(),
        "--trials",
        "2",
        "--iters",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("compare.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 5 * 3 * 6);
    for alg in ["dadmms", "admm", "dsgld", "dsghmc", "dula"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("{alg},"))).count(), 18);
    }
}

#[test]
fn verify_lemma1_passes() {
    let o = dadmms(&["verify", "lemma1", config_path("linreg_ring5.toml").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
}

#[test]
fn selftest_passes() {
    let o = dadmms(&["selftest"]);
    assert!(o.status.success(), "{}", stdout(&o));
}
