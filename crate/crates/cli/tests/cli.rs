use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_xyzglass"));
    c.env_remove("XYZGLASS_THREADS");
    c
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut c = bin();
    c.args(args);
    if let Some(p) = config {
        c.arg("--config").arg(p);
    }
    c.arg("--out").arg(out).output().expect("binary runs")
}

fn report_path(output: &Output) -> PathBuf {
    let stdout = String::from_utf8_lossy(&output.stdout);
    stdout
        .lines()
        .find_map(|l| l.strip_prefix("report "))
        .map(PathBuf::from)
        .unwrap_or_else(|| panic!("no report line in {stdout}"))
}

fn error_record(output: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&output.stderr);
    serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("{e}: {stderr}"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn selftest_passes_quickly() {
    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = run(&["selftest"], None, tmp.path());
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(report_path(&out)).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["subcommand"], "selftest");
}

#[test]
fn one_site_quadrature_identities() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["verify-identities"], Some(&configs().join("one_site_quadrature.json")), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(report_path(&out)).unwrap()).unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3 * 2 * 5);
    for c in checks {
        assert!(c["value"].as_f64().unwrap().abs() < 1e-8, "{c}");
        assert_eq!(c["method"], "quadrature");
        assert_eq!(c["tolerance"].as_f64().unwrap(), 1e-8);
    }
    assert_eq!(report["config"]["seed"], 1);
    assert_eq!(report["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn phase_region_origin_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["phase-region"], Some(&configs().join("phase_region_origin.json")), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let dir = report_path(&out).parent().unwrap().to_path_buf();
    let csv = std::fs::read_to_string(dir.join("region.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines, ["ratio_x,ratio_y,ratio_z,in_Sx,in_Sy,in_Sz,in_union", "0,0,0,1,1,1,1"]);
}

#[test]
fn reports_are_append_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("phase_region_origin.json");
    let first = report_path(&run(&["phase-region"], Some(&cfg), tmp.path()));
    let original = std::fs::read(&first).unwrap();
    let second = report_path(&run(&["phase-region"], Some(&cfg), tmp.path()));
    assert_eq!(first.file_name().unwrap(), "report.json");
    assert_eq!(second.file_name().unwrap(), "report-2.json");
    assert_eq!(first.parent(), second.parent());
    assert_eq!(std::fs::read(&first).unwrap(), original);
    assert!(second.parent().unwrap().join("region-2.csv").exists());

    let dir_name = first.parent().unwrap().file_name().unwrap().to_str().unwrap().to_string();
    assert!(dir_name.starts_with("0-") && dir_name.len() == 2 + 12, "{dir_name}");
    let reseeded = report_path(&run(&["phase-region", "--seed", "9"], Some(&cfg), tmp.path()));
    assert!(reseeded.parent().unwrap().file_name().unwrap().to_str().unwrap().starts_with("9-"));
}

#[test]
fn schema_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(tmp.path(), "unknown.json", r#"{ "phase_region": { "beta_t": 1.0 }, "colour": 3 }"#);
    let out = run(&["phase-region"], Some(&unknown), tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let record = error_record(&out);
    assert_eq!(record["error"], "config");
    assert_eq!(record["exit_code"], 2);

    let missing_beta_t = write_config(tmp.path(), "nobt.json", r#"{ "phase_region": { "queries": [] } }"#);
    assert_eq!(run(&["phase-region"], Some(&missing_beta_t), tmp.path()).status.code(), Some(2));

    let gauge_clash = write_config(
        tmp.path(),
        "clash.json",
        r#"{
  "lattice": { "dim": 1, "size": 2 },
  "couplings": [ { "p": 2, "mean": { "x": 0.1, "y": 0.1, "z": 0.1 }, "std": { "x": 1, "y": 1, "z": 1 } } ],
  "gauge_axis": "z",
  "observables": [ { "x": [0], "axis": "z" } ]
}"#,
    );
    assert_eq!(run(&["verify-identities"], Some(&gauge_clash), tmp.path()).status.code(), Some(2));

    // nothing was computed or written for rejected configs
    assert_eq!(std::fs::read_dir(tmp.path()).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).count(), 0);
}

#[test]
fn capacity_errors_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let big = write_config(
        tmp.path(),
        "big.json",
        r#"{
  "lattice": { "dim": 1, "size": 20 },
  "couplings": [ { "p": 2, "mean": { "x": 0.1, "y": 0.1, "z": 0.1 }, "std": { "x": 1, "y": 1, "z": 1 } } ],
  "observables": [ { "x": [0], "axis": "z" } ]
}"#,
    );
    let out = run(&["verify-identities"], Some(&big), tmp.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"], "capacity");

    let grid = write_config(
        tmp.path(),
        "grid.json",
        r#"{ "phase_region": { "beta_t": 1.0, "grid": {
  "x": { "min": 0, "max": 1, "count": 1000 },
  "y": { "min": 0, "max": 1, "count": 1000 },
  "z": { "min": 0, "max": 1, "count": 1000 } } } }"#,
    );
    assert_eq!(run(&["phase-region"], Some(&grid), tmp.path()).status.code(), Some(3));
}

#[test]
fn failed_assertions_exit_1() {
    // zero statistical tolerance cannot absorb Monte Carlo noise
    let tmp = tempfile::tempdir().unwrap();
    let strict = write_config(
        tmp.path(),
        "strict.json",
        r#"{
  "lattice": { "dim": 1, "size": 2 },
  "couplings": [ { "p": 2, "mean": { "x": 0.4, "y": 0.3, "z": 0.7 }, "std": { "x": 0.9, "y": 0.8, "z": 1.1 } } ],
  "observables": [ { "x": [0], "y": [1], "axis": "z" } ],
  "method": { "kind": "mc", "n_samples": 50 },
  "tolerances": { "sigmas": 0.0 }
}"#,
    );
    let out = run(&["verify-identities"], Some(&strict), tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(report_path(&out)).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["config"]["tolerances"]["sigmas"], 0.0);
}

#[test]
fn io_errors_exit_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["verify-bounds"], Some(&tmp.path().join("absent.json")), tmp.path());
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_record(&out)["error"], "io");
}

#[test]
fn thread_override_is_validated() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .env("XYZGLASS_THREADS", "many")
        .args(["phase-region", "--config"])
        .arg(configs().join("phase_region_origin.json"))
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_and_order_params_configs_run() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["verify-bounds"], Some(&configs().join("bounds_chain.json")), tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(report_path(&out)).unwrap()).unwrap();
    let names: Vec<&str> = report["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    for name in ["magnetization_bound", "susceptibility_bound", "a2_second_difference", "a1_sum", "a1_clip_fraction"] {
        assert!(names.contains(&name), "{name} missing");
    }

    let out = run(&["order-params"], Some(&configs().join("order_params_mu1.json")), tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let dir = report_path(&out).parent().unwrap().to_path_buf();
    let csv = std::fs::read_to_string(dir.join("order_params.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);
    assert!(csv.starts_with("beta,mu1,m_x,m_x_se"));
}
