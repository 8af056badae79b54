use std::path::Path;
use std::process::{Command, Output};

fn cvbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvbell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value of `column` in the first data row of a CSV document.
fn column(csv: &str, column: &str) -> f64 {
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let idx = reader
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == column)
        .unwrap_or_else(|| panic!("no column {column}"));
    let row = reader.records().next().expect("one row").unwrap();
    row[idx].parse().unwrap()
}

#[test]
fn symmetric_threshold_at_unit_detection() {
    let o = cvbell(&["threshold", "--symmetric", "--eta-d", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t = column(&stdout(&o), "threshold");
    assert!((t - 0.805).abs() <= 0.005, "threshold {t}");
}

#[test]
fn asymmetric_detection_threshold() {
    let o = cvbell(&["threshold", "--asymmetric", "--target", "detection", "--eta-t", "1"]);
    assert!(o.status.success());
    let t = column(&stdout(&o), "threshold");
    assert!((t - 0.648).abs() <= 0.005, "threshold {t}");
}

#[test]
fn triple_filter_threshold() {
    let o = cvbell(&["local-amp", "--g", "2", "--m", "3", "--eta-d", "1"]);
    assert!(o.status.success());
    let t = column(&stdout(&o), "threshold");
    assert!((t - 0.20).abs() <= 0.02, "threshold {t}");
}

#[test]
fn empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let o = cvbell(&["region", "--eta-d", "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("symmetry,eta_d,"));
}

fn no_files(dir: &Path) -> bool {
    std::fs::read_dir(dir).map(|mut d| d.next().is_none()).unwrap_or(true)
}

#[test]
fn invalid_config_reports_line_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seed = 1\n\n[threshold]\nsymmetry = \"symmetric\"\neta_d = 1.5\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = out_dir.join("t.csv");
    let o = cvbell(&[
        "--config",
        config.to_str().unwrap(),
        "threshold",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.toml:5:"), "{err}");
    assert!(err.contains("eta_d"), "{err}");
    assert!(no_files(&out_dir));
}

#[test]
fn unknown_key_is_rejected_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[solver]\ncutoff = 2\nbogus = 3\n").unwrap();
    let o = cvbell(&["--config", config.to_str().unwrap(), "threshold"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run.toml:3:"), "{err}");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[threshold]\nsymmetry = \"asymmetric\"\n").unwrap();
    let o = cvbell(&["--config", config.to_str().unwrap(), "threshold"]);
    let from_file = column(&stdout(&o), "threshold");
    assert!((from_file - 0.667).abs() <= 0.005);
    let o = cvbell(&["--config", config.to_str().unwrap(), "threshold", "--symmetric"]);
    let overridden = column(&stdout(&o), "threshold");
    assert!((overridden - 0.805).abs() <= 0.005);
}

#[test]
fn out_of_range_flag_fails_validation() {
    let o = cvbell(&["local-amp", "--eta-c", "1.2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cvbell(&["threshold", "--target", "nonsense"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn output_is_deterministic_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        let o = cvbell(&[
            "region",
            "--eta-d",
            "1,0.9,0.8",
            "--workers",
            workers,
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "1");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn sidecar_records_run_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let o = cvbell(&["threshold", "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let meta: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("t.csv.json")).unwrap()).unwrap();
    assert_eq!(meta["schema_version"], 1);
    assert_eq!(meta["command"], "threshold");
    assert_eq!(meta["homodyne_convention"]["name"], "quarter-turn");
    assert!(meta["versions"]["cvbell-core"].is_string());
    assert!(meta["tolerances"]["bisection"].as_f64().unwrap() > 0.0);
    assert!(meta["tolerances"]["quadrature"].as_f64().unwrap() > 0.0);
    assert_eq!(meta["config"]["threshold"]["eta_d"], 1.0);
    assert!(meta["assumptions"].is_array());
}

#[test]
fn multi_filter_curve_rows() {
    let o = cvbell(&["multi-filter", "--max-m", "2"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn reproduce_all_reports_every_row_and_gates() {
    let o = cvbell(&["reproduce-all"]);
    let text = stdout(&o);
    assert!(text.contains("symmetric critical transmission"));
    assert!(text.contains("violation:"));
    let failing = text.lines().filter(|l| l.contains(" FAIL")).count();
    let expected = if failing == 0 { 0 } else { 2 };
    assert_eq!(o.status.code(), Some(expected));
}
