use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neumann-layers"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn json(dir: &Path, name: &str) -> serde_json::Value {
    serde_json::from_str(&read(dir, name)).unwrap()
}

#[test]
fn basis_writes_table_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["basis", "--N", "4", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let table = read(dir.path(), "basis_table.csv");
    let header = table.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "r,xi,dxi,zeta,dzeta");
    assert_eq!(table.lines().filter(|l| !l.starts_with('#')).count(), 1002);
    let report = json(dir.path(), "basis_report.json");
    assert_eq!(report["meta"]["command"], "basis");
}

#[test]
fn limit_reports_reflection_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["limit", "--N", "3", "--k", "1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let cfg = json(dir.path(), "limit_config.json");
    let alpha = cfg["limit"]["alpha"][0].as_f64().unwrap();
    assert!((alpha - 0.79681213).abs() < 1e-8, "{alpha}");
    assert!(read(dir.path(), "limit_profile.csv").contains("r,u,du,piece_index"));
}

#[test]
fn output_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for cmd in ["basis", "limit"] {
        let files: &[&str] = if cmd == "basis" {
            &["basis_report.json", "basis_table.csv"]
        } else {
            &["limit_config.json", "limit_profile.csv"]
        };
        assert_eq!(run(&[cmd, "--N", "3", "--k", "3", "--out", d]).status.code(), Some(0));
        let first: Vec<String> = files.iter().map(|f| read(dir.path(), f)).collect();
        assert_eq!(run(&[cmd, "--N", "3", "--k", "3", "--out", d]).status.code(), Some(0));
        let second: Vec<String> = files.iter().map(|f| read(dir.path(), f)).collect();
        assert_eq!(first, second, "{cmd}");
    }
}

#[test]
fn solve_one_layer() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve",
        "--N",
        "3",
        "--p",
        "100",
        "--k",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let sol = json(dir.path(), "solution.json");
    assert!(sol.to_string().contains("invariants_hold"));
    assert!(read(dir.path(), "profile.csv").lines().count() > 100);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run(&["limit", "--N", "2", "--out", d]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--p", "1", "--out", d]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--p", "50,100", "--out", d]).status.code(), Some(1));
    assert_eq!(
        run(&["validate", "--check", "bogus", "--out", d]).status.code(),
        Some(1)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, "{\n  \"N\": 3,\n  \"k\": 0\n}\n").unwrap();
    let out = run(&[
        "limit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn solver_failure_exits_three_with_error_file() {
    let dir = tempfile::tempdir().unwrap();
    // The ball is too short for two layers at this exponent.
    let out = run(&["solve", "--p", "100", "--k", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = json(dir.path(), "solve_error.json");
    assert!(err["error"]["kind"].is_string() && err["error"]["message"].is_string());
}

#[test]
fn validate_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "validate",
        "--p",
        "100,200",
        "--check",
        "pohozaev,blowup",
        "--format",
        "csv",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(read(dir.path(), "validation_report.txt").contains("pohozaev"));
    assert!(json(dir.path(), "validation_report.json").is_object());
    assert!(read(dir.path(), "validation_trend.csv").lines().count() >= 3);
}

#[test]
fn quiet_suppresses_stdout_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["limit", "--k", "2", "--quiet", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("limit_config.json").exists());
}
