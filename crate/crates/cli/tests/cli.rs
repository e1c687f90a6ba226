use std::path::{Path, PathBuf};

use assert_cmd::Command;
use tempfile::TempDir;

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn example(name: &str) -> PathBuf {
    problems_dir().join(format!("{name}.json"))
}

fn idepca() -> Command {
    Command::cargo_bin("idepca").unwrap()
}

fn write_problem(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stdout_of(args: &[&str]) -> String {
    let out = idepca().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

const DEPCA: &str = r#"{
  "a": "-1", "b": "-1/3", "direction": "delayed", "k": 3,
  "impulse": "none",
  "initial_window": [1, 1, 1, 1], "n0": 0, "horizon": 30
}"#;

#[test]
fn coeffs_example1_golden_rows() {
    let csv = stdout_of(&["coeffs", example("example1").to_str().unwrap()]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,a_n,b_n,alpha_n,q_n");
    assert_eq!(lines[1], "0,0.1839397206,-0.1053534265,1.000000000,");
    assert_eq!(lines[2], "1,0.1839397206,-0.1053534265,5.436563657,");
    assert_eq!(lines[4], "3,0.1839397206,-0.1053534265,160.6842954,-92.03363496");
    assert_eq!(lines.len(), 61);
    assert!(csv.ends_with('\n'));
}

#[test]
fn coeffs_example2_row_five() {
    let csv = stdout_of(&["coeffs", example("example2").to_str().unwrap()]);
    let row = csv.lines().find(|l| l.starts_with("5,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields[1], "0.6000000000");
    assert_eq!(fields[2], "0.1000000000");
}

#[test]
fn coeffs_to_file_matches_stdout() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("coeffs.csv");
    let file = example("example1");
    idepca()
        .args(["coeffs", file.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .assert()
        .success();
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        stdout_of(&["coeffs", file.to_str().unwrap()])
    );
}

#[test]
fn outputs_are_deterministic() {
    let file = example("example1");
    let file = file.to_str().unwrap();
    for cmd in ["coeffs", "analyze", "check"] {
        assert_eq!(stdout_of(&[cmd, file]), stdout_of(&[cmd, file]), "{cmd}");
    }
    let dir = TempDir::new().unwrap();
    let (d1, d2) = (dir.path().join("one"), dir.path().join("two"));
    for d in [&d1, &d2] {
        idepca()
            .args(["simulate", file, "--samples", "8", "--out", d.to_str().unwrap()])
            .assert()
            .success();
    }
    for name in ["trajectory.csv", "nodes.csv", "verdict.json"] {
        assert_eq!(
            std::fs::read(d1.join(name)).unwrap(),
            std::fs::read(d2.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn schema_error_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let bad = write_problem(
        &dir,
        "bad.json",
        &DEPCA.replace(r#""n0": 0"#, r#""n0": 0, "extra": true"#),
    );
    let out = dir.path().join("out.csv");
    idepca()
        .args(["coeffs", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .assert()
        .code(2);
    assert!(!out.exists());

    let missing = dir.path().join("absent.json");
    idepca().args(["analyze", missing.to_str().unwrap()]).assert().code(2);
}

#[test]
fn zero_jump_factor_exits_2() {
    let dir = TempDir::new().unwrap();
    let bad = write_problem(
        &dir,
        "zero.json",
        &DEPCA.replace(r#""none""#, r#"{"table": [1, 1, 1, 0], "default": 1}"#),
    );
    idepca().args(["check", bad.to_str().unwrap()]).assert().code(2);
}

#[test]
fn numeric_failure_exits_3_without_output() {
    let dir = TempDir::new().unwrap();
    // a is singular at t = 2, inside the integration range
    let bad = write_problem(&dir, "sing.json", &DEPCA.replace(r#""a": "-1""#, r#""a": "1/(t-2)""#));
    let out = dir.path().join("out.csv");
    let assert = idepca()
        .args(["coeffs", bad.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .assert()
        .code(3);
    let stderr = String::from_utf8_lossy(&assert.get_output().stderr).to_string();
    assert!(stderr.contains("n = "), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn simulate_example1_nodes_halve() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sim");
    idepca()
        .args([
            "simulate",
            example("example1").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .assert()
        .success();
    let nodes = std::fs::read_to_string(out.join("nodes.csv")).unwrap();
    let mut lines = nodes.lines();
    assert_eq!(lines.next(), Some("n,z_left,z_right,jump_factor"));
    let mut count = 0;
    for line in lines {
        let f: Vec<f64> = line.split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[2], 0.5);
        assert!((f[1] - 0.5 * f[0]).abs() <= 1e-9 * f[0].abs().max(1e-300), "{line}");
        count += 1;
    }
    assert_eq!(count, 60);
    let traj = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("t,z\n0.000000000,1.000000000\n"));
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["discrete"]["verdict"], "Oscillatory");
    assert_eq!(verdict["continuous"]["verdict"], "Oscillatory");
}

#[test]
fn simulate_depca_is_continuous() {
    let dir = TempDir::new().unwrap();
    let file = write_problem(&dir, "depca.json", DEPCA);
    let out = dir.path().join("sim");
    idepca()
        .args(["simulate", file.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .assert()
        .success();
    let verdict: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("verdict.json")).unwrap()).unwrap();
    assert!(verdict["max_node_discontinuity"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn analyze_example1_oscillatory() {
    let json = stdout_of(&["analyze", example("example1").to_str().unwrap()]);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(doc["overall_verdict"], "Oscillatory");
    let ez = doc["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["criterion_id"] == "ErbeZhang")
        .unwrap();
    assert_eq!(ez["verdict"], "Fires");
    assert_eq!(ez["threshold"].as_f64().unwrap(), 27.0 / 256.0);
    for key in ["statistic", "margin", "convergence_flag", "precondition_violations"] {
        assert!(ez.get(key).is_some(), "{key}");
    }
}

#[test]
fn analyze_advanced_without_b_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    let file = write_problem(
        &dir,
        "adv.json",
        r#"{"a": "-1", "b": "0", "direction": "advanced", "k": 2, "impulse": "none",
            "initial_window": [1, 1, 1], "n0": 0, "horizon": 40}"#,
    );
    let doc: serde_json::Value = serde_json::from_str(&stdout_of(&["analyze", file.to_str().unwrap()])).unwrap();
    assert_eq!(doc["overall_verdict"], "Inconclusive");
    let nonosc = doc["criteria"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["criterion_id"] == "OcalanAkinNonOsc")
        .unwrap();
    assert_eq!(nonosc["verdict"], "PreconditionViolated");
}

#[test]
fn check_example1_passes() {
    let table = stdout_of(&["check", example("example1").to_str().unwrap()]);
    assert!(table.ends_with("all checks passed\n"), "{table}");
    assert!(table.contains("dual_route_q"));
}

#[test]
fn check_depca_runs_continuity_row() {
    let dir = TempDir::new().unwrap();
    let file = write_problem(&dir, "depca.json", DEPCA);
    let table = stdout_of(&["check", file.to_str().unwrap()]);
    let row = table.lines().find(|l| l.starts_with("depca_continuity")).unwrap();
    assert!(row.contains("PASS"), "{row}");
}

#[test]
fn flag_validation() {
    let file = example("example1");
    let file = file.to_str().unwrap();
    idepca().args(["coeffs", file, "--tol", "-1"]).assert().code(2);
    idepca().args(["analyze", file, "--tail", "1.5"]).assert().code(2);
    idepca().args(["simulate", file, "--samples", "0"]).assert().code(2);
    let csv = stdout_of(&["coeffs", file, "--horizon", "10"]);
    assert_eq!(csv.lines().count(), 11);
}
