use std::path::Path;
use std::process::{Command, Output};

fn expansive(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_expansive"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_spec(dir: &Path, item: &str) -> String {
    let out = expansive(&["gallery", item, "--print-spec"]);
    assert_eq!(code(&out), 0);
    let path = dir.join(format!("{item}.json"));
    std::fs::write(&path, &out.stdout).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn example1_check_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example1");
    let out = expansive(&["check", "--spec", &spec]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    for check in ["metric axioms", "order axioms", "surjectivity", "right inverse increasing", "phi-expansive"] {
        assert!(text.contains(&format!("[PASS] {check}")), "{check} missing from\n{text}");
    }
}

#[test]
fn example1_eta3_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example1");
    let out = expansive(&["check", "--spec", &spec, "--eta", "3"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("[FAIL] phi-expansive"));
}

#[test]
fn malformed_spec_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{\"space\": {\"kind\": \"shrinking_fractions\"}, \"eta\": }").unwrap();
    let out = expansive(&["check", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spec parse error") && err.contains("line 1"), "{err}");
}

#[test]
fn unknown_field_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"space": {"kind": "real_interval", "a": 0, "b": 1},
            "u": {"kind": "linear", "slope": 0.25, "offset": 1},
            "growth": {"name": "exp_t"}, "eta": 2}"#,
    )
    .unwrap();
    let out = expansive(&["check", "--spec", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("u") && err.contains("offset"), "{err}");
}

#[test]
fn missing_spec_file_exits_two() {
    let out = expansive(&["check", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn invalid_eta_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example1");
    let out = expansive(&["check", "--spec", &spec, "--eta", "0.5"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn ordered_solve_from_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example1");
    let out = expansive(&["solve", "--spec", &spec, "--theorem", "ordered", "--x0", "0", "--json"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["traces"][0]["summary"]["final_point"], "0");
    assert_eq!(report["traces"][0]["summary"]["verdict"], "converged");
}

#[test]
fn ordered_solve_start_condition_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example1");
    let out = expansive(&["solve", "--spec", &spec, "--theorem", "ordered", "--x0", "0.2"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("start condition"));
}

#[test]
fn common_solve_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example2");
    let out_dir = dir.path().join("out");
    let out = expansive(&[
        "solve",
        "--spec",
        &spec,
        "--theorem",
        "common",
        "--strict",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let csv = std::fs::read_to_string(out_dir.join("common.csv")).unwrap();
    assert!(csv.starts_with("n,point,step_distance\n"));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("common.json")).unwrap()).unwrap();
    assert_eq!(summary["verdict"], "converged");
    assert_eq!(summary["s"], 0.5);
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn strict_solve_refuses_failed_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example2");
    let out = expansive(&["solve", "--spec", &spec, "--eta", "4", "--strict"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("solver not run"));
}

#[test]
fn gallery_items_succeed() {
    for item in ["example1", "example2", "wang_linear", "theta_profile"] {
        let out = expansive(&["gallery", item]);
        assert_eq!(code(&out), 0, "{item}\n{}", stdout(&out));
        assert!(!stdout(&out).contains("MISMATCH"));
    }
}

#[test]
fn unknown_gallery_item_exits_two() {
    assert_eq!(code(&expansive(&["gallery", "example3"])), 2);
}

#[test]
fn falsify_finds_witness() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example1");
    let out = expansive(&["falsify", "--spec", &spec, "--condition", "wang", "--eta", "1.01", "--budget", "512"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("[FAIL] search: wang expansive"));
    let out = expansive(&["falsify", "--spec", &spec, "--budget", "256"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
}

#[test]
fn report_json_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "example2");
    let first = expansive(&["check", "--spec", &spec, "--json"]);
    let report: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let echoed = dir.path().join("echo.json");
    std::fs::write(&echoed, serde_json::to_string(&report["spec"]).unwrap()).unwrap();
    let second = expansive(&["check", "--spec", echoed.to_str().unwrap(), "--json"]);
    let again: serde_json::Value = serde_json::from_slice(&second.stdout).unwrap();
    assert_eq!(report["checks"], again["checks"]);
    assert_eq!(report["verdict"], again["verdict"]);
}
