//! Black-box tests of the `berlab` binary: exit codes, file outputs, and
//! stdout formats.

use std::path::Path;
use std::process::{Command, Output};

fn berlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_berlab"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const IDENTITY_GRAM: &str =
    r#"{"kind": "gram", "gram": [[[1.0,0.0],[0.0,0.0]],[[0.0,0.0],[1.0,0.0]]]}"#;
const DOUBLE_IDENTITY: &str =
    r#"{"dim": 2, "entries": [[[2.0,0.0],[0.0,0.0]],[[0.0,0.0],[2.0,0.0]]]}"#;
const SZEGO_PAIR: &str = r#"{"kind": "szego", "points": [[0.0,0.0],[0.5,0.0]]}"#;

#[test]
fn check_writes_report_and_exits_zero_on_clean_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let result = berlab(&[
        "check",
        "--seed",
        "11",
        "--trials",
        "4",
        "--dims",
        "2,3",
        "--omega",
        "2,4",
        "--kernels",
        "szego,fock",
        "--bounds",
        "B-T2,B-EQN1",
        "--tol",
        "1e-9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["total_violations"], 0);
    assert_eq!(report["config"]["seed"], 11);
    assert_eq!(report["per_bound"]["B-T2"]["checked"], 4);
    assert_eq!(report["per_bound"]["B-EQN1"]["violations"], 0);
}

#[test]
fn check_streams_json_to_stdout_without_out_flag() {
    let result = berlab(&[
        "check",
        "--trials",
        "2",
        "--dims",
        "2",
        "--omega",
        "2",
        "--kernels",
        "szego",
        "--bounds",
        "B-T1-i",
    ]);
    assert!(result.status.success());
    let report: serde_json::Value = serde_json::from_slice(&result.stdout).unwrap();
    assert_eq!(report["config"]["trials"], 2);
}

#[test]
fn check_rejects_bad_configs_and_unknown_bounds() {
    let result = berlab(&["check", "--trials", "0"]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!result.stderr.is_empty());

    let result = berlab(&["check", "--bounds", "B-NOPE"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn shell_emits_exact_csv_for_an_exact_model() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "space.json", IDENTITY_GRAM);
    let op = write(dir.path(), "op.json", DOUBLE_IDENTITY);
    let out = dir.path().join("shell.csv");
    let result = berlab(&[
        "shell",
        "--space",
        &space,
        "--op",
        &op,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(
        csv,
        "label_re,label_im,symbol_re,symbol_im,image_norm_sq\n0,0,2,0,4\n1,0,2,0,4\n"
    );
}

#[test]
fn shell_streams_to_stdout_without_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "space.json", SZEGO_PAIR);
    let op = write(dir.path(), "op.json", DOUBLE_IDENTITY);
    let result = berlab(&["shell", "--space", &space, "--op", &op]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.starts_with("label_re,label_im,"));
    assert_eq!(text.trim_end().lines().count(), 3);
}

#[test]
fn shell_rejects_mismatched_and_malformed_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "space.json", SZEGO_PAIR);
    let tiny = write(
        dir.path(),
        "tiny.json",
        r#"{"dim": 1, "entries": [[[1.0,0.0]]]}"#,
    );
    let result = berlab(&["shell", "--space", &space, "--op", &tiny]);
    assert_eq!(result.status.code(), Some(2));

    let junk = write(dir.path(), "junk.json", "not json at all");
    let result = berlab(&["shell", "--space", &junk, "--op", &tiny]);
    assert_eq!(result.status.code(), Some(2));

    let result = berlab(&["shell", "--space", &space, "--op", "/nonexistent/op.json"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn fixtures_replay_all_and_reject_unknown_names() {
    let result = berlab(&["fixtures"]);
    assert!(result.status.success(), "{result:?}");
    let text = String::from_utf8(result.stdout).unwrap();
    for name in ["minus-identity", "nilpotent-orthonormal", "identity"] {
        assert!(text.contains(name), "missing fixture {name} in:\n{text}");
    }
    assert!(text.contains("B-T2-FIXED-PI"));

    let result = berlab(&["fixtures", "--name", "minus-identity"]);
    assert!(result.status.success());
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("rhs=2.000000000000e0"));
    assert!(!text.contains("nilpotent"));

    let result = berlab(&["fixtures", "--name", "unknown-thing"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn eval_prints_verdict_line_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "space.json", SZEGO_PAIR);
    let op = write(dir.path(), "op.json", DOUBLE_IDENTITY);
    let result = berlab(&["eval", "--bound", "B-T8", "--space", &space, "--op", &op]);
    assert!(result.status.success(), "{result:?}");
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.starts_with("B-T8: lhs="));
    assert!(text.contains("satisfied=true"));
    assert!(text.contains("alpha="));
}

#[test]
fn eval_sum_bound_requires_and_uses_second_operand() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "space.json", SZEGO_PAIR);
    let op = write(dir.path(), "op.json", DOUBLE_IDENTITY);
    let result = berlab(&["eval", "--bound", "B-SUM", "--space", &space, "--op", &op]);
    assert_eq!(result.status.code(), Some(2));
    let err = String::from_utf8(result.stderr).unwrap();
    assert!(err.contains("B-SUM"), "unexpected stderr: {err}");

    let other = write(
        dir.path(),
        "b.json",
        r#"{"dim": 2, "entries": [[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]}"#,
    );
    let result = berlab(&[
        "eval", "--bound", "B-SUM", "--space", &space, "--op", &op, "--op-b", &other,
    ]);
    assert!(result.status.success(), "{result:?}");
    let text = String::from_utf8(result.stdout).unwrap();
    assert!(text.contains("satisfied=true"));
}

#[test]
fn eval_rejects_non_normal_operator_for_the_normal_only_bound() {
    let dir = tempfile::tempdir().unwrap();
    let space = write(dir.path(), "space.json", SZEGO_PAIR);
    let shift = write(
        dir.path(),
        "shift.json",
        r#"{"dim": 2, "entries": [[[0.0,0.0],[1.0,0.0]],[[0.0,0.0],[0.0,0.0]]]}"#,
    );
    let result = berlab(&[
        "eval",
        "--bound",
        "B-RMK-NORMAL",
        "--space",
        &space,
        "--op",
        &shift,
    ]);
    assert_eq!(result.status.code(), Some(2));
    let err = String::from_utf8(result.stderr).unwrap();
    assert!(err.contains("normal"), "unexpected stderr: {err}");
}
