// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(case: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(case)
}

fn edgefix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edgefix")).args(args).output().expect("binary runs")
}

fn pair(cmd: &str, case: &str, extra: &[&str]) -> Output {
    let dir = corpus(case);
    let r = dir.join("reference.mc");
    let s = dir.join("student.mc");
    let mut args = vec![cmd, "--ref", r.to_str().unwrap(), "--student", s.to_str().unwrap()];
    args.extend_from_slice(extra);
    edgefix(&args)
}

#[test]
fn repair_prints_a_diff_and_exits_zero() {
    let out = pair("repair", "prime", &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let diff = String::from_utf8(out.stdout).unwrap();
    assert!(diff.contains("@@"), "{diff}");
}

#[test]
fn structural_mismatch_exits_one() {
    let out = pair("repair", "max_by_loop", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed: SM"));
}

#[test]
fn json_report_on_stdout() {
    let out = pair("repair", "sum_to_n", &["--json", "-"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert!(v["repaired_source"].is_string());
}

#[test]
fn missing_argument_is_a_usage_error() {
    let out = edgefix(&["repair", "--ref", "x.mc"]);
    assert_eq!(out.status.code(), Some(2));
    let out = edgefix(&["repair", "--ref", "no/such.mc", "--student", "no/such.mc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn version_names_the_engine() {
    let out = edgefix(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("edgefix "));
}

#[test]
fn empty_corpus_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = edgefix(&["run-corpus", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn cfa_dump_lists_edges() {
    let f = corpus("prime").join("reference.mc");
    let out = edgefix(&["cfa", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!out.stdout.is_empty());
}
