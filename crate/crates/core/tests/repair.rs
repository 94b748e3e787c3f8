// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::time::Duration;

use edgefix::lang::parse;
use edgefix::repair::{repair_program, soundness_check, verify_program, Domain, FailureReason, InputRange, RepairConfig, Status};

fn pair(id: &str) -> (String, String) {
    let d = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(id);
    (
        std::fs::read_to_string(d.join("reference.mc")).unwrap(),
        std::fs::read_to_string(d.join("student.mc")).unwrap(),
    )
}

#[test]
fn reference_against_itself_needs_nothing() {
    let (r, _) = pair("gcd");
    let rep = repair_program(&r, &r, &RepairConfig::default());
    assert_eq!(rep.status, Status::Verified);
    assert_eq!((rep.ted, rep.rps), (Some(0), Some(0.0)));
    assert!(rep.repaired_source.is_none() && rep.diff.is_none());
}

#[test]
fn verify_does_not_repair() {
    let (r, s) = pair("sum_to_n");
    let rep = verify_program(&r, &s, &RepairConfig::default());
    assert_eq!(rep.status, Status::Failed);
    assert_eq!(rep.reason, Some(FailureReason::NoRepair));
    assert!(rep.repaired_source.is_none());
}

#[test]
fn float_repair_is_flagged_approximate() {
    let (r, s) = pair("celsius");
    let rep = repair_program(&r, &s, &RepairConfig::default());
    assert_eq!(rep.status, Status::Repaired, "{:?}", rep.message);
    assert!(rep.approximate_reals);
    assert!(rep.repaired_source.unwrap().contains("9.0 / 5.0"));
}

#[test]
fn report_json_is_stable() {
    let (r, s) = pair("prime");
    let cfg = RepairConfig::default();
    let a = repair_program(&r, &s, &cfg).to_json();
    let b = repair_program(&r, &s, &cfg).to_json();
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["status"], "repaired");
    assert!(v.get("elapsed").is_none());
}

#[test]
fn parse_errors_are_unsupported() {
    let rep = repair_program("int f(int x) { return x; }", "int f(int x) { return x +; }", &RepairConfig::default());
    assert_eq!(rep.reason, Some(FailureReason::Unsupported));
}

#[test]
fn different_loop_nesting_is_a_mismatch() {
    let r = "int f(int n) { int s = 0; while (n > 0) { s = s + n; n = n - 1; } return s; }";
    let s = "int f(int n) { return n * (n + 1) / 2; }";
    let rep = repair_program(r, s, &RepairConfig::default());
    assert_eq!(rep.reason, Some(FailureReason::StructuralMismatch));
    assert!(rep.to_json().contains("\"reason\": \"SM\""));
}

#[test]
fn signature_mismatch() {
    let rep = repair_program("int f(int x) { return x; }", "int f(int x, int y) { return x; }", &RepairConfig::default());
    assert_eq!(rep.reason, Some(FailureReason::StructuralMismatch));
}

#[test]
fn pairing_cap() {
    let r = "int f(int x) { if (x == 1) return 1; if (x == 2) return 4; return 0; }";
    let s = "int f(int x) { if (x == 1) return 1; return 0; }";
    let cfg = RepairConfig { max_pairings: 2, ..RepairConfig::default() };
    assert_eq!(repair_program(r, s, &cfg).reason, Some(FailureReason::CombinatoricsExceeded));
    let rep = repair_program(r, s, &RepairConfig::default());
    assert_eq!(rep.status, Status::Repaired, "{:?}", rep.message);
}

#[test]
fn exhausted_budget() {
    let (r, s) = pair("prime");
    let cfg = RepairConfig { timeout: Duration::ZERO, ..RepairConfig::default() };
    assert_eq!(repair_program(&r, &s, &cfg).reason, Some(FailureReason::Timeout));
}

#[test]
fn missing_solver() {
    let (r, s) = pair("prime");
    let mut cfg = RepairConfig::default();
    cfg.solver.binary = "/nonexistent/solver".into();
    assert_eq!(repair_program(&r, &s, &cfg).reason, Some(FailureReason::SmtIssue));
}

#[test]
fn differential_check_catches_wrong_programs() {
    let (r, s) = pair("sum_to_n");
    let domain = Domain::Ranges { inputs: vec![InputRange::Int { lo: 0, hi: 30 }] };
    let ev = soundness_check(&parse(&r).unwrap(), &parse(&s).unwrap(), &domain);
    assert!(!ev.passed && ev.exhaustive);
    assert!(ev.divergence.is_some());
}

#[test]
fn repaired_programs_keep_untouched_text() {
    let (r, s) = pair("max3");
    let rep = repair_program(&r, &s, &RepairConfig::default());
    assert_eq!(rep.status, Status::Repaired, "{:?}", rep.message);
    let diff = rep.diff.unwrap();
    let changed = diff.lines().filter(|l| l.starts_with('+') && !l.starts_with("+++")).count();
    assert!(changed >= 1 && rep.rps.unwrap() < 1.0, "{diff}");
}
