// SPDX-License-Identifier: Apache-2.0

use std::time::Duration;

use edgefix::solver::{OptResult, Query, Session, SolverConfig, Sexp, Verdict};

fn parse(s: &str) -> Sexp {
    edgefix::solver::sexp::parse(s).unwrap()
}

fn int_query(hard: &[&str]) -> Query {
    Query {
        decls: vec![parse("(declare-fun x () Int)"), parse("(declare-fun y () Int)")],
        hard: hard.iter().map(|h| parse(h)).collect(),
        soft: Vec::new(),
        wanted: vec![Sexp::atom("x"), Sexp::atom("y")],
    }
}

const SECOND: Duration = Duration::from_secs(5);

#[test]
fn sat_models_satisfy_the_query() {
    let mut s = Session::start(SolverConfig::default()).unwrap();
    let q = int_query(&["(> x 3)", "(= y (* 2 x))"]);
    let Verdict::Sat(m) = s.check_sat(&q, SECOND).unwrap() else { panic!("expected sat") };
    assert!(edgefix::solver::validate_model(&q, &m).unwrap());
    assert_eq!(s.depth(), 0);
}

#[test]
fn unsat_and_zero_budget() {
    let mut s = Session::start(SolverConfig::default()).unwrap();
    assert_eq!(s.check_sat(&int_query(&["(> x 3)", "(< x 2)"]), SECOND).unwrap(), Verdict::Unsat);
    assert_eq!(s.check_sat(&int_query(&["(> x 3)"]), Duration::ZERO).unwrap(), Verdict::Timeout);
    // the session is still usable afterwards
    assert!(matches!(s.check_sat(&int_query(&["(> x 3)"]), SECOND).unwrap(), Verdict::Sat(_)));
}

#[test]
fn prelude_division_truncates() {
    let mut s = Session::start(SolverConfig::default()).unwrap();
    let q = int_query(&["(= x (tdiv (- 7) 2))", "(= y (tmod (- 7) 2))"]);
    let Verdict::Sat(m) = s.check_sat(&q, SECOND).unwrap() else { panic!() };
    assert_eq!(m.value(&Sexp::atom("x")), Some(&Sexp::int(-3)));
    assert_eq!(m.value(&Sexp::atom("y")), Some(&Sexp::int(-1)));
}

fn soft_query() -> Query {
    let mut q = int_query(&["(and (<= 0 x) (< x 3))", "(and (<= 0 y) (< y 3))", "(not (and (= x 0) (= y 0)))"]);
    q.soft = vec![(parse("(= x 0)"), 2), (parse("(= y 0)"), 2), (parse("(= x 1)"), 1), (parse("(= y 1)"), 1)];
    q
}

fn check_optimum(cfg: SolverConfig) {
    let mut s = Session::start(cfg).unwrap();
    let terms = [Sexp::atom("x"), Sexp::atom("y")];
    match s.optimize(&soft_query(), &terms, 8, SECOND).unwrap() {
        OptResult::Models { cost, models } => {
            // one of x, y moves to 1: it loses its weight-2 preference, the other its weight-1 one
            assert_eq!(cost, 3);
            let mut got: Vec<(String, String)> = models
                .iter()
                .map(|m| (m.value(&terms[0]).unwrap().to_string(), m.value(&terms[1]).unwrap().to_string()))
                .collect();
            got.sort();
            assert_eq!(got, vec![("0".into(), "1".into()), ("1".into(), "0".into())]);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(s.depth(), 0);
}

#[test]
fn soft_constraints_pick_all_cheapest_models() {
    check_optimum(SolverConfig::default());
}

#[test]
fn cost_bound_fallback_agrees() {
    let cfg = SolverConfig { force_fallback: true, ..SolverConfig::default() };
    assert!(!Session::start(cfg.clone()).unwrap().supports_soft());
    check_optimum(cfg);
}

#[test]
fn optimize_unsat() {
    let mut s = Session::start(SolverConfig::default()).unwrap();
    let mut q = soft_query();
    q.hard.push(parse("(> x 5)"));
    assert!(matches!(s.optimize(&q, &[Sexp::atom("x")], 2, SECOND).unwrap(), OptResult::Unsat));
}

#[test]
fn missing_binary_is_reported() {
    let cfg = SolverConfig { binary: "/nonexistent/solver".into(), ..SolverConfig::default() };
    assert!(Session::start(cfg).is_err());
}
