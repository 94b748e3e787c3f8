// SPDX-License-Identifier: Apache-2.0

use std::path::Path;

use proptest::prelude::*;

use edgefix::cfa::{build_cfa, run_cfa};
use edgefix::eval::load_corpus;
use edgefix::lang::{interpret, parse, render, Literal, ParseError, Status, Value};
use edgefix::Rational;

fn corpus() -> Vec<edgefix::eval::CorpusCase> {
    load_corpus(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")).unwrap()
}

#[test]
fn rendering_is_a_fixed_point() {
    for c in corpus() {
        for src in [&c.reference, &c.student] {
            let once = render(&parse(src).unwrap());
            let twice = render(&parse(&once).unwrap());
            assert_eq!(once, twice, "{}", c.manifest.id);
        }
    }
}

#[test]
fn automaton_walk_matches_interpreter() {
    for c in corpus() {
        let inputs = c.manifest.domain.inputs();
        for src in [&c.reference, &c.student] {
            let ast = parse(src).unwrap();
            let cfa = build_cfa(&ast).unwrap();
            for input in inputs.iter().step_by(7).take(60) {
                let a = interpret::<Rational>(&ast, input, 100_000);
                let b = run_cfa::<Rational>(&ast, &cfa, input, 100_000);
                if a.status == Status::Finished {
                    assert!(a.agrees_with(&b), "{} on {input:?}: {a:?} vs {b:?}", c.manifest.id);
                }
            }
        }
    }
}

#[test]
fn unsupported_features_are_named() {
    for src in ["int f(int *p) { return 0; }", "int f(int x) { goto end; end: return x; }"] {
        match parse(src) {
            Err(ParseError::Unsupported { .. } | ParseError::Syntax { .. }) => {}
            other => panic!("{src}: {other:?}"),
        }
    }
}

#[test]
fn division_truncates_toward_zero() {
    let ast = parse("int f(int a, int b) { return a / b * 100 + a % b; }").unwrap();
    let out = interpret::<f64>(&ast, &[Literal::Int(-7), Literal::Int(2)], 1000);
    assert_eq!(out.ret, Value::Int(-300 - 1));
    let out = interpret::<f64>(&ast, &[Literal::Int(1), Literal::Int(0)], 1000);
    assert!(matches!(out.status, Status::RuntimeError(_)));
}

#[derive(Clone, Debug)]
enum E {
    A,
    B,
    K(i64),
    Add(Box<E>, Box<E>),
    Sub(Box<E>, Box<E>),
    Mul(Box<E>, Box<E>),
}

impl E {
    fn src(&self) -> String {
        match self {
            E::A => "a".into(),
            E::B => "b".into(),
            E::K(k) if *k < 0 => format!("({k})"),
            E::K(k) => k.to_string(),
            E::Add(x, y) => format!("({} + {})", x.src(), y.src()),
            E::Sub(x, y) => format!("({} - {})", x.src(), y.src()),
            E::Mul(x, y) => format!("({} * {})", x.src(), y.src()),
        }
    }

    fn eval(&self, a: i64, b: i64) -> i64 {
        match self {
            E::A => a,
            E::B => b,
            E::K(k) => *k,
            E::Add(x, y) => x.eval(a, b) + y.eval(a, b),
            E::Sub(x, y) => x.eval(a, b) - y.eval(a, b),
            E::Mul(x, y) => x.eval(a, b) * y.eval(a, b),
        }
    }
}

fn expr() -> impl Strategy<Value = E> {
    let leaf = prop_oneof![Just(E::A), Just(E::B), (-9i64..10).prop_map(E::K)];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| E::Add(Box::new(x), Box::new(y))),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| E::Sub(Box::new(x), Box::new(y))),
            (inner.clone(), inner).prop_map(|(x, y)| E::Mul(Box::new(x), Box::new(y))),
        ]
    })
}

proptest! {
    #[test]
    fn integer_arithmetic(e in expr(), a in -50i64..50, b in -50i64..50) {
        let src = format!("int f(int a, int b) {{ return {}; }}", e.src());
        let ast = parse(&src).unwrap();
        let out = interpret::<f64>(&ast, &[Literal::Int(a), Literal::Int(b)], 10_000);
        prop_assert_eq!(out.ret, Value::Int(e.eval(a, b)));
        let reparsed = parse(&render(&ast)).unwrap();
        let again = interpret::<f64>(&reparsed, &[Literal::Int(a), Literal::Int(b)], 10_000);
        prop_assert_eq!(again.ret, Value::Int(e.eval(a, b)));
    }
}
