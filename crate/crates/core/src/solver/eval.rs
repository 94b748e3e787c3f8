// SPDX-License-Identifier: Apache-2.0

//! A small evaluator for SMT-LIB terms, used to check solver models
//! independently of the solver. Reals are generic; use exact rationals for a
//! faithful check.

use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;

use num::bigint::BigInt;
use num::{Integer, One, Signed, Zero};

use super::sexp::Sexp;
use crate::num::Real;

#[derive(Clone, Debug, PartialEq)]
pub enum SVal<R> {
    Bool(bool),
    Int(BigInt),
    Real(R),
    Seq(Vec<SVal<R>>),
    /// Datatype constructor application.
    Ctor(String, Vec<SVal<R>>),
    Array(Box<Arr<R>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arr<R> {
    base: ArrBase<R>,
    /// Later stores shadow earlier ones.
    stores: Vec<(SVal<R>, SVal<R>)>,
}

#[derive(Clone, Debug, PartialEq)]
enum ArrBase<R> {
    Const(SVal<R>),
    /// Array given by a unary model function.
    Fun(String),
    Lambda(String, Sexp),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot evaluate: {0}")]
pub struct EvalError(pub String);

fn err<T>(msg: impl Into<String>) -> Result<T, EvalError> {
    Err(EvalError(msg.into()))
}

#[derive(Clone, Debug)]
struct FunDef {
    params: Vec<String>,
    body: Sexp,
}

/// Function definitions plus declared sorts, for evaluating closed terms.
pub struct Evaluator<R> {
    funs: HashMap<String, FunDef>,
    sorts: HashMap<String, Sexp>,
    cache: Mutex<HashMap<String, SVal<R>>>,
}

impl<R: Real> Default for Evaluator<R> {
    fn default() -> Self {
        Self::new()
    }
}

impl<R: Real> Evaluator<R> {
    pub fn new() -> Self {
        Evaluator { funs: HashMap::new(), sorts: HashMap::new(), cache: Mutex::new(HashMap::new()) }
    }

    /// Loads `define-fun` and `declare-fun`/`declare-const` commands; other commands are ignored.
    pub fn load(&mut self, commands: &[Sexp]) {
        for c in commands {
            let Some(v) = c.as_list() else { continue };
            match c.head() {
                Some("define-fun") if v.len() == 5 => {
                    let name = v[1].as_atom().unwrap_or_default().to_string();
                    let params = v[2]
                        .as_list()
                        .unwrap_or_default()
                        .iter()
                        .filter_map(|p| p.as_list().and_then(|p| p.first()).and_then(Sexp::as_atom))
                        .map(str::to_string)
                        .collect();
                    self.funs.insert(name, FunDef { params, body: v[4].clone() });
                }
                Some("declare-const") if v.len() == 3 => {
                    self.sorts.insert(v[1].as_atom().unwrap_or_default().to_string(), v[2].clone());
                }
                Some("declare-fun") if v.len() == 4 => {
                    self.sorts.insert(v[1].as_atom().unwrap_or_default().to_string(), v[3].clone());
                }
                // a model is a list of definitions
                None => self.load(v),
                _ => {}
            }
        }
        self.cache.lock().unwrap().clear();
    }

    pub fn eval(&self, e: &Sexp) -> Result<SVal<R>, EvalError> {
        self.eval_in(e, &[])
    }

    pub fn eval_bool(&self, e: &Sexp) -> Result<bool, EvalError> {
        match self.eval(e)? {
            SVal::Bool(b) => Ok(b),
            v => err(format!("expected a boolean, got {v:?}")),
        }
    }

    fn default_of(&self, sort: &Sexp) -> Result<SVal<R>, EvalError> {
        Ok(match sort {
            Sexp::Atom(s) if s == "Int" => SVal::Int(BigInt::zero()),
            Sexp::Atom(s) if s == "Real" => SVal::Real(R::zero()),
            Sexp::Atom(s) if s == "Bool" => SVal::Bool(false),
            Sexp::List(v) if v.first().and_then(Sexp::as_atom) == Some("Seq") => SVal::Seq(Vec::new()),
            Sexp::List(v) if v.first().and_then(Sexp::as_atom) == Some("Array") && v.len() == 3 => {
                SVal::Array(Box::new(Arr { base: ArrBase::Const(self.default_of(&v[2])?), stores: Vec::new() }))
            }
            other => return err(format!("no default for sort {other}")),
        })
    }

    fn lookup_const(&self, name: &str) -> Result<SVal<R>, EvalError> {
        if let Some(v) = self.cache.lock().unwrap().get(name) {
            return Ok(v.clone());
        }
        let v = match self.funs.get(name) {
            Some(def) if def.params.is_empty() => self.eval_in(&def.body, &[])?,
            Some(_) => return err(format!("`{name}` used without arguments")),
            None => match self.sorts.get(name) {
                // unconstrained symbols are left out of models
                Some(sort) => self.default_of(sort)?,
                None => return err(format!("unknown symbol `{name}`")),
            },
        };
        self.cache.lock().unwrap().insert(name.to_string(), v.clone());
        Ok(v)
    }

    fn apply(&self, name: &str, args: Vec<SVal<R>>) -> Result<SVal<R>, EvalError> {
        match self.funs.get(name) {
            Some(def) if def.params.len() == args.len() => {
                let locals: Vec<(String, SVal<R>)> = def.params.iter().cloned().zip(args).collect();
                self.eval_in(&def.body, &locals)
            }
            Some(_) => err(format!("arity mismatch calling `{name}`")),
            None => match self.sorts.get(name) {
                Some(sort) => self.default_of(sort),
                None => err(format!("unknown function `{name}`")),
            },
        }
    }

    fn eval_in(&self, e: &Sexp, locals: &[(String, SVal<R>)]) -> Result<SVal<R>, EvalError> {
        match e {
            Sexp::Atom(a) => self.atom(a, locals),
            Sexp::List(v) if v.is_empty() => err("empty application"),
            Sexp::List(v) => {
                if let Some(h) = v[0].as_list() {
                    return self.indexed_app(h, &v[1..], locals);
                }
                let head = v[0].as_atom().unwrap();
                let args = &v[1..];
                match head {
                    "let" => {
                        let mut scope = locals.to_vec();
                        for b in args.first().and_then(Sexp::as_list).unwrap_or_default() {
                            let b = b.as_list().filter(|b| b.len() == 2).ok_or_else(|| EvalError("bad let".into()))?;
                            let name = b[0].as_atom().unwrap_or_default().to_string();
                            scope.push((name, self.eval_in(&b[1], locals)?));
                        }
                        self.eval_in(args.get(1).ok_or_else(|| EvalError("let without body".into()))?, &scope)
                    }
                    "ite" => {
                        if args.len() != 3 {
                            return err("ite arity");
                        }
                        if self.bool_in(&args[0], locals)? {
                            self.eval_in(&args[1], locals)
                        } else {
                            self.eval_in(&args[2], locals)
                        }
                    }
                    "and" => {
                        for a in args {
                            if !self.bool_in(a, locals)? {
                                return Ok(SVal::Bool(false));
                            }
                        }
                        Ok(SVal::Bool(true))
                    }
                    "or" => {
                        for a in args {
                            if self.bool_in(a, locals)? {
                                return Ok(SVal::Bool(true));
                            }
                        }
                        Ok(SVal::Bool(false))
                    }
                    "=>" => {
                        // right associative
                        let (last, init) = args.split_last().ok_or_else(|| EvalError("=> arity".into()))?;
                        for a in init {
                            if !self.bool_in(a, locals)? {
                                return Ok(SVal::Bool(true));
                            }
                        }
                        Ok(SVal::Bool(self.bool_in(last, locals)?))
                    }
                    "lambda" => {
                        let params = args.first().and_then(Sexp::as_list).unwrap_or_default();
                        let [p] = params else { return err("only unary lambdas are supported") };
                        let name = p.as_list().and_then(|p| p.first()).and_then(Sexp::as_atom).unwrap_or_default();
                        let body = args.get(1).ok_or_else(|| EvalError("lambda without body".into()))?;
                        // close over the current locals by substitution
                        let body = substitute(body, locals);
                        Ok(SVal::Array(Box::new(Arr { base: ArrBase::Lambda(name.to_string(), body), stores: vec![] })))
                    }
                    "_" => match args {
                        [Sexp::Atom(k), Sexp::Atom(f)] if k == "as-array" => {
                            Ok(SVal::Array(Box::new(Arr { base: ArrBase::Fun(f.clone()), stores: Vec::new() })))
                        }
                        _ => err(format!("unsupported indexed identifier {e}")),
                    },
                    "as" => match args {
                        [Sexp::Atom(c), sort] if c == "seq.empty" => {
                            let _ = sort;
                            Ok(SVal::Seq(Vec::new()))
                        }
                        _ => err(format!("unsupported `as` form {e}")),
                    },
                    _ => {
                        let vals = args.iter().map(|a| self.eval_in(a, locals)).collect::<Result<Vec<_>, _>>()?;
                        self.builtin(head, vals)
                    }
                }
            }
        }
    }

    fn bool_in(&self, e: &Sexp, locals: &[(String, SVal<R>)]) -> Result<bool, EvalError> {
        match self.eval_in(e, locals)? {
            SVal::Bool(b) => Ok(b),
            v => err(format!("expected a boolean, got {v:?} from {e}")),
        }
    }

    fn atom(&self, a: &str, locals: &[(String, SVal<R>)]) -> Result<SVal<R>, EvalError> {
        if let Some((_, v)) = locals.iter().rev().find(|(n, _)| n == a) {
            return Ok(v.clone());
        }
        match a {
            "true" => return Ok(SVal::Bool(true)),
            "false" => return Ok(SVal::Bool(false)),
            _ => {}
        }
        if a.chars().all(|c| c.is_ascii_digit()) {
            return Ok(SVal::Int(a.parse().map_err(|_| EvalError(format!("bad numeral {a}")))?));
        }
        if a.chars().next().is_some_and(|c| c.is_ascii_digit()) {
            return R::from_decimal(a).map(SVal::Real).ok_or_else(|| EvalError(format!("bad decimal {a}")));
        }
        self.lookup_const(a)
    }

    fn indexed_app(&self, head: &[Sexp], args: &[Sexp], locals: &[(String, SVal<R>)]) -> Result<SVal<R>, EvalError> {
        let words: Vec<&str> = head.iter().filter_map(Sexp::as_atom).collect();
        match words.as_slice() {
            ["as", "const", ..] => {
                let v = self.eval_in(args.first().ok_or_else(|| EvalError("const arity".into()))?, locals)?;
                Ok(SVal::Array(Box::new(Arr { base: ArrBase::Const(v), stores: Vec::new() })))
            }
            ["_", "is", ctor] => match self.eval_in(&args[0], locals)? {
                SVal::Ctor(c, _) => Ok(SVal::Bool(c == *ctor)),
                v => err(format!("tester applied to {v:?}")),
            },
            _ => err(format!("unsupported indexed application {}", Sexp::List(head.to_vec()))),
        }
    }

    fn builtin(&self, head: &str, mut vals: Vec<SVal<R>>) -> Result<SVal<R>, EvalError> {
        let arith = |vals: &[SVal<R>]| -> Result<Vec<Num<R>>, EvalError> { vals.iter().map(Num::of).collect() };
        Ok(match head {
            "not" => match vals.as_slice() {
                [SVal::Bool(b)] => SVal::Bool(!b),
                _ => return err("not arity"),
            },
            "=" => SVal::Bool(vals.windows(2).map(|w| self.equal(&w[0], &w[1])).collect::<Result<Vec<_>, _>>()?.iter().all(|b| *b)),
            "distinct" => {
                for i in 0..vals.len() {
                    for j in i + 1..vals.len() {
                        if self.equal(&vals[i], &vals[j])? {
                            return Ok(SVal::Bool(false));
                        }
                    }
                }
                SVal::Bool(true)
            }
            "<" | "<=" | ">" | ">=" => {
                let ns = arith(&vals)?;
                let ok = ns.windows(2).all(|w| {
                    let (a, b) = Num::promote(&w[0], &w[1]);
                    match head {
                        "<" => a < b,
                        "<=" => a <= b,
                        ">" => a > b,
                        _ => a >= b,
                    }
                });
                SVal::Bool(ok)
            }
            "+" | "*" => {
                let ns = arith(&vals)?;
                let mut acc = if head == "+" { Num::Int(BigInt::zero()) } else { Num::Int(BigInt::one()) };
                for n in ns {
                    acc = Num::binop(&acc, &n, head)?;
                }
                acc.into_val()
            }
            "-" => {
                let ns = arith(&vals)?;
                match ns.as_slice() {
                    [x] => Num::binop(&Num::Int(BigInt::zero()), x, "-")?.into_val(),
                    [first, rest @ ..] => {
                        let mut acc = first.clone();
                        for n in rest {
                            acc = Num::binop(&acc, n, "-")?;
                        }
                        acc.into_val()
                    }
                    [] => return err("- arity"),
                }
            }
            "/" => {
                let ns = arith(&vals)?;
                let mut acc = ns.first().cloned().ok_or_else(|| EvalError("/ arity".into()))?.to_real();
                for n in &ns[1..] {
                    let d = n.to_real();
                    if d.is_zero() {
                        return err("real division by zero");
                    }
                    acc = acc / d;
                }
                SVal::Real(acc)
            }
            "div" | "mod" => match vals.as_slice() {
                [SVal::Int(a), SVal::Int(b)] => {
                    if b.is_zero() {
                        return err("integer division by zero");
                    }
                    // Euclidean: the remainder is never negative
                    let q = a.div_floor(&b.abs()) * b.signum();
                    if head == "div" {
                        SVal::Int(q)
                    } else {
                        SVal::Int(a - b * q)
                    }
                }
                _ => return err(format!("{head} needs integers")),
            },
            "abs" => match vals.as_slice() {
                [SVal::Int(a)] => SVal::Int(a.abs()),
                [SVal::Real(a)] => SVal::Real(a.abs()),
                _ => return err("abs arity"),
            },
            "to_real" => match vals.as_slice() {
                [SVal::Int(a)] => SVal::Real(R::from_ratio(a, &BigInt::one()).ok_or_else(|| EvalError("to_real".into()))?),
                [SVal::Real(a)] => SVal::Real(a.clone()),
                _ => return err("to_real arity"),
            },
            "to_int" => match vals.as_slice() {
                [SVal::Real(a)] => {
                    let t = a.trunc_to_i64().ok_or_else(|| EvalError("to_int out of range".into()))?;
                    let floor = if a.is_negative() && R::from_int(t) != *a { t - 1 } else { t };
                    SVal::Int(BigInt::from(floor))
                }
                [SVal::Int(a)] => SVal::Int(a.clone()),
                _ => return err("to_int arity"),
            },
            "is_int" => match vals.as_slice() {
                [SVal::Real(a)] => SVal::Bool(a.trunc_to_i64().is_some_and(|t| R::from_int(t) == *a)),
                [SVal::Int(_)] => SVal::Bool(true),
                _ => return err("is_int arity"),
            },
            "select" => {
                if vals.len() != 2 {
                    return err("select arity");
                }
                let idx = vals.pop().unwrap();
                match vals.pop().unwrap() {
                    SVal::Array(a) => self.select(&a, &idx)?,
                    v => return err(format!("select on {v:?}")),
                }
            }
            "store" => {
                if vals.len() != 3 {
                    return err("store arity");
                }
                let v = vals.pop().unwrap();
                let idx = vals.pop().unwrap();
                match vals.pop().unwrap() {
                    SVal::Array(mut a) => {
                        a.stores.push((idx, v));
                        SVal::Array(a)
                    }
                    v => return err(format!("store on {v:?}")),
                }
            }
            "seq.unit" => match vals.pop() {
                Some(v) if vals.is_empty() => SVal::Seq(vec![v]),
                _ => return err("seq.unit arity"),
            },
            "seq.++" => {
                let mut out = Vec::new();
                for v in vals {
                    match v {
                        SVal::Seq(s) => out.extend(s),
                        v => return err(format!("seq.++ on {v:?}")),
                    }
                }
                SVal::Seq(out)
            }
            "seq.len" => match vals.as_slice() {
                [SVal::Seq(s)] => SVal::Int(BigInt::from(s.len())),
                _ => return err("seq.len arity"),
            },
            "IV" | "RV" => SVal::Ctor(head.to_string(), vals),
            "iv" | "rv" => match vals.as_slice() {
                [SVal::Ctor(c, fields)] if c.to_lowercase() == head => fields[0].clone(),
                // unspecified selector application; treat as an error rather than guess
                _ => return err(format!("{head} applied to another constructor")),
            },
            name => self.apply(name, vals)?,
        })
    }

    fn select(&self, a: &Arr<R>, idx: &SVal<R>) -> Result<SVal<R>, EvalError> {
        for (k, v) in a.stores.iter().rev() {
            if self.equal(k, idx)? {
                return Ok(v.clone());
            }
        }
        match &a.base {
            ArrBase::Const(v) => Ok(v.clone()),
            ArrBase::Fun(f) => self.apply(f, vec![idx.clone()]),
            ArrBase::Lambda(p, body) => self.eval_in(body, &[(p.clone(), idx.clone())]),
        }
    }

    /// Index points at which two arrays could differ: stored keys and numerals
    /// in their defining functions, plus one point beyond all of them.
    fn probe_points(&self, arrs: &[&Arr<R>]) -> Vec<SVal<R>> {
        let mut keys: BTreeSet<BigInt> = BTreeSet::new();
        let from_body = |body: &Sexp, keys: &mut BTreeSet<BigInt>| {
            body.visit_atoms(&mut |a| {
                if let Ok(n) = a.parse::<BigInt>() {
                    keys.insert(n.clone());
                    keys.insert(-n);
                }
            })
        };
        for a in arrs {
            for (k, _) in &a.stores {
                if let SVal::Int(n) = k {
                    keys.insert(n.clone());
                }
            }
            match &a.base {
                ArrBase::Fun(f) => {
                    if let Some(def) = self.funs.get(f) {
                        from_body(&def.body, &mut keys);
                    }
                }
                ArrBase::Lambda(_, body) => from_body(body, &mut keys),
                ArrBase::Const(_) => {}
            }
        }
        let beyond = keys.iter().map(|k| k.abs()).max().unwrap_or_default() + BigInt::from(7919);
        keys.insert(beyond);
        keys.into_iter().map(SVal::Int).collect()
    }

    fn equal(&self, a: &SVal<R>, b: &SVal<R>) -> Result<bool, EvalError> {
        Ok(match (a, b) {
            (SVal::Array(x), SVal::Array(y)) => {
                for p in self.probe_points(&[x, y]) {
                    if !self.equal(&self.select(x, &p)?, &self.select(y, &p)?)? {
                        return Ok(false);
                    }
                }
                true
            }
            (SVal::Seq(x), SVal::Seq(y)) => {
                if x.len() != y.len() {
                    return Ok(false);
                }
                for (p, q) in x.iter().zip(y) {
                    if !self.equal(p, q)? {
                        return Ok(false);
                    }
                }
                true
            }
            (SVal::Ctor(c, xs), SVal::Ctor(d, ys)) => {
                if c != d || xs.len() != ys.len() {
                    return Ok(false);
                }
                for (p, q) in xs.iter().zip(ys) {
                    if !self.equal(p, q)? {
                        return Ok(false);
                    }
                }
                true
            }
            (SVal::Int(_) | SVal::Real(_), SVal::Int(_) | SVal::Real(_)) => {
                let (x, y) = Num::promote(&Num::of(a)?, &Num::of(b)?);
                x == y
            }
            (SVal::Bool(x), SVal::Bool(y)) => x == y,
            _ => return err(format!("comparing {a:?} with {b:?}")),
        })
    }
}

/// Replaces free occurrences of local names by their values, for closures.
fn substitute<R: Real>(body: &Sexp, locals: &[(String, SVal<R>)]) -> Sexp {
    if locals.is_empty() {
        return body.clone();
    }
    body.map_atoms(&|a| locals.iter().rev().find(|(n, _)| n == a).and_then(|(_, v)| to_sexp(v)))
}

/// Renders a scalar value back into a term.
pub fn to_sexp<R: Real>(v: &SVal<R>) -> Option<Sexp> {
    Some(match v {
        SVal::Bool(b) => Sexp::bool(*b),
        SVal::Int(n) => Sexp::bigint(n),
        SVal::Real(r) => {
            let f = r.to_f64()?;
            let q = num::rational::BigRational::from_float(f)?;
            Sexp::real(&q)
        }
        _ => return None,
    })
}

#[derive(Clone, Debug)]
enum Num<R> {
    Int(BigInt),
    Real(R),
}

impl<R: Real> Num<R> {
    fn of(v: &SVal<R>) -> Result<Num<R>, EvalError> {
        match v {
            SVal::Int(n) => Ok(Num::Int(n.clone())),
            SVal::Real(r) => Ok(Num::Real(r.clone())),
            v => err(format!("expected a number, got {v:?}")),
        }
    }

    fn to_real(&self) -> R {
        match self {
            Num::Int(n) => R::from_ratio(n, &BigInt::one()).unwrap_or_else(R::zero),
            Num::Real(r) => r.clone(),
        }
    }

    fn promote(a: &Num<R>, b: &Num<R>) -> (NumOrd<R>, NumOrd<R>) {
        match (a, b) {
            (Num::Int(x), Num::Int(y)) => (NumOrd::Int(x.clone()), NumOrd::Int(y.clone())),
            _ => (NumOrd::Real(a.to_real()), NumOrd::Real(b.to_real())),
        }
    }

    fn binop(a: &Num<R>, b: &Num<R>, op: &str) -> Result<Num<R>, EvalError> {
        Ok(match (a, b) {
            (Num::Int(x), Num::Int(y)) => Num::Int(match op {
                "+" => x + y,
                "-" => x - y,
                "*" => x * y,
                _ => return err(op.to_string()),
            }),
            _ => {
                let (x, y) = (a.to_real(), b.to_real());
                Num::Real(match op {
                    "+" => x + y,
                    "-" => x - y,
                    "*" => x * y,
                    _ => return err(op.to_string()),
                })
            }
        })
    }

    fn into_val(self) -> SVal<R> {
        match self {
            Num::Int(n) => SVal::Int(n),
            Num::Real(r) => SVal::Real(r),
        }
    }
}

#[derive(Clone, Debug, PartialEq, PartialOrd)]
enum NumOrd<R> {
    Int(BigInt),
    Real(R),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::sexp::{parse, parse_all};
    use num::rational::BigRational;
    use num::ToPrimitive;

    fn ev() -> Evaluator<BigRational> {
        let mut e = Evaluator::new();
        e.load(&parse_all(crate::solver::PRELUDE).unwrap());
        e
    }

    fn int(e: &Evaluator<BigRational>, t: &str) -> i64 {
        match e.eval(&parse(t).unwrap()).unwrap() {
            SVal::Int(n) => n.to_i64().unwrap(),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn euclidean_and_truncated_division() {
        let e = ev();
        assert_eq!(int(&e, "(div 7 (- 2))"), -3);
        assert_eq!(int(&e, "(div (- 7) (- 2))"), 4);
        assert_eq!(int(&e, "(mod (- 7) 2)"), 1);
        assert_eq!(int(&e, "(tdiv (- 7) 2)"), -3);
        assert_eq!(int(&e, "(tmod (- 7) 2)"), -1);
        assert_eq!(int(&e, "(tmod 7 (- 2))"), 1);
        assert_eq!(int(&e, "(ftrunc (- 2.5))"), -2);
        assert_eq!(int(&e, "(to_int (- 2.5))"), -3);
    }

    #[test]
    fn model_functions_and_arrays() {
        let mut e = ev();
        let model = parse(
            "((define-fun x () Int 3)
              (define-fun f ((x!0 Int)) Int (ite (= x!0 1) 10 20))
              (define-fun a () (Array Int Int) (store ((as const (Array Int Int)) 0) 2 5))
              (define-fun b () (Array Int Int) (_ as-array g))
              (define-fun g ((x!0 Int)) Int (ite (= x!0 2) 5 0)))",
        )
        .unwrap();
        e.load(&[model]);
        assert_eq!(int(&e, "(+ x (f 1) (f 2))"), 33);
        assert_eq!(int(&e, "(select a 2)"), 5);
        assert!(e.eval_bool(&parse("(= a b)").unwrap()).unwrap());
        assert!(!e.eval_bool(&parse("(= a (store b 3 1))").unwrap()).unwrap());
        assert!(e
            .eval_bool(&parse("(= (seq.++ (seq.unit (IV 1)) (as seq.empty (Seq Val))) (seq.unit (IV 1)))").unwrap())
            .unwrap());
    }
}
