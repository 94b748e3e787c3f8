// SPDX-License-Identifier: Apache-2.0

//! S-expressions: the term language sent to and read back from the solver.

use std::fmt;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::Signed;

use crate::num::rational_to_smt;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(s: impl Into<String>) -> Sexp {
        Sexp::Atom(s.into())
    }

    pub fn list(items: Vec<Sexp>) -> Sexp {
        Sexp::List(items)
    }

    /// `(f args...)`
    pub fn app(f: &str, args: Vec<Sexp>) -> Sexp {
        let mut v = Vec::with_capacity(args.len() + 1);
        v.push(Sexp::atom(f));
        v.extend(args);
        Sexp::List(v)
    }

    pub fn int(v: i64) -> Sexp {
        if v < 0 {
            Sexp::app("-", vec![Sexp::Atom(v.unsigned_abs().to_string())])
        } else {
            Sexp::Atom(v.to_string())
        }
    }

    pub fn bigint(v: &BigInt) -> Sexp {
        if v.is_negative() {
            Sexp::app("-", vec![Sexp::Atom((-v).to_string())])
        } else {
            Sexp::Atom(v.to_string())
        }
    }

    pub fn real(v: &BigRational) -> Sexp {
        parse(&rational_to_smt(v)).expect("rational renders as a term")
    }

    pub fn bool(b: bool) -> Sexp {
        Sexp::atom(if b { "true" } else { "false" })
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Sexp::Atom(a) if a == "true")
    }

    pub fn is_false(&self) -> bool {
        matches!(self, Sexp::Atom(a) if a == "false")
    }

    pub fn as_atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v) => Some(v),
            Sexp::Atom(_) => None,
        }
    }

    /// Head symbol of an application.
    pub fn head(&self) -> Option<&str> {
        self.as_list().and_then(|v| v.first()).and_then(Sexp::as_atom)
    }

    /// Conjunction with trivial simplification.
    pub fn and(items: Vec<Sexp>) -> Sexp {
        let mut kept: Vec<Sexp> = Vec::new();
        for i in items {
            if i.is_false() {
                return Sexp::bool(false);
            }
            if i.is_true() {
                continue;
            }
            if let Some("and") = i.head() {
                kept.extend(i.as_list().unwrap()[1..].iter().cloned());
            } else {
                kept.push(i);
            }
        }
        match kept.len() {
            0 => Sexp::bool(true),
            1 => kept.pop().unwrap(),
            _ => Sexp::app("and", kept),
        }
    }

    pub fn or(items: Vec<Sexp>) -> Sexp {
        let mut kept: Vec<Sexp> = Vec::new();
        for i in items {
            if i.is_true() {
                return Sexp::bool(true);
            }
            if !i.is_false() {
                kept.push(i);
            }
        }
        match kept.len() {
            0 => Sexp::bool(false),
            1 => kept.pop().unwrap(),
            _ => Sexp::app("or", kept),
        }
    }

    pub fn not(x: Sexp) -> Sexp {
        if x.is_true() {
            return Sexp::bool(false);
        }
        if x.is_false() {
            return Sexp::bool(true);
        }
        if let (Some("not"), Some(v)) = (x.head(), x.as_list()) {
            return v[1].clone();
        }
        Sexp::app("not", vec![x])
    }

    pub fn implies(a: Sexp, b: Sexp) -> Sexp {
        if a.is_true() {
            return b;
        }
        if a.is_false() || b.is_true() {
            return Sexp::bool(true);
        }
        Sexp::app("=>", vec![a, b])
    }

    pub fn eq(a: Sexp, b: Sexp) -> Sexp {
        if a == b {
            return Sexp::bool(true);
        }
        Sexp::app("=", vec![a, b])
    }

    pub fn ite(c: Sexp, t: Sexp, e: Sexp) -> Sexp {
        if c.is_true() || t == e {
            return t;
        }
        if c.is_false() {
            return e;
        }
        Sexp::app("ite", vec![c, t, e])
    }

    /// Replaces atoms through `f`.
    pub fn map_atoms(&self, f: &dyn Fn(&str) -> Option<Sexp>) -> Sexp {
        match self {
            Sexp::Atom(a) => f(a).unwrap_or_else(|| self.clone()),
            Sexp::List(v) => Sexp::List(v.iter().map(|x| x.map_atoms(f)).collect()),
        }
    }

    pub fn visit_atoms(&self, f: &mut dyn FnMut(&str)) {
        match self {
            Sexp::Atom(a) => f(a),
            Sexp::List(v) => v.iter().for_each(|x| x.visit_atoms(f)),
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("malformed s-expression: {0}")]
pub struct SexpError(pub String);

/// Parses exactly one s-expression.
pub fn parse(text: &str) -> Result<Sexp, SexpError> {
    let mut all = parse_all(text)?;
    match all.len() {
        1 => Ok(all.pop().unwrap()),
        n => Err(SexpError(format!("expected one expression, found {n}"))),
    }
}

pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let chars: Vec<char> = text.chars().collect();
    let mut stack: Vec<Vec<Sexp>> = vec![Vec::new()];
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ';' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => {
                stack.push(Vec::new());
                i += 1;
            }
            ')' => {
                if stack.len() < 2 {
                    return Err(SexpError("unbalanced `)`".into()));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexp::List(done));
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '"' => {
                let start = i;
                i += 1;
                // SMT-LIB escapes a quote by doubling it
                loop {
                    if i >= chars.len() {
                        return Err(SexpError("unterminated string".into()));
                    }
                    if chars[i] == '"' {
                        if chars.get(i + 1) == Some(&'"') {
                            i += 2;
                            continue;
                        }
                        i += 1;
                        break;
                    }
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
            '|' => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i] != '|' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(SexpError("unterminated quoted symbol".into()));
                }
                i += 1;
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].is_whitespace() && !matches!(chars[i], '(' | ')' | ';' | '"') {
                    i += 1;
                }
                stack.last_mut().unwrap().push(Sexp::Atom(chars[start..i].iter().collect()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SexpError("unbalanced `(`".into()));
    }
    Ok(stack.pop().unwrap())
}

/// Whether `text` holds at least one complete top-level expression.
pub(crate) fn is_complete(text: &str) -> bool {
    let mut depth = 0i64;
    let mut seen = false;
    let mut in_str = false;
    let mut in_quote = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if in_str {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    chars.next();
                } else {
                    in_str = false;
                }
            }
            continue;
        }
        if in_quote {
            if c == '|' {
                in_quote = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_str = true;
                seen = true;
            }
            '|' => {
                in_quote = true;
                seen = true;
            }
            '(' => {
                depth += 1;
                seen = true;
            }
            ')' => depth -= 1,
            c if !c.is_whitespace() => seen = true,
            _ => {}
        }
    }
    seen && depth <= 0 && !in_str && !in_quote
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "(define-fun x () Int (- 3))";
        assert_eq!(parse(text).unwrap().to_string(), text);
        assert_eq!(Sexp::int(-3).to_string(), "(- 3)");
    }

    #[test]
    fn strings_and_quotes() {
        let s = parse(r#"(error "line 1 ""bad"" (x")"#).unwrap();
        assert_eq!(s.as_list().unwrap().len(), 2);
        assert!(parse("|a b|").is_ok());
        assert!(is_complete("(a (b)\n c)"));
        assert!(!is_complete("(a (b)"));
        assert!(!is_complete("(error \"x)\""));
    }

    #[test]
    fn simplifying_builders() {
        assert!(Sexp::and(vec![Sexp::bool(true), Sexp::bool(true)]).is_true());
        assert_eq!(Sexp::and(vec![Sexp::atom("a"), Sexp::bool(true)]), Sexp::atom("a"));
        assert!(Sexp::implies(Sexp::bool(false), Sexp::atom("a")).is_true());
        assert_eq!(Sexp::not(Sexp::not(Sexp::atom("p"))), Sexp::atom("p"));
    }
}
