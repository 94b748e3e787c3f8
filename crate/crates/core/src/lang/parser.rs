// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent parser followed by a resolution pass.
//!
//! Resolution checks declare-before-use, `break` placement, call arity and
//! the absence of recursion, and renames later declarations that reuse a name
//! already declared in the same function, so every variable name is unique
//! per function.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "goto", "continue", "switch", "case", "default", "do", "struct", "union", "enum", "char", "typedef", "sizeof",
    "unsigned", "static", "const", "printf", "scanf", "malloc", "free", "long", "short",
];

pub fn parse(source: &str) -> Result<Ast, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, next_id: 0 };
    let mut functions = Vec::new();
    while p.peek() != &Tok::Eof {
        functions.push(p.function()?);
    }
    if functions.is_empty() {
        let t = &p.tokens[p.pos];
        return Err(ParseError::Syntax {
            line: t.span.line,
            col: t.span.col,
            expected: vec!["function definition".into()],
            found: t.tok.describe(),
        });
    }
    let mut ast = Ast { functions, next_id: p.next_id };
    resolve(&mut ast)?;
    super::types::typecheck(&ast)?;
    Ok(ast)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_id: u32,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.tokens[(self.pos + k).min(self.tokens.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn fresh_id(&mut self) -> StmtId {
        let id = StmtId(self.next_id);
        self.next_id += 1;
        id
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = &self.tokens[self.pos];
        if let Tok::Ident(name) = &t.tok {
            if UNSUPPORTED_KEYWORDS.contains(&name.as_str()) {
                return ParseError::Unsupported { line: t.span.line, col: t.span.col, feature: name.clone() };
            }
        }
        if let Tok::Punct(p) = &t.tok {
            let feature = match *p {
                "\"" | "'" => Some("string or character literal"),
                "&" => Some("address-of / bitwise and"),
                "->" | "." => Some("member access"),
                "?" => Some("conditional expression"),
                "<<" | ">>" | "|" | "^" | "~" => Some("bitwise operator"),
                _ => None,
            };
            if let Some(feature) = feature {
                return ParseError::Unsupported { line: t.span.line, col: t.span.col, feature: feature.into() };
            }
        }
        ParseError::Syntax {
            line: t.span.line,
            col: t.span.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: t.tok.describe(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &'static str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(&[&format!("`{p}`")]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn type_kw(&self) -> Option<Type> {
        match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "int" => Some(Type::Int),
                "float" | "double" => Some(Type::Float),
                "void" => Some(Type::Void),
                _ => None,
            },
            _ => None,
        }
    }

    fn function(&mut self) -> Result<Function, ParseError> {
        let span = self.span();
        let ret_ty = self.type_kw().ok_or_else(|| self.error(&["`int`", "`float`", "`void`"]))?;
        self.bump();
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        if !self.is_punct(")") {
            if self.is_kw("void") && matches!(self.peek_at(1), Tok::Punct(")")) {
                self.bump();
            } else {
                loop {
                    let ty = match self.type_kw() {
                        Some(Type::Void) | None => return Err(self.error(&["parameter type"])),
                        Some(t) => t,
                    };
                    self.bump();
                    if self.is_punct("*") || self.is_punct("&") {
                        let s = self.span();
                        return Err(ParseError::Unsupported { line: s.line, col: s.col, feature: "pointer".into() });
                    }
                    let pname = self.ident()?;
                    if self.is_punct("[") {
                        let s = self.span();
                        return Err(ParseError::Unsupported {
                            line: s.line,
                            col: s.col,
                            feature: "array parameter".into(),
                        });
                    }
                    params.push(Param { ty, name: pname });
                    if !self.eat_punct(",") {
                        break;
                    }
                }
            }
        }
        self.expect_punct(")")?;
        if !self.is_punct("{") {
            return Err(self.error(&["`{`"]));
        }
        let body = match self.block()?.kind {
            StmtKind::Block(stmts) => stmts,
            _ => unreachable!(),
        };
        Ok(Function { ret_ty, name, params, body, span })
    }

    fn block(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.is_punct("}") {
            if self.peek() == &Tok::Eof {
                return Err(self.error(&["`}`"]));
            }
            stmts.extend(self.statement()?);
        }
        self.bump();
        Ok(Stmt { id: self.fresh_id(), span, kind: StmtKind::Block(stmts) })
    }

    /// One syntactic statement; declarations with several declarators expand to several.
    fn statement(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let span = self.span();
        if let Some(ty) = self.type_kw() {
            let decls = self.declaration(ty)?;
            self.expect_punct(";")?;
            return Ok(decls);
        }
        let kind = match self.peek().clone() {
            Tok::Punct("{") => return Ok(vec![self.block()?]),
            Tok::Punct(";") => {
                self.bump();
                StmtKind::Empty
            }
            Tok::Ident(kw) => match kw.as_str() {
                "if" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    let then_branch = Box::new(self.single_statement()?);
                    let else_branch = if self.is_kw("else") {
                        self.bump();
                        Some(Box::new(self.single_statement()?))
                    } else {
                        None
                    };
                    StmtKind::If { cond, then_branch, else_branch }
                }
                "while" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let cond = self.expr()?;
                    self.expect_punct(")")?;
                    StmtKind::While { cond, body: Box::new(self.single_statement()?) }
                }
                "for" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let init = if self.is_punct(";") {
                        None
                    } else if let Some(ty) = self.type_kw() {
                        let mut decls = self.declaration(ty)?;
                        if decls.len() != 1 {
                            let s = self.span();
                            return Err(ParseError::Unsupported {
                                line: s.line,
                                col: s.col,
                                feature: "multiple declarators in for-initializer".into(),
                            });
                        }
                        Some(Box::new(decls.remove(0)))
                    } else {
                        Some(Box::new(self.simple_statement()?))
                    };
                    self.expect_punct(";")?;
                    let cond = if self.is_punct(";") { None } else { Some(self.expr()?) };
                    self.expect_punct(";")?;
                    let step = if self.is_punct(")") { None } else { Some(Box::new(self.simple_statement()?)) };
                    self.expect_punct(")")?;
                    let body = Box::new(self.single_statement()?);
                    StmtKind::For { init, cond, step, body }
                }
                "break" => {
                    self.bump();
                    self.expect_punct(";")?;
                    StmtKind::Break
                }
                "return" => {
                    self.bump();
                    let value = if self.is_punct(";") { None } else { Some(self.expr()?) };
                    self.expect_punct(";")?;
                    StmtKind::Return(value)
                }
                "print" => {
                    self.bump();
                    self.expect_punct("(")?;
                    let e = self.expr()?;
                    self.expect_punct(")")?;
                    self.expect_punct(";")?;
                    StmtKind::Print(e)
                }
                "else" => return Err(self.error(&["statement"])),
                _ => {
                    let s = self.simple_statement()?;
                    self.expect_punct(";")?;
                    return Ok(vec![s]);
                }
            },
            Tok::Punct("++") | Tok::Punct("--") => {
                let s = self.simple_statement()?;
                self.expect_punct(";")?;
                return Ok(vec![s]);
            }
            _ => return Err(self.error(&["statement"])),
        };
        Ok(vec![Stmt { id: self.fresh_id(), span, kind }])
    }

    /// A statement in a position that holds exactly one (loop or branch body).
    fn single_statement(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        let mut stmts = self.statement()?;
        if stmts.len() == 1 {
            Ok(stmts.remove(0))
        } else {
            Ok(Stmt { id: self.fresh_id(), span, kind: StmtKind::Block(stmts) })
        }
    }

    fn declaration(&mut self, ty: Type) -> Result<Vec<Stmt>, ParseError> {
        self.bump();
        if ty == Type::Void {
            return Err(self.error(&["variable type"]));
        }
        let mut out = Vec::new();
        loop {
            let span = self.span();
            if self.is_punct("*") {
                return Err(ParseError::Unsupported { line: span.line, col: span.col, feature: "pointer".into() });
            }
            let name = self.ident()?;
            let mut size = None;
            if self.eat_punct("[") {
                let s = self.span();
                match self.bump().tok {
                    Tok::Int(n) if n > 0 => size = Some(n as usize),
                    _ => {
                        return Err(ParseError::Unsupported {
                            line: s.line,
                            col: s.col,
                            feature: "array without a positive constant bound".into(),
                        })
                    }
                }
                self.expect_punct("]")?;
                if self.is_punct("[") {
                    let s = self.span();
                    return Err(ParseError::Unsupported {
                        line: s.line,
                        col: s.col,
                        feature: "multi-dimensional array".into(),
                    });
                }
                if ty != Type::Int {
                    return Err(ParseError::Unsupported { line: s.line, col: s.col, feature: "non-integer array".into() });
                }
            }
            let init = if self.eat_punct("=") {
                if size.is_some() {
                    let s = self.span();
                    return Err(ParseError::Unsupported {
                        line: s.line,
                        col: s.col,
                        feature: "array initializer".into(),
                    });
                }
                Some(self.rhs()?)
            } else {
                None
            };
            out.push(Stmt { id: self.fresh_id(), span, kind: StmtKind::Decl { ty, name, size, init } });
            if !self.eat_punct(",") {
                break;
            }
        }
        Ok(out)
    }

    fn rhs(&mut self) -> Result<Rhs, ParseError> {
        if self.is_kw("read") && matches!(self.peek_at(1), Tok::Punct("(")) && matches!(self.peek_at(2), Tok::Punct(")"))
        {
            self.bump();
            self.bump();
            self.bump();
            Ok(Rhs::Read)
        } else {
            Ok(Rhs::Expr(self.expr()?))
        }
    }

    /// Assignment, increment or call: the statements allowed in `for` headers.
    fn simple_statement(&mut self) -> Result<Stmt, ParseError> {
        let span = self.span();
        if self.is_punct("++") || self.is_punct("--") {
            let op = if self.is_punct("++") { AssignOp::Inc } else { AssignOp::Dec };
            self.bump();
            let target = self.lvalue()?;
            return Ok(Stmt { id: self.fresh_id(), span, kind: StmtKind::Assign { target, op, value: None } });
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Punct("(")) && !is_reserved(&name) {
                let e = self.expr()?;
                return Ok(Stmt { id: self.fresh_id(), span, kind: StmtKind::Expr(e) });
            }
        }
        let target = self.lvalue()?;
        let op = match self.peek() {
            Tok::Punct("=") => AssignOp::Set,
            Tok::Punct("+=") => AssignOp::Add,
            Tok::Punct("-=") => AssignOp::Sub,
            Tok::Punct("*=") => AssignOp::Mul,
            Tok::Punct("/=") => AssignOp::Div,
            Tok::Punct("%=") => AssignOp::Mod,
            Tok::Punct("++") => AssignOp::Inc,
            Tok::Punct("--") => AssignOp::Dec,
            _ => return Err(self.error(&["`=`", "`+=`", "`++`"])),
        };
        self.bump();
        let value = match op {
            AssignOp::Inc | AssignOp::Dec => None,
            AssignOp::Set => Some(self.rhs()?),
            _ => Some(Rhs::Expr(self.expr()?)),
        };
        Ok(Stmt { id: self.fresh_id(), span, kind: StmtKind::Assign { target, op, value } })
    }

    fn lvalue(&mut self) -> Result<LValue, ParseError> {
        let name = self.ident()?;
        if self.eat_punct("[") {
            let idx = self.expr()?;
            self.expect_punct("]")?;
            Ok(LValue::Index(name, idx))
        } else {
            Ok(LValue::Var(name))
        }
    }

    pub fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Punct("+") => BinOp::Add,
            Tok::Punct("-") => BinOp::Sub,
            Tok::Punct("*") => BinOp::Mul,
            Tok::Punct("/") => BinOp::Div,
            Tok::Punct("%") => BinOp::Mod,
            Tok::Punct("<") => BinOp::Lt,
            Tok::Punct("<=") => BinOp::Le,
            Tok::Punct(">") => BinOp::Gt,
            Tok::Punct(">=") => BinOp::Ge,
            Tok::Punct("==") => BinOp::Eq,
            Tok::Punct("!=") => BinOp::Ne,
            Tok::Punct("&&") => BinOp::And,
            Tok::Punct("||") => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binop() {
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        if self.is_punct("?") || self.is_punct("&") || self.is_punct("|") || self.is_punct("^") {
            return Err(self.error(&["operator"]));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat_punct("-") {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Int(v) => Expr::Int(-v),
                Expr::Real(t) if !t.starts_with('-') => Expr::Real(format!("-{t}")),
                other => Expr::Unary(UnOp::Neg, Box::new(other)),
            });
        }
        if self.eat_punct("+") {
            return self.unary();
        }
        if self.eat_punct("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        if self.is_punct("(") {
            if let Tok::Ident(kw) = self.peek_at(1).clone() {
                let cast = match kw.as_str() {
                    "int" => Some(Type::Int),
                    "float" | "double" => Some(Type::Float),
                    _ => None,
                };
                if let Some(ty) = cast {
                    if matches!(self.peek_at(2), Tok::Punct(")")) {
                        self.bump();
                        self.bump();
                        self.bump();
                        return Ok(Expr::Cast(ty, Box::new(self.unary()?)));
                    }
                }
            }
        }
        if self.is_punct("*") || self.is_punct("&") {
            let s = self.span();
            return Err(ParseError::Unsupported { line: s.line, col: s.col, feature: "pointer".into() });
        }
        if self.is_punct("++") || self.is_punct("--") {
            let s = self.span();
            return Err(ParseError::Unsupported {
                line: s.line,
                col: s.col,
                feature: "increment inside an expression".into(),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Real(t) => {
                self.bump();
                Ok(Expr::Real(t))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "true" || name == "false" => {
                self.bump();
                Ok(Expr::Bool(name == "true"))
            }
            Tok::Ident(name) if name == "read" => {
                let s = self.span();
                Err(ParseError::Unsupported {
                    line: s.line,
                    col: s.col,
                    feature: "read() nested inside an expression".into(),
                })
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat_punct("(") {
                    let mut args = Vec::new();
                    if !self.is_punct(")") {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat_punct(",") {
                                break;
                            }
                        }
                    }
                    self.expect_punct(")")?;
                    Ok(Expr::Call(name, args))
                } else if self.eat_punct("[") {
                    let idx = self.expr()?;
                    self.expect_punct("]")?;
                    Ok(Expr::Index(name, Box::new(idx)))
                } else {
                    if self.is_punct("++") || self.is_punct("--") {
                        let s = self.span();
                        return Err(ParseError::Unsupported {
                            line: s.line,
                            col: s.col,
                            feature: "increment inside an expression".into(),
                        });
                    }
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(self.error(&["expression"])),
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "int" | "float" | "double" | "void" | "if" | "else" | "while" | "for" | "break" | "return" | "print" | "read"
    ) || UNSUPPORTED_KEYWORDS.contains(&s)
}

/// Parses a single expression; used for expressions supplied on the command line and in tests.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    let mut p = Parser { tokens, pos: 0, next_id: 0 };
    let e = p.expr()?;
    if p.peek() != &Tok::Eof {
        return Err(p.error(&["end of expression"]));
    }
    Ok(e)
}

struct Resolver<'a> {
    scopes: Vec<HashMap<String, String>>,
    used: HashSet<String>,
    arrays: HashSet<String>,
    signatures: &'a HashMap<String, usize>,
    calls: HashSet<String>,
    loop_depth: usize,
}

impl Resolver<'_> {
    fn lookup(&self, name: &str) -> Option<&String> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn declare(&mut self, name: &str) -> String {
        let unique = if self.used.contains(name) {
            (2..).map(|k| format!("{name}_{k}")).find(|c| !self.used.contains(c)).unwrap()
        } else {
            name.to_string()
        };
        self.used.insert(unique.clone());
        self.scopes.last_mut().unwrap().insert(name.to_string(), unique.clone());
        unique
    }

    fn expr(&mut self, e: &mut Expr, span: Span) -> Result<(), ParseError> {
        match e {
            Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) => Ok(()),
            Expr::Var(name) => {
                let r = self.lookup(name).cloned().ok_or_else(|| undeclared(name, span))?;
                if self.arrays.contains(&r) {
                    return Err(ParseError::Unsupported {
                        line: span.line,
                        col: span.col,
                        feature: "array used as a value".into(),
                    });
                }
                *name = r;
                Ok(())
            }
            Expr::Index(name, idx) => {
                let r = self.lookup(name).cloned().ok_or_else(|| undeclared(name, span))?;
                if !self.arrays.contains(&r) {
                    return Err(semantic(span, format!("`{name}` is not an array")));
                }
                *name = r;
                self.expr(idx, span)
            }
            Expr::Unary(_, inner) | Expr::Cast(_, inner) => self.expr(inner, span),
            Expr::Binary(_, l, r) => {
                self.expr(l, span)?;
                self.expr(r, span)
            }
            Expr::Call(name, args) => {
                match self.signatures.get(name.as_str()) {
                    None => return Err(semantic(span, format!("call to undefined function `{name}`"))),
                    Some(&arity) if arity != args.len() => {
                        return Err(semantic(span, format!("`{name}` expects {arity} argument(s)")))
                    }
                    _ => {}
                }
                self.calls.insert(name.clone());
                args.iter_mut().try_for_each(|a| self.expr(a, span))
            }
        }
    }

    fn rhs(&mut self, r: &mut Rhs, span: Span) -> Result<(), ParseError> {
        match r {
            Rhs::Read => Ok(()),
            Rhs::Expr(e) => self.expr(e, span),
        }
    }

    fn lvalue(&mut self, lv: &mut LValue, span: Span) -> Result<(), ParseError> {
        match lv {
            LValue::Var(name) => {
                let r = self.lookup(name).cloned().ok_or_else(|| undeclared(name, span))?;
                if self.arrays.contains(&r) {
                    return Err(ParseError::Unsupported {
                        line: span.line,
                        col: span.col,
                        feature: "whole-array assignment".into(),
                    });
                }
                *name = r;
                Ok(())
            }
            LValue::Index(name, idx) => {
                let r = self.lookup(name).cloned().ok_or_else(|| undeclared(name, span))?;
                if !self.arrays.contains(&r) {
                    return Err(semantic(span, format!("`{name}` is not an array")));
                }
                *name = r;
                self.expr(idx, span)
            }
        }
    }

    fn stmt(&mut self, s: &mut Stmt) -> Result<(), ParseError> {
        let span = s.span;
        match &mut s.kind {
            StmtKind::Decl { name, size, init, .. } => {
                if let Some(init) = init {
                    self.rhs(init, span)?;
                }
                let unique = self.declare(name);
                if size.is_some() {
                    self.arrays.insert(unique.clone());
                }
                *name = unique;
                Ok(())
            }
            StmtKind::Assign { target, value, .. } => {
                if let Some(v) = value {
                    self.rhs(v, span)?;
                }
                self.lvalue(target, span)
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.expr(cond, span)?;
                self.scoped(|r| r.stmt(then_branch))?;
                if let Some(e) = else_branch {
                    self.scoped(|r| r.stmt(e))?;
                }
                Ok(())
            }
            StmtKind::While { cond, body } => {
                self.expr(cond, span)?;
                self.loop_depth += 1;
                let res = self.scoped(|r| r.stmt(body));
                self.loop_depth -= 1;
                res
            }
            StmtKind::For { init, cond, step, body } => self.scoped(|r| {
                if let Some(i) = init {
                    r.stmt(i)?;
                }
                if let Some(c) = cond {
                    r.expr(c, span)?;
                }
                if let Some(st) = step {
                    r.stmt(st)?;
                }
                r.loop_depth += 1;
                let res = r.scoped(|r| r.stmt(body));
                r.loop_depth -= 1;
                res
            }),
            StmtKind::Break => {
                if self.loop_depth == 0 {
                    Err(semantic(span, "`break` outside of a loop".into()))
                } else {
                    Ok(())
                }
            }
            StmtKind::Return(Some(e)) | StmtKind::Print(e) | StmtKind::Expr(e) => self.expr(e, span),
            StmtKind::Return(None) | StmtKind::Empty => Ok(()),
            StmtKind::Block(stmts) => self.scoped(|r| stmts.iter_mut().try_for_each(|s| r.stmt(s))),
        }
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scopes.push(HashMap::new());
        let out = f(self);
        self.scopes.pop();
        out
    }
}

fn undeclared(name: &str, span: Span) -> ParseError {
    semantic(span, format!("use of undeclared variable `{name}`"))
}

fn semantic(span: Span, message: String) -> ParseError {
    ParseError::Semantic { line: span.line, col: span.col, message }
}

fn resolve(ast: &mut Ast) -> Result<(), ParseError> {
    let mut signatures = HashMap::new();
    for f in &ast.functions {
        if signatures.insert(f.name.clone(), f.params.len()).is_some() {
            return Err(semantic(f.span, format!("function `{}` defined twice", f.name)));
        }
    }
    let mut call_graph: HashMap<String, HashSet<String>> = HashMap::new();
    for f in &mut ast.functions {
        let mut r = Resolver {
            scopes: vec![HashMap::new()],
            used: HashSet::new(),
            arrays: HashSet::new(),
            signatures: &signatures,
            calls: HashSet::new(),
            loop_depth: 0,
        };
        for p in &mut f.params {
            if r.used.contains(&p.name) {
                return Err(semantic(f.span, format!("duplicate parameter `{}`", p.name)));
            }
            p.name = r.declare(&p.name);
        }
        r.scoped(|r| f.body.iter_mut().try_for_each(|s| r.stmt(s)))?;
        call_graph.insert(f.name.clone(), r.calls);
    }
    // Recursion has no loop-entry labelling, so it is rejected outright.
    for f in &ast.functions {
        let mut stack: Vec<&String> = call_graph[&f.name].iter().collect();
        let mut seen = HashSet::new();
        while let Some(g) = stack.pop() {
            if g == &f.name {
                return Err(ParseError::Unsupported { line: f.span.line, col: f.span.col, feature: "recursion".into() });
            }
            if seen.insert(g) {
                stack.extend(call_graph[g].iter());
            }
        }
    }
    Ok(())
}
