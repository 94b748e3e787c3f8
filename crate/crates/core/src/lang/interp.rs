// SPDX-License-Identifier: Apache-2.0

//! Concrete interpreter, generic over the real scalar.
//!
//! This is the reference semantics the verifier is checked against: the
//! soundness oracle runs repaired and reference programs side by side here.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::types::{TypeEnv, VarType};
use crate::num::Real;

/// A literal on the input stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Real(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value<R> {
    Int(i64),
    Real(R),
    Bool(bool),
    Array(Vec<i64>),
}

impl<R: Real> Value<R> {
    pub fn as_int(&self) -> Result<i64, RuntimeError> {
        match self {
            Value::Int(v) => Ok(*v),
            Value::Bool(b) => Ok(*b as i64),
            Value::Real(r) => r.trunc_to_i64().ok_or_else(|| RuntimeError::new("real out of integer range")),
            Value::Array(_) => Err(RuntimeError::new("array used as a scalar")),
        }
    }

    pub fn as_real(&self) -> Result<R, RuntimeError> {
        match self {
            Value::Int(v) => Ok(R::from_int(*v)),
            Value::Bool(b) => Ok(R::from_int(*b as i64)),
            Value::Real(r) => Ok(r.clone()),
            Value::Array(_) => Err(RuntimeError::new("array used as a scalar")),
        }
    }

    pub fn truthy(&self) -> Result<bool, RuntimeError> {
        match self {
            Value::Bool(b) => Ok(*b),
            Value::Int(v) => Ok(*v != 0),
            Value::Real(r) => Ok(!r.is_zero()),
            Value::Array(_) => Err(RuntimeError::new("array used as a condition")),
        }
    }

    /// Equality of observable values; reals compare with `Real::same`.
    pub fn same(&self, other: &Value<R>) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Real(a), Value::Real(b)) => a.same(b),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Array(a), Value::Array(b)) => a == b,
            _ => false,
        }
    }
}

impl<R: Real> fmt::Display for Value<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(r) => write!(f, "{r}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(a) => write!(f, "{a:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct RuntimeError {
    pub message: String,
}

impl RuntimeError {
    pub fn new(message: impl Into<String>) -> Self {
        RuntimeError { message: message.into() }
    }
}

/// Input stream with read cursor, plus the emitted output.
#[derive(Clone, Debug, PartialEq)]
pub struct IoTrace<R> {
    pub input: Vec<Literal>,
    pub output: Vec<Value<R>>,
    pub cursor: usize,
}

impl<R: Real> IoTrace<R> {
    pub fn new(input: Vec<Literal>) -> Self {
        IoTrace { input, output: Vec::new(), cursor: 0 }
    }

    pub fn read(&mut self, ty: VarType) -> Result<Value<R>, RuntimeError> {
        let lit = self.input.get(self.cursor).cloned().ok_or_else(|| RuntimeError::new("read past end of input"))?;
        self.cursor += 1;
        Ok(match (ty, lit) {
            (VarType::Float, Literal::Int(v)) => Value::Real(R::from_int(v)),
            (VarType::Float, Literal::Real(v)) => {
                Value::Real(R::from_f64(v).ok_or_else(|| RuntimeError::new("non-finite real input"))?)
            }
            (_, Literal::Int(v)) => Value::Int(v),
            (_, Literal::Real(v)) => Value::Int(v.trunc() as i64),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Status {
    Finished,
    RuntimeError(String),
    Nontermination,
}

/// Result of running a program on one input.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome<R> {
    pub status: Status,
    pub ret: Value<R>,
    pub trace: IoTrace<R>,
}

impl<R: Real> Outcome<R> {
    /// Same status, return value and output.
    pub fn agrees_with(&self, other: &Outcome<R>) -> bool {
        self.status == other.status
            && self.ret.same(&other.ret)
            && self.trace.output.len() == other.trace.output.len()
            && self.trace.output.iter().zip(&other.trace.output).all(|(a, b)| a.same(b))
    }
}

pub(crate) enum Flow<R> {
    Normal,
    Break,
    Return(Value<R>),
}

pub(crate) enum Stop {
    Error(RuntimeError),
    OutOfFuel,
}

impl From<RuntimeError> for Stop {
    fn from(e: RuntimeError) -> Self {
        Stop::Error(e)
    }
}

/// Variable store of one activation.
#[derive(Clone, Debug)]
pub struct Frame<R> {
    pub vars: HashMap<String, Value<R>>,
    pub env: TypeEnv,
}

impl<R: Real> Frame<R> {
    /// All locals start at zero; declarations without initializer do not reset them.
    pub fn new(env: TypeEnv) -> Self {
        let vars = env
            .vars
            .iter()
            .map(|(n, info)| {
                let v = match info.ty {
                    VarType::Int => Value::Int(0),
                    VarType::Float => Value::Real(R::zero()),
                    VarType::IntArray(len) => Value::Array(vec![0; len]),
                };
                (n.clone(), v)
            })
            .collect();
        Frame { vars, env }
    }

    pub fn get(&self, name: &str) -> Result<&Value<R>, RuntimeError> {
        self.vars.get(name).ok_or_else(|| RuntimeError::new(format!("unknown variable `{name}`")))
    }

    /// Stores `v` converted to the declared type of `name`.
    pub fn set(&mut self, name: &str, v: Value<R>) -> Result<(), RuntimeError> {
        let converted = match self.env.var_type(name) {
            Some(VarType::Int) => Value::Int(v.as_int()?),
            Some(VarType::Float) => Value::Real(v.as_real()?),
            _ => return Err(RuntimeError::new(format!("cannot assign to `{name}`"))),
        };
        self.vars.insert(name.to_string(), converted);
        Ok(())
    }

    pub fn set_elem(&mut self, name: &str, idx: i64, v: i64) -> Result<(), RuntimeError> {
        match self.vars.get_mut(name) {
            Some(Value::Array(a)) => {
                let slot = usize::try_from(idx)
                    .ok()
                    .and_then(|i| a.get_mut(i))
                    .ok_or_else(|| RuntimeError::new(format!("index {idx} out of bounds for `{name}`")))?;
                *slot = v;
                Ok(())
            }
            _ => Err(RuntimeError::new(format!("`{name}` is not an array"))),
        }
    }
}

/// Interpreter state shared across calls.
pub struct Machine<'a, R> {
    pub ast: &'a Ast,
    pub trace: IoTrace<R>,
    pub fuel: u64,
}

impl<'a, R: Real> Machine<'a, R> {
    pub fn new(ast: &'a Ast, input: Vec<Literal>, fuel: u64) -> Self {
        Machine { ast, trace: IoTrace::new(input), fuel }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            return Err(Stop::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    pub fn eval(&mut self, frame: &Frame<R>, e: &Expr) -> Result<Value<R>, RuntimeError> {
        self.eval_inner(frame, e).map_err(|s| match s {
            Stop::Error(e) => e,
            Stop::OutOfFuel => RuntimeError::new("out of fuel inside a call"),
        })
    }

    pub(crate) fn eval_inner(&mut self, frame: &Frame<R>, e: &Expr) -> Result<Value<R>, Stop> {
        Ok(match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Real(t) => Value::Real(R::from_decimal(t).ok_or_else(|| RuntimeError::new("bad real literal"))?),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Var(n) => frame.get(n)?.clone(),
            Expr::Index(n, i) => {
                let idx = self.eval_inner(frame, i)?.as_int()?;
                match frame.get(n)? {
                    Value::Array(a) => Value::Int(
                        *usize::try_from(idx)
                            .ok()
                            .and_then(|i| a.get(i))
                            .ok_or_else(|| RuntimeError::new(format!("index {idx} out of bounds for `{n}`")))?,
                    ),
                    _ => return Err(RuntimeError::new(format!("`{n}` is not an array")).into()),
                }
            }
            Expr::Unary(UnOp::Not, inner) => Value::Bool(!self.eval_inner(frame, inner)?.truthy()?),
            Expr::Unary(UnOp::Neg, inner) => match self.eval_inner(frame, inner)? {
                Value::Real(r) => Value::Real(-r),
                v => Value::Int(v.as_int()?.checked_neg().ok_or_else(|| RuntimeError::new("integer overflow"))?),
            },
            Expr::Cast(Type::Float, inner) => Value::Real(self.eval_inner(frame, inner)?.as_real()?),
            Expr::Cast(_, inner) => Value::Int(self.eval_inner(frame, inner)?.as_int()?),
            Expr::Binary(BinOp::And, l, r) => {
                Value::Bool(self.eval_inner(frame, l)?.truthy()? && self.eval_inner(frame, r)?.truthy()?)
            }
            Expr::Binary(BinOp::Or, l, r) => {
                Value::Bool(self.eval_inner(frame, l)?.truthy()? || self.eval_inner(frame, r)?.truthy()?)
            }
            Expr::Binary(op, l, r) => {
                let lv = self.eval_inner(frame, l)?;
                let rv = self.eval_inner(frame, r)?;
                binary(*op, &lv, &rv)?
            }
            Expr::Call(name, args) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval_inner(frame, a)?);
                }
                self.call(name, vals)?
            }
        })
    }

    pub(crate) fn call(&mut self, name: &str, args: Vec<Value<R>>) -> Result<Value<R>, Stop> {
        self.tick()?;
        let ast = self.ast;
        let f = ast.function(name).ok_or_else(|| RuntimeError::new(format!("unknown function `{name}`")))?;
        let mut frame = Frame::new(TypeEnv::of_function(ast, f));
        for (p, v) in f.params.iter().zip(args) {
            frame.set(&p.name, v)?;
        }
        let flow = self.exec_block(&mut frame, &f.body)?;
        Ok(match flow {
            Flow::Return(v) => coerce_ret(f.ret_ty, v)?,
            _ => default_ret(f.ret_ty),
        })
    }

    fn exec_block(&mut self, frame: &mut Frame<R>, stmts: &[Stmt]) -> Result<Flow<R>, Stop> {
        for s in stmts {
            match self.exec(frame, s)? {
                Flow::Normal => {}
                other => return Ok(other),
            }
        }
        Ok(Flow::Normal)
    }

    pub(crate) fn assign(&mut self, frame: &mut Frame<R>, target: &LValue, v: Value<R>) -> Result<(), Stop> {
        match target {
            LValue::Var(n) => frame.set(n, v)?,
            LValue::Index(n, i) => {
                let idx = self.eval_inner(frame, i)?.as_int()?;
                frame.set_elem(n, idx, v.as_int()?)?;
            }
        }
        Ok(())
    }

    pub(crate) fn rhs_value(&mut self, frame: &Frame<R>, target_ty: VarType, rhs: &Rhs) -> Result<Value<R>, Stop> {
        match rhs {
            Rhs::Read => Ok(self.trace.read(target_ty)?),
            Rhs::Expr(e) => self.eval_inner(frame, e),
        }
    }

    pub(crate) fn exec(&mut self, frame: &mut Frame<R>, s: &Stmt) -> Result<Flow<R>, Stop> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl { name, init: Some(init), .. } => {
                let ty = frame.env.var_type(name).unwrap_or(VarType::Int);
                let v = self.rhs_value(frame, ty, init)?;
                frame.set(name, v)?;
            }
            StmtKind::Decl { .. } | StmtKind::Empty => {}
            StmtKind::Assign { target, op, value } => {
                let ty = match frame.env.var_type(target.name()) {
                    Some(VarType::IntArray(_)) => VarType::Int,
                    Some(t) => t,
                    None => VarType::Int,
                };
                let v = match (op.binop(), value) {
                    (None, Some(rhs)) => self.rhs_value(frame, ty, rhs)?,
                    (Some(bop), value) => {
                        let cur = self.eval_inner(frame, &target.as_expr())?;
                        let operand = match value {
                            Some(Rhs::Expr(e)) => self.eval_inner(frame, e)?,
                            _ => Value::Int(1),
                        };
                        binary(bop, &cur, &operand)?
                    }
                    (None, None) => Value::Int(0),
                };
                self.assign(frame, target, v)?;
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.eval_inner(frame, cond)?.truthy()? {
                    return self.exec(frame, then_branch);
                } else if let Some(e) = else_branch {
                    return self.exec(frame, e);
                }
            }
            StmtKind::While { cond, body } => loop {
                self.tick()?;
                if !self.eval_inner(frame, cond)?.truthy()? {
                    break;
                }
                match self.exec(frame, body)? {
                    Flow::Break => break,
                    Flow::Return(v) => return Ok(Flow::Return(v)),
                    Flow::Normal => {}
                }
            },
            StmtKind::For { init, cond, step, body } => {
                if let Some(i) = init {
                    self.exec(frame, i)?;
                }
                loop {
                    self.tick()?;
                    if let Some(c) = cond {
                        if !self.eval_inner(frame, c)?.truthy()? {
                            break;
                        }
                    }
                    match self.exec(frame, body)? {
                        Flow::Break => break,
                        Flow::Return(v) => return Ok(Flow::Return(v)),
                        Flow::Normal => {}
                    }
                    if let Some(st) = step {
                        self.exec(frame, st)?;
                    }
                }
            }
            StmtKind::Break => return Ok(Flow::Break),
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval_inner(frame, e)?,
                    None => Value::Int(0),
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Print(e) => {
                let v = match self.eval_inner(frame, e)? {
                    Value::Bool(b) => Value::Int(b as i64),
                    v => v,
                };
                self.trace.output.push(v);
            }
            StmtKind::Block(stmts) => return self.exec_block(frame, stmts),
            StmtKind::Expr(e) => {
                self.eval_inner(frame, e)?;
            }
        }
        Ok(Flow::Normal)
    }
}

pub(crate) fn coerce_ret<R: Real>(ty: Type, v: Value<R>) -> Result<Value<R>, RuntimeError> {
    Ok(match ty {
        Type::Float => Value::Real(v.as_real()?),
        _ => Value::Int(v.as_int()?),
    })
}

pub(crate) fn default_ret<R: Real>(ty: Type) -> Value<R> {
    match ty {
        Type::Float => Value::Real(R::zero()),
        _ => Value::Int(0),
    }
}

/// Arithmetic and comparison with C conversions; integer division truncates.
pub fn binary<R: Real>(op: BinOp, l: &Value<R>, r: &Value<R>) -> Result<Value<R>, RuntimeError> {
    let real = matches!(l, Value::Real(_)) || matches!(r, Value::Real(_));
    if op.is_logical() {
        return Ok(Value::Bool(match op {
            BinOp::And => l.truthy()? && r.truthy()?,
            _ => l.truthy()? || r.truthy()?,
        }));
    }
    if real {
        let (a, b) = (l.as_real()?, r.as_real()?);
        return Ok(match op {
            BinOp::Add => Value::Real(a + b),
            BinOp::Sub => Value::Real(a - b),
            BinOp::Mul => Value::Real(a * b),
            BinOp::Div => {
                if b.is_zero() {
                    return Err(RuntimeError::new("division by zero"));
                }
                Value::Real(a / b)
            }
            BinOp::Mod => return Err(RuntimeError::new("`%` on real operands")),
            BinOp::Lt => Value::Bool(a < b),
            BinOp::Le => Value::Bool(a <= b),
            BinOp::Gt => Value::Bool(a > b),
            BinOp::Ge => Value::Bool(a >= b),
            BinOp::Eq => Value::Bool(a == b),
            BinOp::Ne => Value::Bool(a != b),
            BinOp::And | BinOp::Or => unreachable!(),
        });
    }
    let (a, b) = (l.as_int()?, r.as_int()?);
    let overflow = || RuntimeError::new("integer overflow");
    Ok(match op {
        BinOp::Add => Value::Int(a.checked_add(b).ok_or_else(overflow)?),
        BinOp::Sub => Value::Int(a.checked_sub(b).ok_or_else(overflow)?),
        BinOp::Mul => Value::Int(a.checked_mul(b).ok_or_else(overflow)?),
        BinOp::Div => {
            if b == 0 {
                return Err(RuntimeError::new("division by zero"));
            }
            Value::Int(a.checked_div(b).ok_or_else(overflow)?)
        }
        BinOp::Mod => {
            if b == 0 {
                return Err(RuntimeError::new("division by zero"));
            }
            Value::Int(a.checked_rem(b).ok_or_else(overflow)?)
        }
        BinOp::Lt => Value::Bool(a < b),
        BinOp::Le => Value::Bool(a <= b),
        BinOp::Gt => Value::Bool(a > b),
        BinOp::Ge => Value::Bool(a >= b),
        BinOp::Eq => Value::Bool(a == b),
        BinOp::Ne => Value::Bool(a != b),
        BinOp::And | BinOp::Or => unreachable!(),
    })
}

/// Runs the entry function. Its parameters are bound from the front of `input`.
pub fn interpret<R: Real>(ast: &Ast, input: &[Literal], fuel: u64) -> Outcome<R> {
    let f = ast.entry_function();
    let mut m = Machine::<R>::new(ast, input.to_vec(), fuel);
    let env = TypeEnv::of_function(ast, f);
    let mut args = Vec::new();
    let mut status = None;
    for p in &f.params {
        match m.trace.read(env.var_type(&p.name).unwrap_or(VarType::Int)) {
            Ok(v) => args.push(v),
            Err(e) => {
                status = Some(Status::RuntimeError(e.message));
                break;
            }
        }
    }
    let (status, ret) = match status {
        Some(s) => (s, default_ret(f.ret_ty)),
        None => match m.call(&f.name, args) {
            Ok(v) => (Status::Finished, v),
            Err(Stop::Error(e)) => (Status::RuntimeError(e.message), default_ret(f.ret_ty)),
            Err(Stop::OutOfFuel) => (Status::Nontermination, default_ret(f.ret_ty)),
        },
    };
    Outcome { status, ret, trace: m.trace }
}
