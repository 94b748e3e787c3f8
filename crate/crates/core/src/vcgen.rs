// SPDX-License-Identifier: Apache-2.0

//! Verification conditions for aligned edges.
//!
//! Each side of an edge is put in SSA form over its own namespace (`s__x__k`
//! for the student, `r__x__k` for the reference). The alignment predicate at
//! the source equates entry versions, the one at the target equates exit
//! versions, and the edge verifies when
//!
//! ```text
//! phi_u /\ psi_s /\ psi_r /\ A_r /\ not[(taken_s <=> taken_r) /\ (taken_r => phi_v) /\ A_s]
//! ```
//!
//! is unsatisfiable. `A_r` collects the reference's division and indexing
//! side conditions (assumed), `A_s` the student's (proved).

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::align::{PairKind, Pred, CUR, OUT, RET};
use crate::cfa::{Cfa, GuardOrigin, GuardedAction, Lhs, Update, UpdateRhs};
use crate::lang::ast::{BinOp, Expr, StmtId, Type, UnOp};
use crate::lang::types::{ExprType, TypeEnv, VarInfo, VarType};
use crate::num::decimal_to_rational;
use crate::solver::{Model, Query, Sexp};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum VcError {
    #[error("cannot encode expression: {0}")]
    UnsupportedExpression(String),
}

/// Background theories a formula relies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theory {
    Integer,
    Real,
    Array,
    Sequence,
    UninterpretedFunction,
}

/// A fixed expression or a hole choosing among candidates; option 0 is the
/// original.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Choice<T> {
    Fixed(T),
    Hole { id: usize, options: Vec<T> },
}

impl<T: Clone> Choice<T> {
    pub fn original(&self) -> &T {
        match self {
            Choice::Fixed(t) => t,
            Choice::Hole { options, .. } => &options[0],
        }
    }

    /// Picks the assigned option; unassigned holes keep the original.
    pub fn resolve(&self, assignment: &BTreeMap<usize, usize>) -> T {
        match self {
            Choice::Fixed(t) => t.clone(),
            Choice::Hole { id, options } => options[assignment.get(id).copied().unwrap_or(0)].clone(),
        }
    }

    fn options(&self) -> Vec<(Sexp, &T)> {
        match self {
            Choice::Fixed(t) => vec![(Sexp::bool(true), t)],
            Choice::Hole { id, options } => {
                options.iter().enumerate().map(|(j, t)| (Sexp::eq(selector(*id), Sexp::int(j as i64)), t)).collect()
            }
        }
    }
}

/// Solver constant holding the choice of hole `id`.
pub fn selector(id: usize) -> Sexp {
    Sexp::atom(format!("h__{id}"))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SketchUpdate {
    pub lhs: Lhs,
    pub rhs: Choice<UpdateRhs>,
    pub origin: Option<StmtId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SketchGa {
    pub guard: Choice<Expr>,
    pub branch: bool,
    pub guard_origin: Option<GuardOrigin>,
    pub updates: Vec<SketchUpdate>,
}

/// A label with every expression fixed.
pub fn fixed_sketch(label: &[GuardedAction]) -> Vec<SketchGa> {
    label
        .iter()
        .map(|ga| SketchGa {
            guard: Choice::Fixed(ga.guard.clone()),
            branch: ga.branch,
            guard_origin: ga.guard_origin,
            updates: ga
                .updates
                .iter()
                .map(|u| SketchUpdate { lhs: u.lhs.clone(), rhs: Choice::Fixed(u.rhs.clone()), origin: u.origin })
                .collect(),
        })
        .collect()
}

/// Fills every hole with its assigned option.
pub fn resolve_sketch(sketch: &[SketchGa], assignment: &BTreeMap<usize, usize>) -> Vec<GuardedAction> {
    sketch
        .iter()
        .map(|ga| GuardedAction {
            guard: ga.guard.resolve(assignment),
            branch: ga.branch,
            guard_origin: ga.guard_origin,
            updates: ga
                .updates
                .iter()
                .map(|u| Update { lhs: u.lhs.clone(), rhs: u.rhs.resolve(assignment), origin: u.origin })
                .collect(),
        })
        .collect()
}

/// Function signatures of one program, by position.
#[derive(Clone, Debug, Default)]
pub struct ProgramInfo {
    pub funcs: Vec<(Vec<VarType>, Type)>,
    pub index: BTreeMap<String, usize>,
}

impl ProgramInfo {
    pub fn of(cfa: &Cfa) -> ProgramInfo {
        let funcs = cfa
            .functions
            .iter()
            .map(|f| (f.params.iter().map(|p| f.env.var_type(p).unwrap_or(VarType::Int)).collect(), f.ret_ty))
            .collect();
        let index = cfa.functions.iter().enumerate().map(|(i, f)| (f.name.clone(), i)).collect();
        ProgramInfo { funcs, index }
    }
}

fn ret_sort(t: Type) -> &'static str {
    if t == Type::Float {
        "Real"
    } else {
        "Int"
    }
}

fn var_sort(t: VarType) -> &'static str {
    match t {
        VarType::Int => "Int",
        VarType::Float => "Real",
        VarType::IntArray(_) => "(Array Int Int)",
    }
}

/// One side of an edge in SSA form.
#[derive(Clone, Debug, PartialEq)]
pub struct SsaFormula {
    pub clauses: Vec<Sexp>,
    /// Conjunction of the branch guards.
    pub taken: Sexp,
    /// Side conditions, each `reach => cond`.
    pub safety: Vec<Sexp>,
    /// Variable to version-0 symbol, for every variable referenced.
    pub entry: BTreeMap<String, Sexp>,
    /// Variable to final symbol.
    pub exit: BTreeMap<String, Sexp>,
    pub theories: BTreeSet<Theory>,
}

impl Default for SsaFormula {
    fn default() -> Self {
        SsaFormula {
            clauses: Vec::new(),
            taken: Sexp::bool(true),
            safety: Vec::new(),
            entry: BTreeMap::new(),
            exit: BTreeMap::new(),
            theories: BTreeSet::new(),
        }
    }
}

impl SsaFormula {
    pub fn formula(&self) -> Sexp {
        Sexp::and(self.clauses.clone())
    }

    pub fn safe(&self) -> Sexp {
        Sexp::and(self.safety.clone())
    }
}

/// SSA construction for one side.
struct Ssa<'a> {
    env: &'a TypeEnv,
    ret_ty: Type,
    info: &'a ProgramInfo,
    ns: String,
    uf: String,
    versions: BTreeMap<String, u32>,
    consts: &'a mut BTreeMap<String, String>,
    ufs: &'a mut BTreeMap<String, (Vec<String>, String)>,
    holes: &'a mut BTreeMap<usize, usize>,
    out: SsaFormula,
}

impl<'a> Ssa<'a> {
    fn sort_of(&self, var: &str) -> Result<String, VcError> {
        Ok(match var {
            RET => ret_sort(self.ret_ty).into(),
            CUR => "Int".into(),
            OUT => "(Seq Val)".into(),
            v => var_sort(
                self.env.var_type(v).ok_or_else(|| VcError::UnsupportedExpression(format!("unknown variable `{v}`")))?,
            )
            .into(),
        })
    }

    fn note_sort(&mut self, sort: &str) {
        self.out.theories.insert(match sort {
            "Int" => Theory::Integer,
            "Real" => Theory::Real,
            "(Seq Val)" => Theory::Sequence,
            _ => Theory::Array,
        });
    }

    fn sym(&mut self, var: &str, k: u32) -> Result<Sexp, VcError> {
        let name = format!("{}__{}__{}", self.ns, var, k);
        let sort = self.sort_of(var)?;
        self.note_sort(&sort);
        self.consts.insert(name.clone(), sort);
        let s = Sexp::atom(name);
        if k == 0 {
            self.out.entry.insert(var.to_string(), s.clone());
        }
        Ok(s)
    }

    fn current(&mut self, var: &str) -> Result<Sexp, VcError> {
        let k = self.versions.get(var).copied().unwrap_or(0);
        self.sym(var, k)
    }

    fn bump(&mut self, var: &str) -> Result<Sexp, VcError> {
        let k = self.versions.get(var).copied().unwrap_or(0) + 1;
        self.versions.insert(var.to_string(), k);
        self.sym(var, k)
    }

    fn uf(&mut self, name: &str, args: Vec<&str>, ret: &str) -> String {
        let full = format!("{}{}", self.uf, name);
        self.ufs.insert(full.clone(), (args.into_iter().map(String::from).collect(), ret.to_string()));
        self.out.theories.insert(Theory::UninterpretedFunction);
        full
    }

    fn safe(&mut self, reach: &Sexp, cond: Sexp) {
        let c = Sexp::implies(reach.clone(), cond);
        if !c.is_true() {
            self.out.safety.push(c);
        }
    }

    fn expr(&mut self, e: &Expr, reach: &Sexp) -> Result<(Sexp, ExprType), VcError> {
        Ok(match e {
            Expr::Int(v) => (Sexp::int(*v), ExprType::Int),
            Expr::Real(t) => {
                let r = decimal_to_rational(t)
                    .ok_or_else(|| VcError::UnsupportedExpression(format!("real literal `{t}`")))?;
                (Sexp::real(&r), ExprType::Real)
            }
            Expr::Bool(b) => (Sexp::bool(*b), ExprType::Bool),
            Expr::Var(v) => {
                let t = match self.env.var_type(v) {
                    Some(VarType::Int) => ExprType::Int,
                    Some(VarType::Float) => ExprType::Real,
                    _ => return Err(VcError::UnsupportedExpression(format!("`{v}` used as a scalar"))),
                };
                (self.current(v)?, t)
            }
            Expr::Index(a, i) => {
                let n = match self.env.var_type(a) {
                    Some(VarType::IntArray(n)) => n,
                    _ => return Err(VcError::UnsupportedExpression(format!("`{a}` is not an array"))),
                };
                let idx = self.int_expr(i, reach)?;
                self.safe(reach, in_bounds(&idx, n));
                let arr = self.current(a)?;
                (Sexp::app("select", vec![arr, idx]), ExprType::Int)
            }
            Expr::Unary(UnOp::Not, x) => {
                let b = self.bool_expr(x, reach)?;
                (Sexp::not(b), ExprType::Bool)
            }
            Expr::Unary(UnOp::Neg, x) => {
                let (t, ty) = self.expr(x, reach)?;
                match ty {
                    ExprType::Real => (Sexp::app("-", vec![t]), ExprType::Real),
                    _ => (Sexp::app("-", vec![to_int(t, ty)]), ExprType::Int),
                }
            }
            Expr::Cast(Type::Float, x) => {
                let (t, ty) = self.expr(x, reach)?;
                (to_real(t, ty), ExprType::Real)
            }
            Expr::Cast(_, x) => {
                let (t, ty) = self.expr(x, reach)?;
                (to_int(t, ty), ExprType::Int)
            }
            Expr::Binary(BinOp::And, l, r) => {
                let a = self.bool_expr(l, reach)?;
                let b = self.bool_expr(r, &Sexp::and(vec![reach.clone(), a.clone()]))?;
                (Sexp::and(vec![a, b]), ExprType::Bool)
            }
            Expr::Binary(BinOp::Or, l, r) => {
                let a = self.bool_expr(l, reach)?;
                let b = self.bool_expr(r, &Sexp::and(vec![reach.clone(), Sexp::not(a.clone())]))?;
                (Sexp::or(vec![a, b]), ExprType::Bool)
            }
            Expr::Binary(op, l, r) => {
                let (a, ta) = self.expr(l, reach)?;
                let (b, tb) = self.expr(r, reach)?;
                let real = ta == ExprType::Real || tb == ExprType::Real;
                let (a, b) = if real { (to_real(a, ta), to_real(b, tb)) } else { (to_int(a, ta), to_int(b, tb)) };
                let zero = if real { Sexp::atom("0.0") } else { Sexp::int(0) };
                let num = if real { ExprType::Real } else { ExprType::Int };
                match op {
                    BinOp::Add => (Sexp::app("+", vec![a, b]), num),
                    BinOp::Sub => (Sexp::app("-", vec![a, b]), num),
                    BinOp::Mul => (Sexp::app("*", vec![a, b]), num),
                    BinOp::Div | BinOp::Mod => {
                        if real && *op == BinOp::Mod {
                            return Err(VcError::UnsupportedExpression("`%` on reals".into()));
                        }
                        self.safe(reach, Sexp::not(Sexp::eq(b.clone(), zero)));
                        let f = match (op, real) {
                            (BinOp::Mod, _) => "tmod",
                            (_, true) => "rdiv",
                            _ => "tdiv",
                        };
                        (Sexp::app(f, vec![a, b]), num)
                    }
                    BinOp::Lt => (Sexp::app("<", vec![a, b]), ExprType::Bool),
                    BinOp::Le => (Sexp::app("<=", vec![a, b]), ExprType::Bool),
                    BinOp::Gt => (Sexp::app(">", vec![a, b]), ExprType::Bool),
                    BinOp::Ge => (Sexp::app(">=", vec![a, b]), ExprType::Bool),
                    BinOp::Eq => (Sexp::eq(a, b), ExprType::Bool),
                    BinOp::Ne => (Sexp::not(Sexp::eq(a, b)), ExprType::Bool),
                    BinOp::And | BinOp::Or => unreachable!(),
                }
            }
            Expr::Call(name, args) => {
                let idx = *self
                    .info
                    .index
                    .get(name)
                    .ok_or_else(|| VcError::UnsupportedExpression(format!("unknown function `{name}`")))?;
                let (params, ret) = self.info.funcs[idx].clone();
                if params.len() != args.len() {
                    return Err(VcError::UnsupportedExpression(format!("arity of `{name}`")));
                }
                let mut targs = Vec::new();
                for (a, p) in args.iter().zip(&params) {
                    let (t, ty) = self.expr(a, reach)?;
                    targs.push(match p {
                        VarType::Float => to_real(t, ty),
                        _ => to_int(t, ty),
                    });
                }
                let f = self.uf(
                    &format!("call__{idx}"),
                    params.iter().map(|p| var_sort(*p)).collect(),
                    ret_sort(ret),
                );
                let ty = if ret == Type::Float { ExprType::Real } else { ExprType::Int };
                let app = if targs.is_empty() { Sexp::atom(f) } else { Sexp::app(&f, targs) };
                (app, ty)
            }
        })
    }

    fn bool_expr(&mut self, e: &Expr, reach: &Sexp) -> Result<Sexp, VcError> {
        let (t, ty) = self.expr(e, reach)?;
        Ok(to_bool(t, ty))
    }

    fn int_expr(&mut self, e: &Expr, reach: &Sexp) -> Result<Sexp, VcError> {
        let (t, ty) = self.expr(e, reach)?;
        Ok(to_int(t, ty))
    }

    /// Value of `e` stored into a location of the given sort.
    fn coerced(&mut self, e: &Expr, sort: &str, reach: &Sexp) -> Result<Sexp, VcError> {
        let (t, ty) = self.expr(e, reach)?;
        Ok(if sort == "Real" { to_real(t, ty) } else { to_int(t, ty) })
    }

    fn read(&mut self, sort: &str) -> Result<Sexp, VcError> {
        let cur = self.current(CUR)?;
        let f = if sort == "Real" { self.uf("in_real", vec!["Int"], "Real") } else { self.uf("in_int", vec!["Int"], "Int") };
        Ok(Sexp::app(&f, vec![cur]))
    }

    /// `(g => x' = v) /\ (not g => x' = x)`
    fn assign(&mut self, var: &str, g: &Sexp, value: Sexp) -> Result<(), VcError> {
        let old = self.current(var)?;
        let new = self.bump(var)?;
        self.out.clauses.push(Sexp::implies(g.clone(), Sexp::eq(new.clone(), value)));
        let frame = Sexp::implies(Sexp::not(g.clone()), Sexp::eq(new, old));
        if !frame.is_true() {
            self.out.clauses.push(frame);
        }
        Ok(())
    }

    fn update(&mut self, u: &SketchUpdate, g: &Sexp, reach: &Sexp) -> Result<(), VcError> {
        if let Choice::Hole { id, options } = &u.rhs {
            self.holes.insert(*id, options.len());
        }
        let options = u.rhs.options();
        if options.iter().all(|(_, r)| **r == UpdateRhs::Keep) {
            return Ok(());
        }
        let var = match &u.lhs {
            Lhs::Var(x) | Lhs::Elem(x, _) => x.clone(),
            Lhs::Ret => RET.to_string(),
            Lhs::Out => OUT.to_string(),
        };
        let old = self.current(&var)?;
        let sort = self.sort_of(&var)?;
        let index = match &u.lhs {
            Lhs::Elem(a, i) => {
                let n = match self.env.var_type(a) {
                    Some(VarType::IntArray(n)) => n,
                    _ => return Err(VcError::UnsupportedExpression(format!("`{a}` is not an array"))),
                };
                let live = Sexp::or(
                    options.iter().filter(|(_, r)| **r != UpdateRhs::Keep).map(|(c, _)| c.clone()).collect(),
                );
                let r = Sexp::and(vec![reach.clone(), live]);
                let idx = self.int_expr(i, &r)?;
                self.safe(&r, in_bounds(&idx, n));
                Some(idx)
            }
            _ => None,
        };
        let mut values = Vec::new();
        let mut cursors = Vec::new();
        let cur0 = self.current(CUR)?;
        let mut reads = false;
        for (cond, rhs) in &options {
            let r = Sexp::and(vec![reach.clone(), cond.clone()]);
            let elem_sort = if index.is_some() { "Int".to_string() } else { sort.clone() };
            let (v, c) = match (rhs, &u.lhs) {
                (UpdateRhs::Keep, _) => (None, cur0.clone()),
                (UpdateRhs::Expr(e), Lhs::Var(_) | Lhs::Elem(..) | Lhs::Ret) => {
                    (Some(self.coerced(e, &elem_sort, &r)?), cur0.clone())
                }
                (UpdateRhs::Read, Lhs::Var(_) | Lhs::Elem(..)) => {
                    reads = true;
                    (Some(self.read(&elem_sort)?), Sexp::app("+", vec![cur0.clone(), Sexp::int(1)]))
                }
                (UpdateRhs::Emit(e), Lhs::Out) => {
                    let (t, ty) = self.expr(e, &r)?;
                    let item = match ty {
                        ExprType::Real => Sexp::app("RV", vec![t]),
                        _ => Sexp::app("IV", vec![to_int(t, ty)]),
                    };
                    (Some(Sexp::app("seq.++", vec![old.clone(), Sexp::app("seq.unit", vec![item])])), cur0.clone())
                }
                (rhs, lhs) => {
                    return Err(VcError::UnsupportedExpression(format!(
                        "update {} of {}",
                        Update { lhs: lhs.clone(), rhs: (*rhs).clone(), origin: None }.render(),
                        lhs.render()
                    )))
                }
            };
            let v = match (v, &index) {
                (None, _) => old.clone(),
                (Some(v), Some(idx)) => Sexp::app("store", vec![old.clone(), idx.clone(), v]),
                (Some(v), None) => v,
            };
            values.push((cond.clone(), v));
            cursors.push((cond.clone(), c));
        }
        let value = ite_chain(values);
        self.assign(&var, g, value)?;
        if reads {
            let c = ite_chain(cursors);
            self.assign(CUR, g, c)?;
        }
        Ok(())
    }

    fn encode(&mut self, label: &[SketchGa]) -> Result<(), VcError> {
        let mut path = Sexp::bool(true);
        let mut taken = Vec::new();
        for ga in label {
            if let Choice::Hole { id, options } = &ga.guard {
                self.holes.insert(*id, options.len());
            }
            let mut gs = Vec::new();
            for (cond, e) in ga.guard.options() {
                let r = Sexp::and(vec![path.clone(), cond.clone()]);
                gs.push((cond, self.bool_expr(e, &r)?));
            }
            let g = ite_chain(gs);
            let reach = Sexp::and(vec![path.clone(), g.clone()]);
            for u in &ga.updates {
                self.update(u, &g, &reach)?;
            }
            if ga.branch {
                taken.push(g.clone());
                path = reach;
            }
        }
        self.out.taken = Sexp::and(taken);
        Ok(())
    }
}

fn in_bounds(idx: &Sexp, n: usize) -> Sexp {
    Sexp::and(vec![
        Sexp::app("<=", vec![Sexp::int(0), idx.clone()]),
        Sexp::app("<", vec![idx.clone(), Sexp::int(n as i64)]),
    ])
}

/// `ite(c0, v0, ite(c1, v1, ... vn))`; the last condition is implied.
fn ite_chain(mut items: Vec<(Sexp, Sexp)>) -> Sexp {
    let (_, mut acc) = items.pop().expect("at least one option");
    while let Some((c, v)) = items.pop() {
        acc = Sexp::ite(c, v, acc);
    }
    acc
}

fn to_int(t: Sexp, ty: ExprType) -> Sexp {
    match ty {
        ExprType::Int => t,
        ExprType::Real => Sexp::app("ftrunc", vec![t]),
        ExprType::Bool => Sexp::ite(t, Sexp::int(1), Sexp::int(0)),
    }
}

fn to_real(t: Sexp, ty: ExprType) -> Sexp {
    match ty {
        ExprType::Real => t,
        ExprType::Int => Sexp::app("to_real", vec![t]),
        ExprType::Bool => Sexp::ite(t, Sexp::atom("1.0"), Sexp::atom("0.0")),
    }
}

fn to_bool(t: Sexp, ty: ExprType) -> Sexp {
    match ty {
        ExprType::Bool => t,
        ExprType::Int => Sexp::not(Sexp::eq(t, Sexp::int(0))),
        ExprType::Real => Sexp::not(Sexp::eq(t, Sexp::atom("0.0"))),
    }
}

/// Everything needed to encode edges of one function pair.
#[derive(Clone, Debug)]
pub struct VcContext {
    pub func: usize,
    /// Student environment including variables minted by the alignment.
    pub env_s: TypeEnv,
    pub env_r: TypeEnv,
    pub ret_s: Type,
    pub ret_r: Type,
    pub info_s: ProgramInfo,
    pub info_r: ProgramInfo,
    pub pred: Pred,
}

impl VcContext {
    pub fn new(cfa_s: &Cfa, cfa_r: &Cfa, func: usize, pred: &Pred) -> VcContext {
        let mut env_s = cfa_s.functions[func].env.clone();
        let next = env_s.vars.len();
        for (i, (name, ty)) in pred.fresh().enumerate() {
            env_s.vars.insert(name.to_string(), VarInfo { ty, is_param: false, order: next + i });
        }
        VcContext {
            func,
            env_s,
            env_r: cfa_r.functions[func].env.clone(),
            ret_s: cfa_s.functions[func].ret_ty,
            ret_r: cfa_r.functions[func].ret_ty,
            info_s: ProgramInfo::of(cfa_s),
            info_r: ProgramInfo::of(cfa_r),
            pred: pred.clone(),
        }
    }
}

/// Shape of the aligned edge being encoded.
#[derive(Clone, Debug)]
pub struct EdgeSpec<'a> {
    /// `None` for an inserted student edge, which is never taken.
    pub student: Option<&'a [SketchGa]>,
    /// `None` for an empty reference slot.
    pub reference: Option<&'a [SketchGa]>,
    /// Source is a function entry: locals start at zero.
    pub from_entry: bool,
    /// Target is a function exit: only observable state is compared.
    pub to_exit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeVc {
    pub phi_u: Sexp,
    pub psi_s: SsaFormula,
    pub psi_r: SsaFormula,
    pub phi_v: Sexp,
    /// Constant name to sort.
    pub consts: BTreeMap<String, String>,
    /// Function name to (argument sorts, result sort).
    pub ufs: BTreeMap<String, (Vec<String>, String)>,
    /// Hole id to number of options.
    pub holes: BTreeMap<usize, usize>,
}

impl EdgeVc {
    /// Assumptions: alignment at the source, both transitions, reference safety.
    pub fn premise(&self) -> Sexp {
        Sexp::and(vec![self.phi_u.clone(), self.psi_s.formula(), self.psi_r.formula(), self.psi_r.safe()])
    }

    /// Same branching, alignment at the target, student safety.
    pub fn good(&self) -> Sexp {
        let (ts, tr) = (self.psi_s.taken.clone(), self.psi_r.taken.clone());
        let same = if ts == tr { Sexp::bool(true) } else { Sexp::eq(ts, tr.clone()) };
        Sexp::and(vec![same, Sexp::implies(tr, self.phi_v.clone()), self.psi_s.safe()])
    }

    /// The formula whose unsatisfiability verifies the edge.
    pub fn formula(&self) -> Sexp {
        Sexp::and(vec![self.premise(), Sexp::not(self.good())])
    }

    pub fn theories(&self) -> BTreeSet<Theory> {
        self.psi_s.theories.union(&self.psi_r.theories).copied().collect()
    }

    /// Declarations of constants and of functions not in `defined`.
    pub fn declarations(&self, defined: &BTreeSet<String>) -> Vec<Sexp> {
        let mut out = Vec::new();
        for (name, (args, ret)) in &self.ufs {
            if defined.contains(name) {
                continue;
            }
            out.push(decl_fun(name, args, ret));
        }
        for (name, sort) in &self.consts {
            out.push(decl_fun(name, &[], sort));
        }
        out
    }

    /// Version-0 symbols of both sides.
    pub fn entry_symbols(&self) -> Vec<Sexp> {
        let mut v: Vec<Sexp> = self.psi_s.entry.values().chain(self.psi_r.entry.values()).cloned().collect();
        v.sort();
        v.dedup();
        v
    }

    /// Query for `check_sat`: satisfiable iff the edge fails.
    pub fn query(&self) -> Query {
        Query {
            decls: self.declarations(&BTreeSet::new()),
            hard: vec![self.formula()],
            soft: Vec::new(),
            wanted: self.entry_symbols(),
        }
    }
}

fn decl_fun(name: &str, args: &[String], ret: &str) -> Sexp {
    let args = Sexp::List(args.iter().map(|a| parse_sort(a)).collect());
    Sexp::app("declare-fun", vec![Sexp::atom(name), args, parse_sort(ret)])
}

fn parse_sort(s: &str) -> Sexp {
    crate::solver::sexp::parse(s).expect("sort parses")
}

/// Builds the verification condition of one aligned edge. Symbols are
/// prefixed with `prefix`, which lets several copies share one query.
pub fn edge_vc(ctx: &VcContext, edge: &EdgeSpec<'_>, prefix: &str) -> Result<EdgeVc, VcError> {
    let mut consts = BTreeMap::new();
    let mut ufs = BTreeMap::new();
    let mut holes = BTreeMap::new();
    let empty: Vec<SketchGa> = Vec::new();
    let mut s = Ssa {
        env: &ctx.env_s,
        ret_ty: ctx.ret_s,
        info: &ctx.info_s,
        ns: format!("{prefix}s"),
        uf: prefix.to_string(),
        versions: BTreeMap::new(),
        consts: &mut consts,
        ufs: &mut ufs,
        holes: &mut holes,
        out: SsaFormula::default(),
    };
    s.encode(edge.student.unwrap_or(&empty))?;
    if edge.student.is_none() {
        s.out.taken = Sexp::bool(false);
    }
    let s_versions = s.versions.clone();
    let mut psi_s = s.out;
    let mut r = Ssa {
        env: &ctx.env_r,
        ret_ty: ctx.ret_r,
        info: &ctx.info_r,
        ns: format!("{prefix}r"),
        uf: prefix.to_string(),
        versions: BTreeMap::new(),
        consts: &mut consts,
        ufs: &mut ufs,
        holes: &mut holes,
        out: SsaFormula::default(),
    };
    r.encode(edge.reference.unwrap_or(&empty))?;
    if edge.reference.is_none() {
        r.out.taken = Sexp::bool(false);
    }
    let r_versions = r.versions.clone();
    let mut psi_r = r.out;

    // alignment predicates over entry and exit versions
    let mut ssa_s = Ssa {
        env: &ctx.env_s,
        ret_ty: ctx.ret_s,
        info: &ctx.info_s,
        ns: format!("{prefix}s"),
        uf: prefix.to_string(),
        versions: s_versions,
        consts: &mut consts,
        ufs: &mut ufs,
        holes: &mut holes,
        out: SsaFormula::default(),
    };
    let mut phi_u = Vec::new();
    let mut phi_v = Vec::new();
    let mut pairs_s = Vec::new();
    for p in &ctx.pred.pairs {
        if p.kind == PairKind::Dummy {
            continue;
        }
        let u = ssa_s.sym(&p.student, 0)?;
        let v = ssa_s.current(&p.student)?;
        pairs_s.push((p, u, v));
    }
    let mut zero_s = Vec::new();
    if edge.from_entry {
        for (name, info) in ctx.env_s.vars.iter() {
            if !info.is_param {
                let s = ssa_s.sym(name, 0)?;
                zero_s.push(zero_of(s, info.ty));
            }
        }
    }
    let entry_s = ssa_s.out.entry.clone();
    let mut ssa_r = Ssa {
        env: &ctx.env_r,
        ret_ty: ctx.ret_r,
        info: &ctx.info_r,
        ns: format!("{prefix}r"),
        uf: prefix.to_string(),
        versions: r_versions,
        consts: &mut consts,
        ufs: &mut ufs,
        holes: &mut holes,
        out: SsaFormula::default(),
    };
    for (p, su, sv) in pairs_s {
        let ru = ssa_r.sym(&p.reference, 0)?;
        let rv = ssa_r.current(&p.reference)?;
        phi_u.push(Sexp::eq(su, ru));
        let observable = matches!(p.kind, PairKind::Ret | PairKind::Cursor | PairKind::Output);
        if !edge.to_exit || observable {
            phi_v.push(Sexp::eq(sv, rv));
        }
    }
    if edge.from_entry {
        for (name, info) in ctx.env_r.vars.iter() {
            if !info.is_param {
                let s = ssa_r.sym(name, 0)?;
                phi_u.push(zero_of(s, info.ty));
            }
        }
    }
    let entry_r = ssa_r.out.entry.clone();
    phi_u.extend(zero_s);
    psi_s.entry.extend(entry_s);
    psi_r.entry.extend(entry_r);
    psi_s.exit = exit_map(prefix, "s", &consts);
    psi_r.exit = exit_map(prefix, "r", &consts);
    Ok(EdgeVc { phi_u: Sexp::and(phi_u), psi_s, psi_r, phi_v: Sexp::and(phi_v), consts, ufs, holes })
}

/// Highest version of every variable in namespace `prefix + ns`.
fn exit_map(prefix: &str, ns: &str, consts: &BTreeMap<String, String>) -> BTreeMap<String, Sexp> {
    let head = format!("{prefix}{ns}__");
    let mut best: BTreeMap<String, u32> = BTreeMap::new();
    for name in consts.keys() {
        if let Some(rest) = name.strip_prefix(&head) {
            if let Some((var, k)) = rest.rsplit_once("__") {
                if let Ok(k) = k.parse::<u32>() {
                    let e = best.entry(var.to_string()).or_insert(k);
                    *e = (*e).max(k);
                }
            }
        }
    }
    best.into_iter().map(|(v, k)| (v.clone(), Sexp::atom(format!("{head}{v}__{k}")))).collect()
}

fn zero_of(s: Sexp, ty: VarType) -> Sexp {
    match ty {
        VarType::Int => Sexp::eq(s, Sexp::int(0)),
        VarType::Float => Sexp::eq(s, Sexp::atom("0.0")),
        VarType::IntArray(_) => Sexp::eq(
            s,
            Sexp::List(vec![
                Sexp::List(vec![Sexp::atom("as"), Sexp::atom("const"), parse_sort("(Array Int Int)")]),
                Sexp::int(0),
            ]),
        ),
    }
}

/// Stand-alone SSA of one label over namespace `ns`, for inspection and tests.
pub fn to_ssa(
    env: &TypeEnv,
    ret_ty: Type,
    info: &ProgramInfo,
    label: &[GuardedAction],
    ns: &str,
) -> Result<SsaFormula, VcError> {
    let mut consts = BTreeMap::new();
    let mut ufs = BTreeMap::new();
    let mut holes = BTreeMap::new();
    let mut ssa = Ssa {
        env,
        ret_ty,
        info,
        ns: ns.to_string(),
        uf: String::new(),
        versions: BTreeMap::new(),
        consts: &mut consts,
        ufs: &mut ufs,
        holes: &mut holes,
        out: SsaFormula::default(),
    };
    ssa.encode(&fixed_sketch(label))?;
    let mut out = ssa.out;
    out.exit = exit_map("", ns, &consts);
    Ok(out)
}

/// A model of a failing edge, kept so it can be replayed against candidates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterExample {
    /// Entry symbol (without prefix) to value.
    pub values: Vec<(String, String)>,
    /// `define-fun` commands for the input and call functions.
    #[serde(skip)]
    pub defs: Vec<Sexp>,
}

impl CounterExample {
    pub fn from_model(vc: &EdgeVc, model: &Model) -> CounterExample {
        let values: Vec<(String, String)> = vc
            .entry_symbols()
            .into_iter()
            .filter_map(|s| model.value(&s).map(|v| (s.to_string(), v.to_string())))
            .collect();
        let mut all: BTreeMap<String, Sexp> = BTreeMap::new();
        for d in model.definitions.as_list().unwrap_or(&[]) {
            if let (Some("define-fun"), Some(items)) = (d.head(), d.as_list()) {
                if let Some(name) = items.get(1).and_then(Sexp::as_atom) {
                    all.insert(name.to_string(), d.clone());
                }
            }
        }
        // the functions used by the edge, plus whatever their bodies mention
        let mut wanted: Vec<String> = vc.ufs.keys().cloned().collect();
        for (_, v) in &values {
            if let Ok(s) = crate::solver::sexp::parse(v) {
                s.visit_atoms(&mut |a| wanted.push(a.to_string()));
            }
        }
        // post-order, so every definition follows the ones it uses
        fn visit(n: &str, all: &BTreeMap<String, Sexp>, seen: &mut BTreeSet<String>, out: &mut Vec<Sexp>) {
            let Some(d) = all.get(n) else { return };
            if !seen.insert(n.to_string()) {
                return;
            }
            let mut deps = Vec::new();
            if let Some(body) = d.as_list().and_then(|l| l.get(4)) {
                body.visit_atoms(&mut |a| deps.push(a.to_string()));
            }
            for m in deps {
                visit(&m, all, seen, out);
            }
            out.push(d.clone());
        }
        wanted.sort();
        wanted.dedup();
        let mut seen = BTreeSet::new();
        let mut defs = Vec::new();
        for n in &wanted {
            visit(n, &all, &mut seen, &mut defs);
        }
        CounterExample { values, defs }
    }

    pub fn value(&self, symbol: &str) -> Option<Sexp> {
        self.values.iter().find(|(s, _)| s == symbol).and_then(|(_, v)| crate::solver::sexp::parse(v).ok())
    }

    /// Definitions and pins for a copy of the edge whose symbols carry `prefix`.
    pub fn instantiate(&self, prefix: &str) -> (Vec<Sexp>, Vec<Sexp>, BTreeSet<String>) {
        let names: BTreeSet<String> =
            self.defs.iter().filter_map(|d| d.as_list()?.get(1)?.as_atom().map(String::from)).collect();
        let rename = |s: &Sexp| s.map_atoms(&|a| names.contains(a).then(|| Sexp::atom(format!("{prefix}{a}"))));
        let defs: Vec<Sexp> = self.defs.iter().map(rename).collect();
        let pins = self
            .values
            .iter()
            .filter_map(|(s, v)| {
                let v = crate::solver::sexp::parse(v).ok()?;
                Some(Sexp::eq(Sexp::atom(format!("{prefix}{s}")), rename(&v)))
            })
            .collect();
        let defined = names.into_iter().map(|n| format!("{prefix}{n}")).collect();
        (defs, pins, defined)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn env(vars: &[(&str, VarType)]) -> TypeEnv {
        let mut e = TypeEnv::default();
        for (i, (n, t)) in vars.iter().enumerate() {
            e.vars.insert(n.to_string(), VarInfo { ty: *t, is_param: false, order: i });
        }
        e
    }

    #[test]
    fn guarded_increment() {
        let e = env(&[("x", VarType::Int)]);
        let ga = GuardedAction {
            guard: parse_expr("x > 1").unwrap(),
            branch: false,
            guard_origin: None,
            updates: vec![Update {
                lhs: Lhs::Var("x".into()),
                rhs: UpdateRhs::Expr(parse_expr("x + 1").unwrap()),
                origin: None,
            }],
        };
        let f = to_ssa(&e, Type::Int, &ProgramInfo::default(), &[ga], "s").unwrap();
        assert_eq!(
            f.formula().to_string(),
            "(and (=> (> s__x__0 1) (= s__x__1 (+ s__x__0 1))) (=> (not (> s__x__0 1)) (= s__x__1 s__x__0)))"
        );
        assert_eq!(f.exit["x"].to_string(), "s__x__1");
    }

    #[test]
    fn empty_label_is_true() {
        let f = to_ssa(&TypeEnv::default(), Type::Int, &ProgramInfo::default(), &[], "s").unwrap();
        assert!(f.formula().is_true());
        assert!(f.taken.is_true());
    }

    #[test]
    fn division_records_side_condition() {
        let e = env(&[("x", VarType::Int), ("y", VarType::Int)]);
        let ga = GuardedAction {
            guard: Expr::Bool(true),
            branch: false,
            guard_origin: None,
            updates: vec![Update {
                lhs: Lhs::Var("x".into()),
                rhs: UpdateRhs::Expr(parse_expr("x / y").unwrap()),
                origin: None,
            }],
        };
        let f = to_ssa(&e, Type::Int, &ProgramInfo::default(), &[ga], "r").unwrap();
        assert_eq!(f.safe().to_string(), "(not (= r__y__0 0))");
    }
}
