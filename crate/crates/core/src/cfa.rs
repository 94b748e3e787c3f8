// SPDX-License-Identifier: Apache-2.0

//! Control-flow automata.
//!
//! States are the entries and exits of functions and loops. Every loop-free
//! path between two consecutive states becomes one edge, labelled with the
//! guarded actions executed along it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::lang::ast::*;
use crate::lang::interp::{coerce_ret, default_ret, Frame, Machine, RuntimeError};
use crate::lang::pretty::{render_expr, render_lvalue};
use crate::lang::types::{TypeEnv, VarType};
use crate::lang::{Literal, Outcome, Status, Value};
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    FuncEntry,
    FuncExit,
    LoopEntry,
    LoopExit,
}

impl NodeKind {
    pub fn name(self) -> &'static str {
        match self {
            NodeKind::FuncEntry => "func-entry",
            NodeKind::FuncExit => "func-exit",
            NodeKind::LoopEntry => "loop-entry",
            NodeKind::LoopExit => "loop-exit",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfaNode {
    pub id: NodeId,
    pub kind: NodeKind,
    /// Index of the owning function.
    pub func: usize,
    /// The loop statement for loop nodes.
    pub loop_stmt: Option<StmtId>,
    /// Enclosing entry node in the skeleton tree; `None` for function entries.
    pub parent: Option<NodeId>,
}

impl CfaNode {
    pub fn name(&self) -> String {
        format!("q{}", self.id.0 + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Normal,
    Break,
    Return,
}

impl EdgeKind {
    pub fn name(self) -> &'static str {
        match self {
            EdgeKind::Normal => "normal",
            EdgeKind::Break => "break",
            EdgeKind::Return => "return",
        }
    }
}

/// Assigned location of an update.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Lhs {
    Var(String),
    Elem(String, Expr),
    /// The return value of the function.
    Ret,
    /// The output sequence.
    Out,
}

impl Lhs {
    pub fn render(&self) -> String {
        match self {
            Lhs::Var(v) => v.clone(),
            Lhs::Elem(a, i) => render_lvalue(&LValue::Index(a.clone(), i.clone())),
            Lhs::Ret => "ret".into(),
            Lhs::Out => "out".into(),
        }
    }

    /// Same assigned location up to the index expression.
    pub fn same_slot(&self, other: &Lhs) -> bool {
        match (self, other) {
            (Lhs::Elem(a, _), Lhs::Elem(b, _)) => a == b,
            _ => self == other,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateRhs {
    Expr(Expr),
    /// Next input value; also advances the cursor.
    Read,
    /// Appends a value to the output; only with `Lhs::Out`.
    Emit(Expr),
    /// Leaves the location unchanged.
    Keep,
}

impl UpdateRhs {
    pub fn expr(&self) -> Option<&Expr> {
        match self {
            UpdateRhs::Expr(e) | UpdateRhs::Emit(e) => Some(e),
            UpdateRhs::Read | UpdateRhs::Keep => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Update {
    pub lhs: Lhs,
    pub rhs: UpdateRhs,
    /// Statement this update was lowered from; `None` for synthesized updates.
    pub origin: Option<StmtId>,
}

impl Update {
    pub fn render(&self) -> String {
        match (&self.lhs, &self.rhs) {
            (_, UpdateRhs::Emit(e)) => format!("print({})", render_expr(e)),
            (l, UpdateRhs::Read) => format!("{} = read()", l.render()),
            (l, UpdateRhs::Keep) => format!("skip {}", l.render()),
            (l, UpdateRhs::Expr(e)) => format!("{} = {}", l.render(), render_expr(e)),
        }
    }

    /// `x = x`, a no-op frame update.
    pub fn is_frame(&self) -> bool {
        match (&self.lhs, &self.rhs) {
            (Lhs::Var(v), UpdateRhs::Expr(Expr::Var(w))) => v == w,
            (Lhs::Ret, UpdateRhs::Expr(Expr::Var(w))) => w == "ret",
            (_, UpdateRhs::Keep) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuardRole {
    If,
    Loop,
}

/// Where a guard came from: a branch condition, taken with the given polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GuardOrigin {
    pub stmt: StmtId,
    pub role: GuardRole,
    pub positive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuardedAction {
    pub guard: Expr,
    /// Branch guards decide whether the edge is taken; others only guard their updates.
    pub branch: bool,
    pub guard_origin: Option<GuardOrigin>,
    pub updates: Vec<Update>,
}

impl GuardedAction {
    pub fn unconditional() -> Self {
        GuardedAction { guard: Expr::Bool(true), branch: true, guard_origin: None, updates: Vec::new() }
    }

    pub fn render(&self) -> String {
        let mut s = format!("[{}]", render_expr(&self.guard));
        for u in &self.updates {
            let _ = write!(s, " {};", u.render());
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfaEdge {
    pub id: EdgeId,
    pub source: NodeId,
    pub target: NodeId,
    pub kind: EdgeKind,
    pub label: Vec<GuardedAction>,
}

impl CfaEdge {
    pub fn name(&self) -> String {
        edge_name(self.id.0)
    }

    pub fn render_label(&self) -> String {
        self.label.iter().map(GuardedAction::render).collect::<Vec<_>>().join(" ")
    }
}

/// `a`, `b`, ..., `z`, `a1`, `b1`, ...
pub fn edge_name(i: usize) -> String {
    let letter = (b'a' + (i % 26) as u8) as char;
    if i < 26 {
        letter.to_string()
    } else {
        format!("{letter}{}", i / 26)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CfaFunction {
    pub name: String,
    pub ret_ty: Type,
    pub params: Vec<String>,
    pub entry: NodeId,
    pub exit: NodeId,
    pub env: TypeEnv,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cfa {
    pub nodes: Vec<CfaNode>,
    pub edges: Vec<CfaEdge>,
    pub functions: Vec<CfaFunction>,
    /// Entry node to exit node, for functions and loops.
    pub omega: BTreeMap<NodeId, NodeId>,
    pub init: NodeId,
    pub terminal: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CfaError {
    #[error("{line}:{col}: unsupported feature: {feature}")]
    Unsupported { line: u32, col: u32, feature: String },
}

impl Cfa {
    pub fn node(&self, id: NodeId) -> &CfaNode {
        &self.nodes[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &CfaEdge {
        &self.edges[id.0]
    }

    pub fn outgoing(&self, n: NodeId) -> impl Iterator<Item = &CfaEdge> {
        self.edges.iter().filter(move |e| e.source == n)
    }

    pub fn function_nodes(&self, func: usize) -> impl Iterator<Item = &CfaNode> {
        self.nodes.iter().filter(move |n| n.func == func)
    }

    pub fn function_edges(&self, func: usize) -> impl Iterator<Item = &CfaEdge> {
        self.edges.iter().filter(move |e| self.nodes[e.source.0].func == func)
    }

    /// Labels of every edge from `from` to `to`.
    pub fn guarded_actions_of_path(&self, from: NodeId, to: NodeId) -> Vec<Vec<GuardedAction>> {
        self.edges.iter().filter(|e| e.source == from && e.target == to).map(|e| e.label.clone()).collect()
    }

    /// Textual listing of nodes and edges, stable across runs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (fi, f) in self.functions.iter().enumerate() {
            let _ = writeln!(out, "function {}", f.name);
            for n in self.function_nodes(fi) {
                let _ = write!(out, "  {} {}", n.name(), n.kind.name());
                if let Some(x) = self.omega.get(&n.id) {
                    let _ = write!(out, " (exit {})", self.node(*x).name());
                }
                out.push('\n');
            }
            for e in self.function_edges(fi) {
                let _ = writeln!(
                    out,
                    "  {}: {} -> {} {} {}",
                    e.name(),
                    self.node(e.source).name(),
                    self.node(e.target).name(),
                    e.kind.name(),
                    e.render_label()
                );
            }
        }
        out
    }

    /// Graphviz rendering.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cfa {\n  node [shape=circle];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  {} [label=\"{}\\n{}\"];", n.name(), n.name(), n.kind.name());
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeKind::Normal => "solid",
                EdgeKind::Break => "dashed",
                EdgeKind::Return => "dotted",
            };
            let label = format!("{}: {}", e.name(), e.render_label()).replace('\\', "\\\\").replace('"', "\\\"");
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{}\", style={}];",
                self.node(e.source).name(),
                self.node(e.target).name(),
                label,
                style
            );
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Clone, Copy)]
enum Cont<'a> {
    Stmts(&'a [Stmt]),
    LoopBack(&'a Stmt),
    FuncEnd,
}

struct Builder<'a> {
    nodes: Vec<CfaNode>,
    edges: Vec<CfaEdge>,
    /// loop statement -> (entry, exit)
    loops: HashMap<StmtId, (NodeId, NodeId)>,
    /// Continuation after each loop, for exploring from its exit.
    after_loop: HashMap<StmtId, Vec<Cont<'a>>>,
    func_exit: NodeId,
}

pub fn build_cfa(ast: &Ast) -> Result<Cfa, CfaError> {
    check_pure_callees(ast)?;
    let mut b = Builder {
        nodes: Vec::new(),
        edges: Vec::new(),
        loops: HashMap::new(),
        after_loop: HashMap::new(),
        func_exit: NodeId(0),
    };
    let mut functions = Vec::new();
    let mut omega = BTreeMap::new();
    for (fi, f) in ast.functions.iter().enumerate() {
        let entry = b.add_node(NodeKind::FuncEntry, fi, None, None);
        let mut loop_stmts = Vec::new();
        collect_loops(&f.body, entry, &mut Vec::new(), &mut loop_stmts);
        let mut loop_nodes = Vec::new();
        for (s, parent) in &loop_stmts {
            let parent = parent.map(|p: StmtId| b.loops[&p].0).unwrap_or(entry);
            let le = b.add_node(NodeKind::LoopEntry, fi, Some(s.id), Some(parent));
            let lx = b.add_node(NodeKind::LoopExit, fi, Some(s.id), Some(parent));
            b.loops.insert(s.id, (le, lx));
            omega.insert(le, lx);
            loop_nodes.push(*s);
        }
        let exit = b.add_node(NodeKind::FuncExit, fi, None, None);
        omega.insert(entry, exit);
        b.func_exit = exit;
        record_continuations(&f.body, &[Cont::FuncEnd], &mut b.after_loop);

        b.explore(entry, vec![Cont::FuncEnd, Cont::Stmts(&f.body)], Vec::new());
        for s in loop_nodes {
            let (le, lx) = b.loops[&s.id];
            let (cond, body) = loop_parts(s);
            let pos_guard = cond.cloned().unwrap_or(Expr::Bool(true));
            let ga = GuardedAction {
                guard: pos_guard.clone(),
                branch: true,
                guard_origin: Some(GuardOrigin { stmt: s.id, role: GuardRole::Loop, positive: true }),
                updates: Vec::new(),
            };
            b.explore(le, vec![Cont::LoopBack(s), Cont::Stmts(std::slice::from_ref(body))], vec![ga]);
            if cond.is_some() {
                let ga = GuardedAction {
                    guard: pos_guard.negate(),
                    branch: true,
                    guard_origin: Some(GuardOrigin { stmt: s.id, role: GuardRole::Loop, positive: false }),
                    updates: Vec::new(),
                };
                b.finish(le, lx, EdgeKind::Normal, vec![ga]);
            }
            let after = b.after_loop[&s.id].clone();
            b.explore(lx, after, Vec::new());
        }
        functions.push(CfaFunction {
            name: f.name.clone(),
            ret_ty: f.ret_ty,
            params: f.params.iter().map(|p| p.name.clone()).collect(),
            entry,
            exit,
            env: TypeEnv::of_function(ast, f),
        });
    }
    let main = ast.functions.iter().position(|f| f.name == ast.entry_function().name).unwrap_or(0);
    let init = functions[main].entry;
    let terminal = functions[main].exit;
    Ok(Cfa { nodes: b.nodes, edges: b.edges, functions, omega, init, terminal })
}

fn loop_parts(s: &Stmt) -> (Option<&Expr>, &Stmt) {
    match &s.kind {
        StmtKind::While { cond, body } => (Some(cond), body),
        StmtKind::For { cond, body, .. } => (cond.as_ref(), body),
        _ => unreachable!("not a loop"),
    }
}

/// Loops in preorder with their innermost enclosing loop.
fn collect_loops<'a>(
    stmts: &'a [Stmt],
    entry: NodeId,
    enclosing: &mut Vec<StmtId>,
    out: &mut Vec<(&'a Stmt, Option<StmtId>)>,
) {
    for s in stmts {
        collect_loops_stmt(s, entry, enclosing, out);
    }
}

fn collect_loops_stmt<'a>(
    s: &'a Stmt,
    entry: NodeId,
    enclosing: &mut Vec<StmtId>,
    out: &mut Vec<(&'a Stmt, Option<StmtId>)>,
) {
    match &s.kind {
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => {
            out.push((s, enclosing.last().copied()));
            enclosing.push(s.id);
            collect_loops_stmt(body, entry, enclosing, out);
            enclosing.pop();
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            collect_loops_stmt(then_branch, entry, enclosing, out);
            if let Some(e) = else_branch {
                collect_loops_stmt(e, entry, enclosing, out);
            }
        }
        StmtKind::Block(stmts) => collect_loops(stmts, entry, enclosing, out),
        _ => {}
    }
}

fn record_continuations<'a>(stmts: &'a [Stmt], stack: &[Cont<'a>], out: &mut HashMap<StmtId, Vec<Cont<'a>>>) {
    for (i, s) in stmts.iter().enumerate() {
        let mut here = stack.to_vec();
        here.push(Cont::Stmts(&stmts[i + 1..]));
        record_stmt(s, &here, out);
    }
}

fn record_stmt<'a>(s: &'a Stmt, stack: &[Cont<'a>], out: &mut HashMap<StmtId, Vec<Cont<'a>>>) {
    match &s.kind {
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => {
            out.insert(s.id, stack.to_vec());
            record_stmt(body, &[Cont::LoopBack(s)], out);
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            record_stmt(then_branch, stack, out);
            if let Some(e) = else_branch {
                record_stmt(e, stack, out);
            }
        }
        StmtKind::Block(stmts) => record_continuations(stmts, stack, out),
        _ => {}
    }
}

/// Lowers an assignment-like statement to an update.
pub fn lower_assign(target: &LValue, op: AssignOp, value: Option<&Rhs>, origin: StmtId) -> Update {
    let lhs = match target {
        LValue::Var(v) => Lhs::Var(v.clone()),
        LValue::Index(a, i) => Lhs::Elem(a.clone(), i.clone()),
    };
    let rhs = match (op.binop(), value) {
        (None, Some(Rhs::Read)) => UpdateRhs::Read,
        (None, Some(Rhs::Expr(e))) => UpdateRhs::Expr(e.clone()),
        (Some(bop), Some(Rhs::Expr(e))) => UpdateRhs::Expr(Expr::bin(bop, target.as_expr(), e.clone())),
        (Some(bop), _) => UpdateRhs::Expr(Expr::bin(bop, target.as_expr(), Expr::Int(1))),
        (None, None) => UpdateRhs::Expr(Expr::Int(0)),
    };
    Update { lhs, rhs, origin: Some(origin) }
}

/// Updates performed by a simple statement; `None` if it is not simple.
fn simple_updates(s: &Stmt) -> Option<Vec<Update>> {
    Some(match &s.kind {
        StmtKind::Decl { name, init: Some(init), .. } => {
            vec![lower_assign(&LValue::Var(name.clone()), AssignOp::Set, Some(init), s.id)]
        }
        StmtKind::Decl { .. } | StmtKind::Empty | StmtKind::Expr(_) => Vec::new(),
        StmtKind::Assign { target, op, value } => vec![lower_assign(target, *op, value.as_ref(), s.id)],
        StmtKind::Print(e) => vec![Update { lhs: Lhs::Out, rhs: UpdateRhs::Emit(e.clone()), origin: Some(s.id) }],
        _ => return None,
    })
}

impl<'a> Builder<'a> {
    fn add_node(&mut self, kind: NodeKind, func: usize, loop_stmt: Option<StmtId>, parent: Option<NodeId>) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(CfaNode { id, kind, func, loop_stmt, parent });
        id
    }

    fn push_updates(gas: &mut Vec<GuardedAction>, ups: Vec<Update>) {
        if ups.is_empty() {
            return;
        }
        if gas.is_empty() {
            gas.push(GuardedAction::unconditional());
        }
        gas.last_mut().unwrap().updates.extend(ups);
    }

    fn finish(&mut self, source: NodeId, target: NodeId, kind: EdgeKind, mut gas: Vec<GuardedAction>) {
        if gas.is_empty() {
            gas.push(GuardedAction::unconditional());
        }
        let id = EdgeId(self.edges.len());
        self.edges.push(CfaEdge { id, source, target, kind, label: gas });
    }

    fn innermost_loop(stack: &[Cont<'a>]) -> Option<&'a Stmt> {
        stack.iter().rev().find_map(|c| match c {
            Cont::LoopBack(s) => Some(*s),
            _ => None,
        })
    }

    /// Depth-first enumeration of paths from `source`, then-branches first.
    fn explore(&mut self, source: NodeId, mut stack: Vec<Cont<'a>>, mut gas: Vec<GuardedAction>) {
        loop {
            let Some(top) = stack.pop() else {
                unreachable!("continuation stack always ends in a terminator");
            };
            match top {
                Cont::FuncEnd => {
                    self.finish(source, self.func_exit, EdgeKind::Normal, gas);
                    return;
                }
                Cont::LoopBack(l) => {
                    if let StmtKind::For { step: Some(step), .. } = &l.kind {
                        Self::push_updates(&mut gas, simple_updates(step).unwrap_or_default());
                    }
                    let entry = self.loops[&l.id].0;
                    self.finish(source, entry, EdgeKind::Normal, gas);
                    return;
                }
                Cont::Stmts([]) => continue,
                Cont::Stmts([s, rest @ ..]) => {
                    stack.push(Cont::Stmts(rest));
                    if let Some(ups) = simple_updates(s) {
                        Self::push_updates(&mut gas, ups);
                        continue;
                    }
                    match &s.kind {
                        StmtKind::Block(inner) => stack.push(Cont::Stmts(inner)),
                        StmtKind::If { cond, then_branch, else_branch } => {
                            // the leading unconditional action is dropped when empty
                            if gas.len() == 1 && gas[0].guard_origin.is_none() && gas[0].updates.is_empty() {
                                gas.clear();
                            }
                            let mut then_gas = gas.clone();
                            then_gas.push(GuardedAction {
                                guard: cond.clone(),
                                branch: true,
                                guard_origin: Some(GuardOrigin { stmt: s.id, role: GuardRole::If, positive: true }),
                                updates: Vec::new(),
                            });
                            let mut then_stack = stack.clone();
                            then_stack.push(Cont::Stmts(std::slice::from_ref(then_branch)));
                            self.explore(source, then_stack, then_gas);

                            gas.push(GuardedAction {
                                guard: cond.negate(),
                                branch: true,
                                guard_origin: Some(GuardOrigin { stmt: s.id, role: GuardRole::If, positive: false }),
                                updates: Vec::new(),
                            });
                            if let Some(e) = else_branch {
                                stack.push(Cont::Stmts(std::slice::from_ref(e)));
                            }
                        }
                        StmtKind::While { .. } | StmtKind::For { .. } => {
                            if let StmtKind::For { init: Some(init), .. } = &s.kind {
                                Self::push_updates(&mut gas, simple_updates(init).unwrap_or_default());
                            }
                            let entry = self.loops[&s.id].0;
                            self.finish(source, entry, EdgeKind::Normal, gas);
                            return;
                        }
                        StmtKind::Break => {
                            let l = Self::innermost_loop(&stack).expect("break outside loop rejected by parser");
                            let exit = self.loops[&l.id].1;
                            self.finish(source, exit, EdgeKind::Break, gas);
                            return;
                        }
                        StmtKind::Return(e) => {
                            if let Some(e) = e {
                                Self::push_updates(
                                    &mut gas,
                                    vec![Update { lhs: Lhs::Ret, rhs: UpdateRhs::Expr(e.clone()), origin: Some(s.id) }],
                                );
                            }
                            self.finish(source, self.func_exit, EdgeKind::Return, gas);
                            return;
                        }
                        _ => unreachable!("simple statements handled above"),
                    }
                }
            }
        }
    }
}

/// Functions that are called must not read or print: calls are modelled as pure.
fn check_pure_callees(ast: &Ast) -> Result<(), CfaError> {
    let mut does_io: BTreeSet<&str> = BTreeSet::new();
    let mut calls: BTreeMap<&str, BTreeSet<String>> = BTreeMap::new();
    for f in &ast.functions {
        let mut io = false;
        let mut called = BTreeSet::new();
        let mut note = |e: &Expr| collect_calls(e, &mut called);
        f.walk(&mut |s| match &s.kind {
            StmtKind::Print(e) => {
                io = true;
                note(e);
            }
            StmtKind::Decl { init: Some(Rhs::Read), .. } | StmtKind::Assign { value: Some(Rhs::Read), .. } => io = true,
            StmtKind::Decl { init: Some(Rhs::Expr(e)), .. } | StmtKind::Return(Some(e)) | StmtKind::Expr(e) => note(e),
            StmtKind::Assign { target, value, .. } => {
                if let LValue::Index(_, i) = target {
                    note(i);
                }
                if let Some(Rhs::Expr(e)) = value {
                    note(e);
                }
            }
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => note(cond),
            StmtKind::For { cond: Some(c), .. } => note(c),
            _ => {}
        });
        if io {
            does_io.insert(&f.name);
        }
        calls.insert(&f.name, called);
    }
    // propagate through the (acyclic) call graph
    let mut changed = true;
    while changed {
        changed = false;
        for (f, cs) in &calls {
            if !does_io.contains(f) && cs.iter().any(|c| does_io.contains(c.as_str())) {
                does_io.insert(f);
                changed = true;
            }
        }
    }
    for f in &ast.functions {
        for c in &calls[f.name.as_str()] {
            if does_io.contains(c.as_str()) {
                return Err(CfaError::Unsupported {
                    line: f.span.line,
                    col: f.span.col,
                    feature: format!("call to `{c}`, which performs input/output"),
                });
            }
        }
    }
    Ok(())
}

fn collect_calls(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Call(n, args) => {
            out.insert(n.clone());
            args.iter().for_each(|a| collect_calls(a, out));
        }
        Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) | Expr::Var(_) => {}
        Expr::Index(_, e) | Expr::Unary(_, e) | Expr::Cast(_, e) => collect_calls(e, out),
        Expr::Binary(_, l, r) => {
            collect_calls(l, out);
            collect_calls(r, out);
        }
    }
}

/// Concrete state while walking an automaton.
pub struct CfaState<R> {
    pub frame: Frame<R>,
    pub ret: Value<R>,
}

/// Executes an edge label on a concrete state. Returns whether every branch
/// guard held, i.e. whether execution actually follows this edge; once a
/// branch guard fails the remaining actions are skipped.
pub fn exec_label<R: Real>(
    m: &mut Machine<'_, R>,
    st: &mut CfaState<R>,
    ret_ty: Type,
    label: &[GuardedAction],
) -> Result<bool, RuntimeError> {
    for ga in label {
        let g = m.eval(&st.frame, &ga.guard)?.truthy()?;
        if !g {
            if ga.branch {
                return Ok(false);
            }
            continue;
        }
        for u in &ga.updates {
            exec_update(m, st, ret_ty, u)?;
        }
    }
    Ok(true)
}

pub fn exec_update<R: Real>(
    m: &mut Machine<'_, R>,
    st: &mut CfaState<R>,
    ret_ty: Type,
    u: &Update,
) -> Result<(), RuntimeError> {
    let target_ty = match &u.lhs {
        Lhs::Var(v) => st.frame.env.var_type(v).unwrap_or(VarType::Int),
        Lhs::Ret if ret_ty == Type::Float => VarType::Float,
        _ => VarType::Int,
    };
    let v = match &u.rhs {
        UpdateRhs::Keep => return Ok(()),
        UpdateRhs::Read => m.trace.read(target_ty)?,
        UpdateRhs::Expr(e) | UpdateRhs::Emit(e) => m.eval(&st.frame, e)?,
    };
    match &u.lhs {
        Lhs::Var(x) => st.frame.set(x, v)?,
        Lhs::Elem(a, i) => {
            let idx = m.eval(&st.frame, i)?.as_int()?;
            st.frame.set_elem(a, idx, v.as_int()?)?;
        }
        Lhs::Ret => st.ret = coerce_ret(ret_ty, v)?,
        Lhs::Out => {
            let v = match v {
                Value::Bool(b) => Value::Int(b as i64),
                v => v,
            };
            m.trace.output.push(v);
        }
    }
    Ok(())
}

/// Runs the entry function by walking the automaton instead of the syntax tree.
/// At each state exactly one outgoing edge must be taken.
pub fn run_cfa<R: Real>(ast: &Ast, cfa: &Cfa, input: &[Literal], fuel: u64) -> Outcome<R> {
    let fi = cfa.node(cfa.init).func;
    let f = &cfa.functions[fi];
    let mut m = Machine::<R>::new(ast, input.to_vec(), u64::MAX);
    let mut st = CfaState { frame: Frame::new(f.env.clone()), ret: default_ret(f.ret_ty) };
    let finish = |m: Machine<'_, R>, status: Status, ret: Value<R>| Outcome { status, ret, trace: m.trace };
    for p in &f.params {
        let ty = f.env.var_type(p).unwrap_or(VarType::Int);
        match m.trace.read(ty).and_then(|v| st.frame.set(p, v)) {
            Ok(()) => {}
            Err(e) => return finish(m, Status::RuntimeError(e.message), default_ret(f.ret_ty)),
        }
    }
    let mut node = cfa.init;
    let mut steps = 0u64;
    while node != cfa.terminal {
        if steps >= fuel {
            return finish(m, Status::Nontermination, default_ret(f.ret_ty));
        }
        steps += 1;
        let mut next = None;
        for e in cfa.outgoing(node) {
            let mut trial = CfaState { frame: st.frame.clone(), ret: st.ret.clone() };
            let saved = m.trace.clone();
            match exec_label(&mut m, &mut trial, f.ret_ty, &e.label) {
                Ok(true) => {
                    if next.is_some() {
                        return finish(
                            m,
                            Status::RuntimeError(format!("two edges taken at {}", cfa.node(node).name())),
                            default_ret(f.ret_ty),
                        );
                    }
                    next = Some((e.target, trial, m.trace.clone()));
                }
                Ok(false) => {}
                Err(err) => return finish(m, Status::RuntimeError(err.message), default_ret(f.ret_ty)),
            }
            m.trace = saved;
        }
        match next {
            Some((target, s, trace)) => {
                node = target;
                st = s;
                m.trace = trace;
            }
            None => {
                return finish(
                    m,
                    Status::RuntimeError(format!("no edge taken at {}", cfa.node(node).name())),
                    default_ret(f.ret_ty),
                )
            }
        }
    }
    let ret = st.ret.clone();
    finish(m, Status::Finished, ret)
}
