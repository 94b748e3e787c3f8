// SPDX-License-Identifier: Apache-2.0

//! Writing repaired edge labels back into the student's syntax tree.

use std::collections::{BTreeMap, BTreeSet};

use crate::cfa::{Cfa, EdgeKind, GuardOrigin, GuardRole, GuardedAction, Lhs, NodeId, NodeKind, Update, UpdateRhs};
use crate::lang::ast::{AssignOp, Ast, Expr, LValue, Rhs, Span, Stmt, StmtId, StmtKind, Type};
use crate::lang::types::VarType;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("cannot write the repair back to source: {0}")]
pub struct ConcretizeError(pub String);

/// One repaired edge, in the student's names.
#[derive(Clone, Debug)]
pub struct EdgePatch {
    pub kind: EdgeKind,
    /// Student source node.
    pub source: NodeId,
    /// Student function index.
    pub func: usize,
    /// The edge did not exist in the student program.
    pub inserted: bool,
    /// Extended label before repair.
    pub original: Vec<GuardedAction>,
    pub repaired: Vec<GuardedAction>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Then(StmtId),
    Else(StmtId),
    Body(StmtId),
    Func(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Place {
    After(StmtId),
    Before(StmtId),
    Start(Slot),
    End(Slot),
}

#[derive(Default)]
struct Plan {
    conds: BTreeMap<StmtId, Expr>,
    rhs: BTreeMap<StmtId, UpdateRhs>,
    inserts: Vec<(Place, Vec<Stmt>)>,
}

struct Ids<'a>(&'a mut u32);

impl Ids<'_> {
    fn next(&mut self) -> StmtId {
        let id = StmtId(*self.0);
        *self.0 += 1;
        id
    }

    fn stmt(&mut self, kind: StmtKind) -> Stmt {
        Stmt { id: self.next(), span: Span::default(), kind }
    }
}

/// For-loop headers: init/step statement id to its loop.
fn loop_parts(ast: &Ast) -> BTreeMap<StmtId, (StmtId, bool)> {
    let mut m = BTreeMap::new();
    for f in &ast.functions {
        f.walk(&mut |s| {
            if let StmtKind::For { init, step, .. } = &s.kind {
                if let Some(i) = init {
                    m.insert(i.id, (s.id, true));
                }
                if let Some(st) = step {
                    m.insert(st.id, (s.id, false));
                }
            }
        });
    }
    m
}

fn update_stmt(u: &Update, ids: &mut Ids<'_>) -> Option<Stmt> {
    let target = match &u.lhs {
        Lhs::Var(x) => LValue::Var(x.clone()),
        Lhs::Elem(a, i) => LValue::Index(a.clone(), i.clone()),
        Lhs::Ret => {
            return match &u.rhs {
                UpdateRhs::Expr(e) => Some(ids.stmt(StmtKind::Return(Some(e.clone())))),
                _ => None,
            }
        }
        Lhs::Out => {
            return match &u.rhs {
                UpdateRhs::Emit(e) => Some(ids.stmt(StmtKind::Print(e.clone()))),
                _ => None,
            }
        }
    };
    let value = match &u.rhs {
        UpdateRhs::Expr(e) => Rhs::Expr(e.clone()),
        UpdateRhs::Read => Rhs::Read,
        UpdateRhs::Keep | UpdateRhs::Emit(_) => return None,
    };
    Some(ids.stmt(StmtKind::Assign { target, op: AssignOp::Set, value: Some(value) }))
}

/// Where code at the start of an edge leaving `node` goes.
fn edge_start(cfa: &Cfa, node: NodeId, func: usize) -> Place {
    let n = cfa.node(node);
    match (n.kind, n.loop_stmt) {
        (NodeKind::LoopEntry, Some(l)) => Place::Start(Slot::Body(l)),
        (NodeKind::LoopExit, Some(l)) => Place::After(l),
        _ => Place::Start(Slot::Func(func)),
    }
}

/// Code that runs once a source condition held.
fn guard_anchor(o: GuardOrigin) -> Place {
    match (o.role, o.positive) {
        (GuardRole::If, true) => Place::Start(Slot::Then(o.stmt)),
        (GuardRole::If, false) => Place::Start(Slot::Else(o.stmt)),
        (GuardRole::Loop, true) => Place::Start(Slot::Body(o.stmt)),
        (GuardRole::Loop, false) => Place::After(o.stmt),
    }
}

/// Code that runs right after the statement `o`.
fn update_anchor(o: StmtId, parts: &BTreeMap<StmtId, (StmtId, bool)>, returns: &BTreeSet<StmtId>) -> Place {
    match parts.get(&o) {
        Some((l, true)) => Place::Before(*l),
        Some((l, false)) => Place::End(Slot::Body(*l)),
        // nothing runs after a return
        None if returns.contains(&o) => Place::Before(o),
        None => Place::After(o),
    }
}

/// How much of an inserted label an existing edge already spells out.
struct Prefix {
    anchor: Place,
    /// Actions fully present.
    gas: usize,
    /// The guard of the next action is present too.
    guard: bool,
    /// Updates of the next action present.
    updates: usize,
    ret: Option<Expr>,
    score: usize,
}

fn shared_prefix(target: &[GuardedAction], label: &[GuardedAction], start: Place, parts: &BTreeMap<StmtId, (StmtId, bool)>, returns: &BTreeSet<StmtId>) -> Prefix {
    let mut pre = Prefix { anchor: start, gas: 0, guard: false, updates: 0, ret: None, score: 0 };
    for (t, s) in target.iter().zip(label) {
        if t.guard != s.guard || t.branch != s.branch {
            break;
        }
        match s.guard_origin {
            Some(o) => pre.anchor = guard_anchor(o),
            None if s.guard == Expr::Bool(true) => {}
            None => break,
        }
        pre.guard = true;
        pre.score += 1;
        let su: Vec<&Update> = s.updates.iter().filter(|u| u.rhs != UpdateRhs::Keep).collect();
        for (k, ut) in t.updates.iter().enumerate() {
            let Some(us) = su.get(k) else { return pre };
            let Some(o) = us.origin else { return pre };
            if ut.lhs != us.lhs || ut.rhs != us.rhs {
                return pre;
            }
            pre.anchor = update_anchor(o, parts, returns);
            if let (Lhs::Ret, UpdateRhs::Expr(e)) = (&us.lhs, &us.rhs) {
                pre.ret = Some(e.clone());
            }
            pre.updates = k + 1;
            pre.score += 1;
        }
        if su.len() != t.updates.len() {
            break;
        }
        pre.gas += 1;
        pre.guard = false;
        pre.updates = 0;
    }
    pre
}

/// An edge the student lacks becomes nested conditionals placed after the
/// longest prefix it shares with an existing edge from the same node.
fn plan_inserted(
    p: &EdgePatch,
    cfa: &Cfa,
    parts: &BTreeMap<StmtId, (StmtId, bool)>,
    returns: &BTreeSet<StmtId>,
    ids: &mut Ids<'_>,
    plan: &mut Plan,
) -> Result<(), ConcretizeError> {
    if p.repaired.iter().any(|ga| ga.branch && ga.guard == Expr::Bool(false)) {
        return Ok(());
    }
    let target: Vec<GuardedAction> = p
        .repaired
        .iter()
        .map(|ga| GuardedAction {
            updates: ga.updates.iter().filter(|u| u.rhs != UpdateRhs::Keep).cloned().collect(),
            ..ga.clone()
        })
        .collect();
    let start = edge_start(cfa, p.source, p.func);
    let pre = cfa
        .outgoing(p.source)
        .map(|e| shared_prefix(&target, &e.label, start, parts, returns))
        .fold(None::<Prefix>, |best, x| match best {
            Some(b) if b.score >= x.score => Some(b),
            _ => Some(x),
        })
        .unwrap_or(Prefix { anchor: start, gas: 0, guard: false, updates: 0, ret: None, score: 0 });

    // the return value is set in some action but returned only once every
    // guard has held, so it must not depend on anything written later
    let mut ret = pre.ret.clone();
    let mut levels: Vec<(Expr, Vec<Stmt>)> = vec![(Expr::Bool(true), Vec::new())];
    for (i, ga) in target.iter().enumerate().skip(pre.gas) {
        let first = i == pre.gas;
        let guard = if first && pre.guard { Expr::Bool(true) } else { ga.guard.clone() };
        let from = if first { pre.updates } else { 0 };
        let mut body = Vec::new();
        for u in &ga.updates[from..] {
            if let (Lhs::Ret, UpdateRhs::Expr(e)) = (&u.lhs, &u.rhs) {
                if !ga.branch && guard != Expr::Bool(true) {
                    return Err(ConcretizeError("conditional return value on an inserted edge".into()));
                }
                ret = Some(e.clone());
                continue;
            }
            if let (Lhs::Var(x) | Lhs::Elem(x, _), Some(r)) = (&u.lhs, &ret) {
                let mut hit = false;
                r.visit_vars(&mut |v| hit |= v == x);
                if hit {
                    return Err(ConcretizeError(format!("return value depends on `{x}`, written after it")));
                }
            }
            body.extend(update_stmt(u, ids));
        }
        let level = &mut levels.last_mut().expect("outer level").1;
        if guard == Expr::Bool(true) {
            level.extend(body);
        } else if ga.branch {
            levels.push((guard, body));
        } else if guard != Expr::Bool(false) && !body.is_empty() {
            let then = ids.stmt(StmtKind::Block(body));
            level.push(ids.stmt(StmtKind::If { cond: guard, then_branch: Box::new(then), else_branch: None }));
        }
    }
    let term = match p.kind {
        EdgeKind::Return => Some(ids.stmt(StmtKind::Return(ret))),
        EdgeKind::Break => Some(ids.stmt(StmtKind::Break)),
        EdgeKind::Normal => None,
    };
    levels.last_mut().expect("outer level").1.extend(term);
    while levels.len() > 1 {
        let (g, body) = levels.pop().expect("nested level");
        let then = ids.stmt(StmtKind::Block(body));
        let st = ids.stmt(StmtKind::If { cond: g, then_branch: Box::new(then), else_branch: None });
        levels.last_mut().expect("outer level").1.push(st);
    }
    let (_, code) = levels.pop().expect("outer level");
    if !code.is_empty() {
        plan.inserts.push((pre.anchor, code));
    }
    Ok(())
}

fn plan_edge(
    p: &EdgePatch,
    cfa: &Cfa,
    parts: &BTreeMap<StmtId, (StmtId, bool)>,
    returns: &BTreeSet<StmtId>,
    ids: &mut Ids<'_>,
    plan: &mut Plan,
) -> Result<(), ConcretizeError> {
    if p.inserted {
        return plan_inserted(p, cfa, parts, returns, ids, plan);
    }

    let mut anchor = edge_start(cfa, p.source, p.func);
    for (ga, new) in p.original.iter().zip(&p.repaired) {
        if let Some(o) = ga.guard_origin {
            anchor = guard_anchor(o);
            if new.guard != ga.guard {
                let cond = if o.positive { new.guard.clone() } else { new.guard.negate() };
                plan.conds.entry(o.stmt).or_insert(cond);
            }
        }
        // a changed guard without a source condition is implied by the
        // other edges out of the same node, or the final check rejects it
        let mut fresh = Vec::new();
        for (u, nu) in ga.updates.iter().zip(&new.updates) {
            match u.origin {
                Some(o) => {
                    if u.rhs != nu.rhs {
                        plan.rhs.entry(o).or_insert_with(|| nu.rhs.clone());
                    }
                    anchor = update_anchor(o, parts, returns);
                }
                None => {
                    if let Some(s) = update_stmt(nu, ids) {
                        fresh.push(s);
                    }
                }
            }
        }
        if fresh.is_empty() {
            continue;
        }
        if ga.guard_origin.is_none() && !ga.branch && new.guard != Expr::Bool(true) {
            if new.guard == Expr::Bool(false) {
                continue;
            }
            let then = ids.stmt(StmtKind::Block(fresh));
            fresh = vec![ids.stmt(StmtKind::If { cond: new.guard.clone(), then_branch: Box::new(then), else_branch: None })];
        }
        let place = match anchor {
            Place::Start(s) => {
                // keep the order of several insertions at the same start
                let p = Place::End(s);
                if plan.inserts.iter().any(|(q, _)| *q == p) {
                    p
                } else {
                    anchor
                }
            }
            a => a,
        };
        // returns found inside the label are already in the source
        plan.inserts.push((place, fresh.clone()));
        if let Some(last) = fresh.last() {
            anchor = Place::After(last.id);
        }
    }
    Ok(())
}

/// Applies the patches to a copy of `ast`; variables minted by the alignment
/// are declared at the top of their function when used.
pub fn concretize(
    ast: &Ast,
    cfa: &Cfa,
    patches: &[EdgePatch],
    fresh: &[(usize, String, VarType)],
) -> Result<Ast, ConcretizeError> {
    let mut out = ast.clone();
    let parts = loop_parts(ast);
    let mut returns = BTreeSet::new();
    for f in &ast.functions {
        f.walk(&mut |s| {
            if matches!(s.kind, StmtKind::Return(_)) {
                returns.insert(s.id);
            }
        });
    }
    let mut next = out.next_id;
    let mut plan = Plan::default();
    {
        let mut ids = Ids(&mut next);
        for p in patches {
            plan_edge(p, cfa, &parts, &returns, &mut ids, &mut plan)?;
        }
    }
    for f in &mut out.functions {
        for s in &mut f.body {
            s.walk_mut(&mut |s| apply_edit(s, &plan));
        }
    }
    let mut ids = Ids(&mut next);
    for (place, stmts) in &plan.inserts {
        if !insert(&mut out, *place, stmts.clone(), &mut ids) {
            return Err(ConcretizeError(format!("no insertion point {place:?}")));
        }
    }
    for (fi, name, ty) in fresh {
        let used = {
            let mut u = false;
            out.functions[*fi].walk(&mut |s| u |= mentions(s, name));
            u
        };
        if used {
            let (ty, size) = match ty {
                VarType::Int => (Type::Int, None),
                VarType::Float => (Type::Float, None),
                VarType::IntArray(n) => (Type::Int, Some(*n)),
            };
            let d = ids.stmt(StmtKind::Decl { ty, name: name.clone(), size, init: None });
            out.functions[*fi].body.insert(0, d);
        }
    }
    out.next_id = next;
    Ok(out)
}

fn mentions(s: &Stmt, name: &str) -> bool {
    let mut found = false;
    let mut see = |e: &Expr| e.visit_vars(&mut |v| found |= v == name);
    match &s.kind {
        StmtKind::Assign { target, value, .. } => {
            see(&target.as_expr());
            if let Some(Rhs::Expr(e)) = value {
                see(e);
            }
        }
        StmtKind::Decl { init: Some(Rhs::Expr(e)), .. } => see(e),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => see(cond),
        StmtKind::For { cond: Some(c), .. } => see(c),
        StmtKind::Return(Some(e)) | StmtKind::Print(e) | StmtKind::Expr(e) => see(e),
        _ => {}
    }
    found
}

fn apply_edit(s: &mut Stmt, plan: &Plan) {
    if let Some(c) = plan.conds.get(&s.id) {
        match &mut s.kind {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => *cond = c.clone(),
            StmtKind::For { cond, .. } => *cond = Some(c.clone()),
            _ => {}
        }
    }
    if let StmtKind::For { init, step, .. } = &mut s.kind {
        for part in [init, step] {
            if let Some(p) = part {
                if plan.rhs.get(&p.id) == Some(&UpdateRhs::Keep) {
                    *part = None;
                }
            }
        }
    }
    let Some(r) = plan.rhs.get(&s.id) else { return };
    let value = match r {
        UpdateRhs::Expr(e) | UpdateRhs::Emit(e) => Some(Rhs::Expr(e.clone())),
        UpdateRhs::Read => Some(Rhs::Read),
        UpdateRhs::Keep => None,
    };
    match (&mut s.kind, value) {
        (StmtKind::Decl { init, .. }, v) => *init = v,
        (StmtKind::Assign { op, value, .. }, Some(v)) => {
            *op = AssignOp::Set;
            *value = Some(v);
        }
        (StmtKind::Assign { .. } | StmtKind::Print(_), None) => s.kind = StmtKind::Empty,
        (StmtKind::Print(e), Some(Rhs::Expr(v))) => *e = v,
        (StmtKind::Return(e), Some(Rhs::Expr(v))) => *e = Some(v),
        _ => {}
    }
}

/// Turns `b` into a block if needed and returns its statements.
fn as_block<'a>(b: &'a mut Box<Stmt>, ids: &mut Ids<'_>) -> &'a mut Vec<Stmt> {
    if !matches!(b.kind, StmtKind::Block(_)) {
        let old = std::mem::replace(b.as_mut(), ids.stmt(StmtKind::Empty));
        let inner = if matches!(old.kind, StmtKind::Empty) { Vec::new() } else { vec![old] };
        b.kind = StmtKind::Block(inner);
    }
    match &mut b.kind {
        StmtKind::Block(v) => v,
        _ => unreachable!(),
    }
}

fn insert(ast: &mut Ast, place: Place, stmts: Vec<Stmt>, ids: &mut Ids<'_>) -> bool {
    match place {
        Place::Start(Slot::Func(fi)) | Place::End(Slot::Func(fi)) => {
            let Some(f) = ast.functions.get_mut(fi) else { return false };
            if matches!(place, Place::Start(_)) {
                f.body.splice(0..0, stmts);
            } else {
                let at = f.body.iter().rposition(|s| !matches!(s.kind, StmtKind::Return(_))).map_or(0, |i| i + 1);
                f.body.splice(at..at, stmts);
            }
            true
        }
        Place::Start(slot) | Place::End(slot) => {
            let start = matches!(place, Place::Start(_));
            let (id, which) = match slot {
                Slot::Then(id) => (id, 0),
                Slot::Else(id) => (id, 1),
                Slot::Body(id) => (id, 2),
                Slot::Func(_) => unreachable!(),
            };
            let mut done = false;
            let mut stmts = Some(stmts);
            for f in &mut ast.functions {
                for s in &mut f.body {
                    s.walk_mut(&mut |s| {
                        if s.id != id || done {
                            return;
                        }
                        let target: &mut Box<Stmt> = match (&mut s.kind, which) {
                            (StmtKind::If { then_branch, .. }, 0) => then_branch,
                            (StmtKind::If { else_branch, .. }, 1) => {
                                else_branch.get_or_insert_with(|| Box::new(ids.stmt(StmtKind::Block(Vec::new()))))
                            }
                            (StmtKind::While { body, .. } | StmtKind::For { body, .. }, 2) => body,
                            _ => return,
                        };
                        let v = as_block(target, ids);
                        let new = stmts.take().unwrap();
                        if start {
                            v.splice(0..0, new);
                        } else {
                            v.extend(new);
                        }
                        done = true;
                    });
                }
            }
            done
        }
        Place::After(id) | Place::Before(id) => {
            let after = matches!(place, Place::After(_));
            let mut stmts = Some(stmts);
            ast.functions.iter_mut().any(|f| insert_rel(&mut f.body, id, &mut stmts, after, ids))
        }
    }
}

fn insert_rel(list: &mut Vec<Stmt>, id: StmtId, new: &mut Option<Vec<Stmt>>, after: bool, ids: &mut Ids<'_>) -> bool {
    for i in 0..list.len() {
        if list[i].id == id {
            let at = if after { i + 1 } else { i };
            list.splice(at..at, new.take().unwrap());
            return true;
        }
        if insert_in(&mut list[i], id, new, after, ids) {
            return true;
        }
    }
    false
}

fn insert_in(s: &mut Stmt, id: StmtId, new: &mut Option<Vec<Stmt>>, after: bool, ids: &mut Ids<'_>) -> bool {
    match &mut s.kind {
        StmtKind::Block(v) => insert_rel(v, id, new, after, ids),
        StmtKind::If { then_branch, else_branch, .. } => {
            insert_child(then_branch, id, new, after, ids)
                || else_branch.as_mut().is_some_and(|e| insert_child(e, id, new, after, ids))
        }
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => insert_child(body, id, new, after, ids),
        _ => false,
    }
}

fn insert_child(b: &mut Box<Stmt>, id: StmtId, new: &mut Option<Vec<Stmt>>, after: bool, ids: &mut Ids<'_>) -> bool {
    if b.id == id {
        let v = as_block(b, ids);
        let n = new.take().unwrap();
        if after {
            v.extend(n);
        } else {
            v.splice(0..0, n);
        }
        return true;
    }
    insert_in(b, id, new, after, ids)
}
