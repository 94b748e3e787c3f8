// SPDX-License-Identifier: Apache-2.0

//! Padding of student labels, holes and their implementation spaces.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::align::{rename_to_student, Pred};
use crate::cfa::{GuardedAction, Lhs, Update, UpdateRhs};
use crate::lang::ast::{Expr, Type};
use crate::lang::pretty::render_expr;
use crate::lang::types::{ExprType, TypeEnv, VarType};
use crate::vcgen::{Choice, SketchGa, SketchUpdate};

/// Rewrites a reference label into student variable and function names.
pub fn rename_label(label: &[GuardedAction], pred: &Pred, funcs: &BTreeMap<String, String>) -> Vec<GuardedAction> {
    let e = |x: &Expr| rename_to_student(x, pred, funcs);
    label
        .iter()
        .map(|ga| GuardedAction {
            guard: e(&ga.guard),
            branch: ga.branch,
            guard_origin: ga.guard_origin,
            updates: ga
                .updates
                .iter()
                .map(|u| Update {
                    lhs: match &u.lhs {
                        Lhs::Var(x) => Lhs::Var(pred.student_of(x).unwrap_or(x).to_string()),
                        Lhs::Elem(a, i) => Lhs::Elem(pred.student_of(a).unwrap_or(a).to_string(), e(i)),
                        l => l.clone(),
                    },
                    rhs: match &u.rhs {
                        UpdateRhs::Expr(x) => UpdateRhs::Expr(e(x)),
                        UpdateRhs::Emit(x) => UpdateRhs::Emit(e(x)),
                        r => r.clone(),
                    },
                    origin: u.origin,
                })
                .collect(),
        })
        .collect()
}

/// Pads `student` so it has at least as many guarded actions as `reference`
/// (with `[false]` actions) and every action has at least as many updates as
/// the largest reference action (with frames). `reference` must already be in
/// student names. Padding actions decide whether the edge is taken only for an
/// inserted edge, which is never taken before repair.
pub fn extend(student: &[GuardedAction], reference: &[GuardedAction], inserted: bool) -> Vec<GuardedAction> {
    let mut out = student.to_vec();
    while out.len() < reference.len() {
        out.push(GuardedAction { guard: Expr::Bool(false), branch: inserted, guard_origin: None, updates: Vec::new() });
    }
    let m = reference.iter().map(|ga| ga.updates.len()).max().unwrap_or(0);
    let all: Vec<Lhs> = reference.iter().flat_map(|ga| ga.updates.iter().map(|u| u.lhs.clone())).collect();
    for (i, ga) in out.iter_mut().enumerate() {
        let preferred: Vec<Lhs> =
            reference.get(i).map(|r| r.updates.iter().map(|u| u.lhs.clone()).collect()).unwrap_or_default();
        while ga.updates.len() < m {
            let pool = preferred.iter().chain(&all);
            let lhs = pool
                .clone()
                .find(|l| !ga.updates.iter().any(|u| u.lhs.same_slot(l)))
                .or_else(|| pool.clone().next())
                .cloned()
                .expect("m > 0 implies a reference update");
            ga.updates.push(Update { lhs, rhs: UpdateRhs::Keep, origin: None });
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoleKind {
    Conditional,
    Update,
}

/// A hole for reports: where it is and what it may become.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hole {
    pub id: usize,
    pub kind: HoleKind,
    pub lhs: Option<String>,
    pub original: String,
    pub space: Vec<String>,
}

pub fn render_rhs(lhs: &Lhs, rhs: &UpdateRhs) -> String {
    match rhs {
        UpdateRhs::Keep => lhs.render(),
        UpdateRhs::Read => "read()".into(),
        UpdateRhs::Expr(e) | UpdateRhs::Emit(e) => render_expr(e),
    }
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Candidate guards: the original, every student and reference guard of the
/// edge, `true` and `false`.
pub fn guard_space(original: &Expr, student: &[GuardedAction], reference: &[GuardedAction]) -> Vec<Expr> {
    let mut v = vec![original.clone()];
    for ga in student.iter().chain(reference) {
        push_unique(&mut v, ga.guard.clone());
    }
    push_unique(&mut v, Expr::Bool(true));
    push_unique(&mut v, Expr::Bool(false));
    v
}

/// Sort of the location an update writes.
fn lhs_is_real(lhs: &Lhs, env: &TypeEnv, ret_ty: Type) -> bool {
    match lhs {
        Lhs::Var(x) => env.var_type(x) == Some(VarType::Float),
        Lhs::Ret => ret_ty == Type::Float,
        _ => false,
    }
}

fn canonical(lhs: &Lhs, rhs: UpdateRhs) -> UpdateRhs {
    match (&rhs, lhs) {
        (UpdateRhs::Expr(Expr::Var(y)), Lhs::Var(x)) if x == y => UpdateRhs::Keep,
        _ => rhs,
    }
}

/// Candidate right-hand sides of `original`: the student's and reference's
/// right-hand sides of matching kind and sort, and the frame. Reads are never
/// replaced.
pub fn update_space(
    original: &Update,
    student: &[GuardedAction],
    reference: &[GuardedAction],
    env: &TypeEnv,
    ret_ty: Type,
) -> Vec<UpdateRhs> {
    let lhs = &original.lhs;
    // the original stays verbatim; alternatives equal to it up to framing are dropped
    let mut v = vec![original.rhs.clone()];
    if original.rhs == UpdateRhs::Read {
        return v;
    }
    let same = canonical(lhs, original.rhs.clone());
    let push = |v: &mut Vec<UpdateRhs>, x: UpdateRhs| {
        if x != same {
            push_unique(v, x);
        }
    };
    let real = lhs_is_real(lhs, env, ret_ty);
    let fits = |e: &Expr| match env.expr_type(e) {
        Ok(ExprType::Real) => real,
        Ok(_) => true,
        Err(_) => false,
    };
    let updates = || student.iter().chain(reference).flat_map(|ga| ga.updates.iter());
    for u in updates() {
        match (&u.rhs, lhs) {
            (UpdateRhs::Emit(e), Lhs::Out) => push(&mut v, UpdateRhs::Emit(e.clone())),
            (UpdateRhs::Expr(e), Lhs::Var(_) | Lhs::Elem(..) | Lhs::Ret) if fits(e) => {
                push(&mut v, canonical(lhs, UpdateRhs::Expr(e.clone())))
            }
            _ => {}
        }
    }
    if !matches!(lhs, Lhs::Out) && reference.iter().flat_map(|ga| &ga.updates).any(|u| u.rhs == UpdateRhs::Read && u.lhs.same_slot(lhs)) {
        push(&mut v, UpdateRhs::Read);
    }
    push(&mut v, UpdateRhs::Keep);
    v
}

/// Replaces every guard and right-hand side of `extended` by a hole over its
/// implementation space. `student` and `reference` are the labels the spaces
/// draw from (reference in student names).
pub fn repair_sketch(
    extended: &[GuardedAction],
    student: &[GuardedAction],
    reference: &[GuardedAction],
    env: &TypeEnv,
    ret_ty: Type,
) -> (Vec<SketchGa>, Vec<Hole>) {
    let mut holes = Vec::new();
    let mut sketch = Vec::new();
    for ga in extended {
        let id = holes.len();
        let space = guard_space(&ga.guard, student, reference);
        holes.push(Hole {
            id,
            kind: HoleKind::Conditional,
            lhs: None,
            original: render_expr(&ga.guard),
            space: space.iter().map(render_expr).collect(),
        });
        let guard = Choice::Hole { id, options: space };
        let mut updates = Vec::new();
        for u in &ga.updates {
            let id = holes.len();
            let space = update_space(u, student, reference, env, ret_ty);
            holes.push(Hole {
                id,
                kind: HoleKind::Update,
                lhs: Some(u.lhs.render()),
                original: render_rhs(&u.lhs, &u.rhs),
                space: space.iter().map(|r| render_rhs(&u.lhs, r)).collect(),
            });
            updates.push(SketchUpdate { lhs: u.lhs.clone(), rhs: Choice::Hole { id, options: space }, origin: u.origin });
        }
        sketch.push(SketchGa { guard, branch: ga.branch, guard_origin: ga.guard_origin, updates });
    }
    (sketch, holes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_expr;

    fn ga(guard: &str, ups: &[(&str, &str)]) -> GuardedAction {
        GuardedAction {
            guard: parse_expr(guard).unwrap(),
            branch: true,
            guard_origin: None,
            updates: ups
                .iter()
                .map(|(l, r)| Update {
                    lhs: Lhs::Var(l.to_string()),
                    rhs: UpdateRhs::Expr(parse_expr(r).unwrap()),
                    origin: None,
                })
                .collect(),
        }
    }

    #[test]
    fn equal_shapes_are_unchanged() {
        let s = vec![ga("true", &[("i", "1")])];
        let r = vec![ga("n != 1", &[("i", "2")])];
        assert_eq!(extend(&s, &r, false), s);
    }

    #[test]
    fn inserted_edge_gets_false_branch() {
        let r = vec![ga("n == 1", &[])];
        let mut r0 = r.clone();
        r0[0].updates.push(Update { lhs: Lhs::Ret, rhs: UpdateRhs::Expr(Expr::Int(0)), origin: None });
        let e = extend(&[], &r0, true);
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].guard, Expr::Bool(false));
        assert!(e[0].branch);
        assert_eq!(e[0].updates, vec![Update { lhs: Lhs::Ret, rhs: UpdateRhs::Keep, origin: None }]);
    }

    #[test]
    fn frames_pad_to_widest_reference_action() {
        let s = vec![ga("true", &[])];
        let r = vec![ga("true", &[("a", "1"), ("b", "2")])];
        let e = extend(&s, &r, false);
        assert_eq!(e[0].updates.len(), 2);
        assert_eq!(e[0].updates[0].lhs, Lhs::Var("a".into()));
        assert_eq!(e[0].updates[1].lhs, Lhs::Var("b".into()));
    }

    #[test]
    fn guard_space_dedups() {
        let s = vec![ga("true", &[])];
        let r = vec![ga("n != 1", &[])];
        let sp = guard_space(&Expr::Bool(true), &s, &r);
        let shown: Vec<String> = sp.iter().map(render_expr).collect();
        assert_eq!(shown, vec!["true", "n != 1", "false"]);
    }
}
