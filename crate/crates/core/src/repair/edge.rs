// SPDX-License-Identifier: Apache-2.0

//! Verification and counter-example guided repair of one aligned edge.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::sketch::{extend, repair_sketch, Hole};
use super::{FailureReason, RepairConfig};
use crate::cfa::GuardedAction;
use crate::solver::{OptResult, Query, Session, Sexp, SolverError, Verdict};
use crate::vcgen::{edge_vc, fixed_sketch, resolve_sketch, selector, CounterExample, EdgeSpec, SketchGa, VcContext};

/// Soft weight of keeping a hole's original expression.
pub const W_ORIG: u32 = 2;
/// Soft weight of each alternative.
pub const W_ALT: u32 = 1;

/// The two labels of an aligned edge. Reference labels stay in reference
/// names; `reference_renamed` is the same label in student names.
#[derive(Clone, Debug)]
pub struct EdgeInput<'a> {
    pub student: Option<&'a [GuardedAction]>,
    pub reference: Option<&'a [GuardedAction]>,
    pub reference_renamed: Option<&'a [GuardedAction]>,
    pub from_entry: bool,
    pub to_exit: bool,
}

/// One hole whose chosen option differs from the original.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Change {
    pub hole: usize,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum EdgeOutcome {
    Verified,
    Repaired { changes: Vec<Change> },
    Failed { reason: FailureReason, detail: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeRepair {
    pub outcome: EdgeOutcome,
    /// Student label after padding; `None` when the edge verified as-is.
    #[serde(skip)]
    pub extended: Option<Vec<GuardedAction>>,
    /// Final student label (the original when verified or failed).
    #[serde(skip)]
    pub label: Vec<GuardedAction>,
    pub holes: Vec<Hole>,
    pub counter_examples: Vec<CounterExample>,
    /// Candidates proposed in each round.
    pub round_candidates: Vec<usize>,
    /// Minimal number of changed holes found by the optimiser.
    pub cost: Option<u64>,
}

fn fail(reason: FailureReason, detail: impl Into<String>) -> EdgeOutcome {
    EdgeOutcome::Failed { reason, detail: detail.into() }
}

fn solver_failure(e: &SolverError) -> EdgeOutcome {
    fail(FailureReason::SmtIssue, e.to_string())
}

fn budget(cfg: &RepairConfig, deadline: Instant) -> Duration {
    cfg.query_budget.min(deadline.saturating_duration_since(Instant::now()))
}

/// Checks the edge with a fixed student label. `Ok(None)` means verified.
pub fn check_edge(
    ctx: &VcContext,
    student: Option<&[SketchGa]>,
    reference: Option<&[SketchGa]>,
    input: &EdgeInput<'_>,
    session: &mut Session,
    cfg: &RepairConfig,
    deadline: Instant,
) -> Result<Option<CounterExample>, EdgeOutcome> {
    let spec = EdgeSpec { student, reference, from_entry: input.from_entry, to_exit: input.to_exit };
    let vc = edge_vc(ctx, &spec, "").map_err(|e| fail(FailureReason::Unsupported, e.to_string()))?;
    match session.check_sat(&vc.query(), budget(cfg, deadline)) {
        Ok(Verdict::Unsat) => Ok(None),
        Ok(Verdict::Sat(m)) => Ok(Some(CounterExample::from_model(&vc, &m))),
        Ok(Verdict::Timeout) => Err(fail(FailureReason::Timeout, "verification query timed out")),
        Ok(Verdict::Unknown(r)) => Err(fail(FailureReason::SmtIssue, format!("solver answered unknown: {r}"))),
        Err(e) => Err(solver_failure(&e)),
    }
}

/// The optimisation query over all counter-examples so far.
pub fn synthesis_query(
    ctx: &VcContext,
    sketch: &[SketchGa],
    reference: Option<&[SketchGa]>,
    input: &EdgeInput<'_>,
    holes: &[Hole],
    ces: &[CounterExample],
    blocked: &[BTreeMap<usize, usize>],
) -> Result<Query, EdgeOutcome> {
    let mut q = Query::default();
    for h in holes {
        q.decls.push(Sexp::app("declare-fun", vec![selector(h.id), Sexp::List(Vec::new()), Sexp::atom("Int")]));
        q.hard.push(Sexp::and(vec![
            Sexp::app("<=", vec![Sexp::int(0), selector(h.id)]),
            Sexp::app("<", vec![selector(h.id), Sexp::int(h.space.len() as i64)]),
        ]));
        if h.space.len() > 1 {
            q.soft.push((Sexp::eq(selector(h.id), Sexp::int(0)), W_ORIG));
            for j in 1..h.space.len() {
                q.soft.push((Sexp::eq(selector(h.id), Sexp::int(j as i64)), W_ALT));
            }
        }
        q.wanted.push(selector(h.id));
    }
    let spec = EdgeSpec { student: Some(sketch), reference, from_entry: input.from_entry, to_exit: input.to_exit };
    for (j, ce) in ces.iter().enumerate() {
        let prefix = format!("c{j}__");
        let vc = edge_vc(ctx, &spec, &prefix).map_err(|e| fail(FailureReason::Unsupported, e.to_string()))?;
        let (defs, pins, defined) = ce.instantiate(&prefix);
        q.decls.extend(defs);
        q.decls.extend(vc.declarations(&defined));
        let pins: Vec<Sexp> = pins
            .into_iter()
            .filter(|p| {
                p.as_list()
                    .and_then(|l| l.get(1))
                    .and_then(Sexp::as_atom)
                    .is_some_and(|a| vc.consts.contains_key(a))
            })
            .collect();
        q.hard.push(Sexp::and(vec![Sexp::and(pins), vc.premise(), vc.good()]));
    }
    for b in blocked {
        let same: Vec<Sexp> = b.iter().map(|(h, v)| Sexp::eq(selector(*h), Sexp::int(*v as i64))).collect();
        q.hard.push(Sexp::not(Sexp::and(same)));
    }
    Ok(q)
}

fn assignment_of(model: &crate::solver::Model, holes: &[Hole]) -> BTreeMap<usize, usize> {
    holes
        .iter()
        .map(|h| {
            let v = model
                .value(&selector(h.id))
                .and_then(Sexp::as_atom)
                .and_then(|a| a.parse::<usize>().ok())
                .filter(|v| *v < h.space.len())
                .unwrap_or(0);
            (h.id, v)
        })
        .collect()
}

/// The student label padded to the reference's shape and turned into holes.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub extended: Vec<GuardedAction>,
    pub sketch: Vec<SketchGa>,
    pub holes: Vec<Hole>,
    pub reference: Option<Vec<SketchGa>>,
}

pub fn prepare(ctx: &VcContext, input: &EdgeInput<'_>) -> Prepared {
    let original: Vec<GuardedAction> = input.student.map(<[_]>::to_vec).unwrap_or_default();
    let renamed: &[GuardedAction] = input.reference_renamed.unwrap_or(&[]);
    let extended = extend(&original, renamed, input.student.is_none());
    let (sketch, holes) = repair_sketch(&extended, &original, renamed, &ctx.env_s, ctx.ret_s);
    Prepared { extended, sketch, holes, reference: input.reference.map(fixed_sketch) }
}

/// One optimisation round: up to `cfg.k` distinct hole assignments of equal
/// minimal cost that rule out every counter-example in `ces`. The cost is the
/// number of changed holes.
#[allow(clippy::too_many_arguments)]
pub fn propose(
    ctx: &VcContext,
    input: &EdgeInput<'_>,
    prep: &Prepared,
    ces: &[CounterExample],
    blocked: &[BTreeMap<usize, usize>],
    session: &mut Session,
    cfg: &RepairConfig,
    deadline: Instant,
) -> Result<(u64, Vec<BTreeMap<usize, usize>>), EdgeOutcome> {
    let q = synthesis_query(ctx, &prep.sketch, prep.reference.as_deref(), input, &prep.holes, ces, blocked)?;
    let block_terms: Vec<Sexp> = prep.holes.iter().map(|h| selector(h.id)).collect();
    let (cost, models) = match session.optimize(&q, &block_terms, cfg.k, budget(cfg, deadline)) {
        Ok(OptResult::Models { cost, models }) => (cost, models),
        Ok(OptResult::Unsat) => return Err(fail(FailureReason::NoRepair, "no candidate in the implementation spaces")),
        Ok(OptResult::Timeout) => return Err(fail(FailureReason::Timeout, "synthesis query timed out")),
        Ok(OptResult::Unknown(r)) => return Err(fail(FailureReason::SmtIssue, format!("solver answered unknown: {r}"))),
        Err(e) => return Err(solver_failure(&e)),
    };
    // an unchanged hole with n options leaves n - 1 alternatives unsatisfied
    let base: u64 = prep.holes.iter().map(|h| h.space.len().saturating_sub(1) as u64).sum();
    let mut out: Vec<BTreeMap<usize, usize>> = Vec::new();
    for m in &models {
        let a = assignment_of(m, &prep.holes);
        if !out.contains(&a) {
            out.push(a);
        }
    }
    Ok((cost.saturating_sub(base), out))
}

pub fn changes_of(holes: &[Hole], a: &BTreeMap<usize, usize>) -> Vec<Change> {
    holes
        .iter()
        .filter_map(|h| {
            let v = a.get(&h.id).copied().unwrap_or(0);
            (v != 0).then(|| Change { hole: h.id, from: h.original.clone(), to: h.space[v].clone() })
        })
        .collect()
}

/// Verifies the edge and, if it fails, searches for a minimal substitution
/// of hole options that makes it verify.
pub fn repair_edge(
    ctx: &VcContext,
    input: &EdgeInput<'_>,
    session: &mut Session,
    cfg: &RepairConfig,
    deadline: Instant,
) -> EdgeRepair {
    let original: Vec<GuardedAction> = input.student.map(<[_]>::to_vec).unwrap_or_default();
    let mut rep = EdgeRepair {
        outcome: EdgeOutcome::Verified,
        extended: None,
        label: original.clone(),
        holes: Vec::new(),
        counter_examples: Vec::new(),
        round_candidates: Vec::new(),
        cost: None,
    };
    let ref_sketch = input.reference.map(fixed_sketch);
    let fixed = input.student.map(fixed_sketch);
    let first = match check_edge(ctx, fixed.as_deref(), ref_sketch.as_deref(), input, session, cfg, deadline) {
        Ok(None) => return rep,
        Ok(Some(ce)) => ce,
        Err(o) => {
            rep.outcome = o;
            return rep;
        }
    };
    rep.counter_examples.push(first);

    let prep = prepare(ctx, input);
    rep.extended = Some(prep.extended.clone());
    rep.holes = prep.holes.clone();
    let mut blocked: Vec<BTreeMap<usize, usize>> = Vec::new();

    for _ in 0..cfg.max_rounds {
        if Instant::now() >= deadline {
            rep.outcome = fail(FailureReason::Timeout, "program budget exhausted");
            return rep;
        }
        let (cost, cands) =
            match propose(ctx, input, &prep, &rep.counter_examples, &blocked, session, cfg, deadline) {
                Ok(x) => x,
                Err(o) => {
                    rep.outcome = o;
                    return rep;
                }
            };
        rep.cost = Some(cost);
        rep.round_candidates.push(cands.len());
        // every verified candidate of the round is equally small; prefer one
        // that leaves source conditions alone, since other edges share them
        let mut best: Option<(usize, BTreeMap<usize, usize>, Vec<GuardedAction>)> = None;
        for a in cands {
            let label = resolve_sketch(&prep.sketch, &a);
            let cand = fixed_sketch(&label);
            match check_edge(ctx, Some(&cand), prep.reference.as_deref(), input, session, cfg, deadline) {
                Ok(None) => {
                    let edits = prep
                        .extended
                        .iter()
                        .zip(&label)
                        .filter(|(o, n)| o.guard_origin.is_some() && o.guard != n.guard)
                        .count();
                    if best.as_ref().is_none_or(|b| edits < b.0) {
                        best = Some((edits, a, label));
                    }
                }
                Ok(Some(ce)) => {
                    if !rep.counter_examples.contains(&ce) {
                        rep.counter_examples.push(ce);
                    }
                    blocked.push(a);
                }
                Err(o) => {
                    rep.outcome = o;
                    return rep;
                }
            }
        }
        if let Some((_, a, label)) = best {
            rep.outcome = EdgeOutcome::Repaired { changes: changes_of(&prep.holes, &a) };
            rep.label = label;
            return rep;
        }
    }
    rep.outcome = fail(FailureReason::NoRepair, format!("no verified candidate after {} rounds", cfg.max_rounds));
    rep
}
