// SPDX-License-Identifier: Apache-2.0

//! Whole-program verification and repair.

pub mod concretize;
pub mod edge;
pub mod sketch;
pub mod soundness;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::align::{
    align_edges, align_nodes, ast_skeleton, check_signatures, variable_alignment, AlignError, AlignedAutomaton,
    AlignedEdge, Pred,
};
use crate::cfa::{build_cfa, Cfa, GuardedAction, NodeKind};
use crate::lang::{ast_size, parse, render, tree_edit_distance, Ast};
use crate::solver::{Session, SolverConfig};
use crate::vcgen::{fixed_sketch, VcContext};

pub use concretize::{concretize, ConcretizeError, EdgePatch};
pub use edge::{check_edge, prepare, propose, repair_edge, Change, EdgeInput, EdgeOutcome, EdgeRepair, Prepared};
pub use soundness::{soundness_check, Domain, InputRange, Soundness};

/// Factor on the pairing cap for passes that re-check written-back code.
const LATER_PASS_CAP: usize = 10;

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepairConfig {
    /// Budget for one program.
    pub timeout: Duration,
    /// Budget for one solver query.
    pub query_budget: Duration,
    /// Candidates taken from each optimisation round.
    pub k: usize,
    /// Edge pairings allowed per node pair.
    pub max_pairings: usize,
    /// Synthesis rounds per edge.
    pub max_rounds: usize,
    /// Aligned automata ranked before repair starts.
    pub max_candidates: usize,
    /// Aligned automata fully attempted.
    pub max_attempts: usize,
    /// Repair, write back and re-check at most this many times.
    pub max_passes: usize,
    pub solver: SolverConfig,
}

impl Default for RepairConfig {
    fn default() -> Self {
        RepairConfig {
            timeout: Duration::from_secs(300),
            query_budget: Duration::from_secs(10),
            k: 4,
            max_pairings: 24,
            max_rounds: 32,
            max_candidates: 64,
            max_attempts: 8,
            max_passes: 3,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    /// Structural mismatch: the control-flow skeletons cannot be aligned.
    #[serde(rename = "SM")]
    StructuralMismatch,
    Timeout,
    SmtIssue,
    Unsupported,
    CombinatoricsExceeded,
    NoRepair,
    /// Every edge was repaired but the result could not be written back
    /// as a program that verifies.
    ConcretizationFailed,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::StructuralMismatch => "SM",
            FailureReason::Timeout => "Timeout",
            FailureReason::SmtIssue => "SmtIssue",
            FailureReason::Unsupported => "Unsupported",
            FailureReason::CombinatoricsExceeded => "CombinatoricsExceeded",
            FailureReason::NoRepair => "NoRepair",
            FailureReason::ConcretizationFailed => "ConcretizationFailed",
        }
    }
}

impl std::fmt::Display for FailureReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    /// Already equivalent; nothing changed.
    Verified,
    Repaired,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeReport {
    pub name: String,
    pub function: String,
    pub source: String,
    pub target: String,
    pub kind: &'static str,
    pub student_label: Option<String>,
    pub reference_label: Option<String>,
    pub repaired_label: Option<String>,
    #[serde(flatten)]
    pub outcome: EdgeOutcome,
    pub holes: Vec<sketch::Hole>,
    pub counter_examples: Vec<crate::vcgen::CounterExample>,
    pub round_candidates: Vec<usize>,
    pub cost: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlignmentSummary {
    /// Aligned automata the edge pairings allow.
    pub candidates: usize,
    /// Aligned automata repaired until one succeeded or the limit was hit.
    pub attempted: usize,
    /// Student node to reference node.
    pub nodes: Vec<(String, String)>,
    /// Variable pairs per function.
    pub preds: Vec<String>,
    /// Student edges were paired with empty reference slots.
    pub student_surplus: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RepairReport {
    pub schema_version: u32,
    pub status: Status,
    pub reason: Option<FailureReason>,
    pub message: Option<String>,
    pub alignment: Option<AlignmentSummary>,
    /// Edges of the first pass.
    pub edges: Vec<EdgeReport>,
    /// Repair and re-check passes run.
    pub passes: usize,
    pub repaired_source: Option<String>,
    pub diff: Option<String>,
    /// Tree edit distance between student and repaired program.
    pub ted: Option<usize>,
    /// `ted` over the size of the student program.
    pub rps: Option<f64>,
    pub solver: String,
    /// Either program uses `float`; the solver reasons over exact reals.
    pub approximate_reals: bool,
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub repaired_ast: Option<Ast>,
}

impl RepairReport {
    fn failed(reason: FailureReason, message: impl Into<String>) -> RepairReport {
        RepairReport {
            schema_version: SCHEMA_VERSION,
            status: Status::Failed,
            reason: Some(reason),
            message: Some(message.into()),
            alignment: None,
            edges: Vec::new(),
            passes: 0,
            repaired_source: None,
            diff: None,
            ted: None,
            rps: None,
            solver: String::new(),
            approximate_reals: false,
            elapsed: Duration::ZERO,
            repaired_ast: None,
        }
    }

    pub fn succeeded(&self) -> bool {
        self.status != Status::Failed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Both programs parsed and lowered.
pub struct Programs {
    pub ast_s: Ast,
    pub ast_r: Ast,
    pub cfa_s: Cfa,
    pub cfa_r: Cfa,
}

/// Parses and lowers both programs.
pub fn load(reference: &str, student: &str) -> Result<Programs, (FailureReason, String)> {
    let unsupported = |who: &str, e: String| (FailureReason::Unsupported, format!("{who}: {e}"));
    let ast_r = parse(reference).map_err(|e| unsupported("reference", e.to_string()))?;
    let ast_s = parse(student).map_err(|e| unsupported("student", e.to_string()))?;
    let cfa_r = build_cfa(&ast_r).map_err(|e| unsupported("reference", e.to_string()))?;
    let cfa_s = build_cfa(&ast_s).map_err(|e| unsupported("student", e.to_string()))?;
    Ok(Programs { ast_s, ast_r, cfa_s, cfa_r })
}

fn align_error(e: AlignError) -> (FailureReason, String) {
    match e {
        AlignError::StructuralMismatch(m) => (FailureReason::StructuralMismatch, m),
        e @ AlignError::CombinatoricsExceeded { .. } => (FailureReason::CombinatoricsExceeded, e.to_string()),
    }
}

/// Aligned automata in enumeration order, with the node alignment.
pub fn alignments(p: &Programs, cfg: &RepairConfig) -> Result<(usize, Vec<AlignedAutomaton>), (FailureReason, String)> {
    let nodes = align_nodes(&ast_skeleton(&p.ast_s), &ast_skeleton(&p.ast_r), &p.cfa_s, &p.cfa_r).map_err(align_error)?;
    check_signatures(&p.cfa_s, &p.cfa_r).map_err(align_error)?;
    let cands = align_edges(&p.cfa_s, &p.cfa_r, &nodes, cfg.max_pairings).map_err(align_error)?;
    let total = cands.total();
    let list = cands
        .take(cfg.max_candidates)
        .map(|(edges, surplus)| {
            let preds = variable_alignment(&p.cfa_s, &p.cfa_r, &edges);
            AlignedAutomaton { nodes: nodes.clone(), edges, preds, student_surplus: surplus }
        })
        .collect();
    Ok((total, list))
}

fn uses_floats(ast: &Ast) -> bool {
    let text = render(ast);
    text.contains("float")
}

/// Edge order: breadth first from each function entry, then anything left.
fn bfs_order(a: &AlignedAutomaton, cfa_r: &Cfa) -> Vec<usize> {
    let mut out = Vec::new();
    let mut done = vec![false; a.edges.len()];
    for f in &cfa_r.functions {
        let mut queue = VecDeque::from([f.entry]);
        let mut seen = BTreeSet::from([f.entry]);
        while let Some(n) = queue.pop_front() {
            for (i, e) in a.edges.iter().enumerate() {
                if done[i] || e.source.1 != n {
                    continue;
                }
                done[i] = true;
                out.push(i);
                if seen.insert(e.target.1) {
                    queue.push_back(e.target.1);
                }
            }
        }
    }
    out.extend((0..a.edges.len()).filter(|i| !done[*i]));
    out
}

fn func_of(e: &AlignedEdge, cfa_r: &Cfa) -> usize {
    cfa_r.node(e.source.1).func
}

/// Everything needed to check or repair one aligned edge on its own.
pub struct EdgeProblem {
    pub name: String,
    pub ctx: VcContext,
    pub student: Option<Vec<GuardedAction>>,
    pub reference: Option<Vec<GuardedAction>>,
    /// `reference` in student names.
    pub renamed: Option<Vec<GuardedAction>>,
    pub from_entry: bool,
    pub to_exit: bool,
}

impl EdgeProblem {
    pub fn new(p: &Programs, a: &AlignedAutomaton, e: &AlignedEdge) -> EdgeProblem {
        let fi = func_of(e, &p.cfa_r);
        let pred = &a.preds[fi];
        let funcs = AlignedAutomaton::function_map(&p.cfa_s, &p.cfa_r);
        let reference = e.reference.map(|r| p.cfa_r.edge(r).label.clone());
        EdgeProblem {
            name: e.name(&p.cfa_s, &p.cfa_r),
            ctx: VcContext::new(&p.cfa_s, &p.cfa_r, fi, pred),
            student: e.student.map(|s| p.cfa_s.edge(s).label.clone()),
            renamed: reference.as_ref().map(|l| sketch::rename_label(l, pred, &funcs)),
            reference,
            from_entry: p.cfa_r.node(e.source.1).kind == NodeKind::FuncEntry,
            to_exit: p.cfa_r.node(e.target.1).kind == NodeKind::FuncExit,
        }
    }

    pub fn input(&self) -> EdgeInput<'_> {
        EdgeInput {
            student: self.student.as_deref(),
            reference: self.reference.as_deref(),
            reference_renamed: self.renamed.as_deref(),
            from_entry: self.from_entry,
            to_exit: self.to_exit,
        }
    }

    /// Checks the edge as written. `Ok(None)` means verified.
    pub fn check(
        &self,
        session: &mut Session,
        cfg: &RepairConfig,
        deadline: Instant,
    ) -> Result<Option<crate::vcgen::CounterExample>, EdgeOutcome> {
        let s = self.student.as_deref().map(fixed_sketch);
        let r = self.reference.as_deref().map(fixed_sketch);
        edge::check_edge(&self.ctx, s.as_deref(), r.as_deref(), &self.input(), session, cfg, deadline)
    }
}

fn render_label(l: &[GuardedAction]) -> String {
    l.iter().map(GuardedAction::render).collect::<Vec<_>>().join(" ")
}

/// Number of edges of `a` that verify without change.
fn score(p: &Programs, a: &AlignedAutomaton, session: &mut Session, cfg: &RepairConfig, deadline: Instant) -> usize {
    let mut ok = 0;
    for e in &a.edges {
        if matches!(EdgeProblem::new(p, a, e).check(session, cfg, deadline), Ok(None)) {
            ok += 1;
        }
    }
    ok
}

struct Attempt {
    edges: Vec<EdgeReport>,
    patches: Vec<EdgePatch>,
    failure: Option<(FailureReason, String)>,
}

fn attempt(
    p: &Programs,
    a: &AlignedAutomaton,
    session: &mut Session,
    cfg: &RepairConfig,
    deadline: Instant,
    repair: bool,
) -> Attempt {
    let mut out = Attempt { edges: Vec::new(), patches: Vec::new(), failure: None };
    for i in bfs_order(a, &p.cfa_r) {
        let e = &a.edges[i];
        let fi = func_of(e, &p.cfa_r);
        let l = EdgeProblem::new(p, a, e);
        let r = if repair {
            repair_edge(&l.ctx, &l.input(), session, cfg, deadline)
        } else {
            let outcome = match l.check(session, cfg, deadline) {
                Ok(None) => EdgeOutcome::Verified,
                Ok(Some(_)) => EdgeOutcome::Failed {
                    reason: FailureReason::NoRepair,
                    detail: "edge does not verify".into(),
                },
                Err(o) => o,
            };
            EdgeRepair {
                outcome,
                extended: None,
                label: l.student.clone().unwrap_or_default(),
                holes: Vec::new(),
                counter_examples: Vec::new(),
                round_candidates: Vec::new(),
                cost: None,
            }
        };
        let node = |n| p.cfa_r.node(n).name();
        let repaired_label = matches!(r.outcome, EdgeOutcome::Repaired { .. }).then(|| render_label(&r.label));
        if let (EdgeOutcome::Repaired { .. }, Some(ext)) = (&r.outcome, &r.extended) {
            out.patches.push(EdgePatch {
                kind: e.kind,
                source: e.source.0,
                func: p.cfa_s.node(e.source.0).func,
                inserted: e.student.is_none(),
                original: ext.clone(),
                repaired: r.label.clone(),
            });
        }
        if let EdgeOutcome::Failed { reason, detail } = &r.outcome {
            if out.failure.is_none() {
                out.failure = Some((*reason, format!("edge {}: {detail}", l.name)));
            }
        }
        out.edges.push(EdgeReport {
            name: l.name.clone(),
            function: p.cfa_r.functions[fi].name.clone(),
            source: node(e.source.1),
            target: node(e.target.1),
            kind: e.kind.name(),
            student_label: l.student.as_deref().map(render_label),
            reference_label: l.reference.as_deref().map(render_label),
            repaired_label,
            outcome: r.outcome,
            holes: r.holes,
            counter_examples: r.counter_examples,
            round_candidates: r.round_candidates,
            cost: r.cost,
        });
        if out.failure.is_some() {
            break;
        }
    }
    out
}

/// One pass over a student program: choose an aligned automaton, then check
/// (and with `repair`, fix) every edge.
struct Pass {
    summary: AlignmentSummary,
    edges: Vec<EdgeReport>,
    repaired: Option<Ast>,
}

fn run_pass(
    p: &Programs,
    session: &mut Session,
    cfg: &RepairConfig,
    deadline: Instant,
    repair: bool,
) -> Result<Pass, (FailureReason, String, Option<Pass>)> {
    let (total, mut cands) = alignments(p, cfg).map_err(|(r, m)| (r, m, None))?;
    if cands.len() > 1 {
        let mut scored: Vec<(usize, usize)> =
            cands.iter().enumerate().map(|(i, a)| (score(p, a, session, cfg, deadline), i)).collect();
        // more verified edges first; ties keep enumeration order
        scored.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));
        let mut taken: Vec<Option<AlignedAutomaton>> = cands.into_iter().map(Some).collect();
        cands = scored.into_iter().map(|(_, i)| taken[i].take().unwrap()).collect();
    }
    let summary = |a: &AlignedAutomaton, attempted: usize| AlignmentSummary {
        candidates: total,
        attempted,
        nodes: a.nodes.pairs.iter().map(|(s, r)| (p.cfa_s.node(*s).name(), p.cfa_r.node(*r).name())).collect(),
        preds: a.preds.iter().map(Pred::render).collect(),
        student_surplus: a.student_surplus,
    };
    let mut first_failure: Option<(FailureReason, String, Pass)> = None;
    for (n, a) in cands.iter().enumerate().take(cfg.max_attempts) {
        let at = attempt(p, a, session, cfg, deadline, repair);
        match at.failure {
            None => {
                let repaired = if at.patches.is_empty() {
                    None
                } else {
                    let fresh: Vec<(usize, String, crate::lang::types::VarType)> = a
                        .preds
                        .iter()
                        .enumerate()
                        .flat_map(|(fi, pr)| pr.fresh().map(move |(x, t)| (fi, x.to_string(), t)))
                        .collect();
                    match concretize(&p.ast_s, &p.cfa_s, &at.patches, &fresh) {
                        Ok(ast) => Some(ast),
                        Err(e) => {
                            let pass = Pass { summary: summary(a, n + 1), edges: at.edges, repaired: None };
                            return Err((FailureReason::ConcretizationFailed, e.to_string(), Some(pass)));
                        }
                    }
                };
                return Ok(Pass { summary: summary(a, n + 1), edges: at.edges, repaired });
            }
            Some((reason, msg)) => {
                let out_of_time = Instant::now() >= deadline;
                if first_failure.is_none() {
                    first_failure = Some((reason, msg, Pass { summary: summary(a, n + 1), edges: at.edges, repaired: None }));
                }
                if out_of_time || matches!(reason, FailureReason::Timeout | FailureReason::Unsupported) {
                    break;
                }
            }
        }
    }
    let (r, m, mut pass) = first_failure.expect("at least one aligned automaton");
    pass.summary.attempted = cands.len().min(cfg.max_attempts);
    Err((r, m, Some(pass)))
}

fn unified_diff(old: &str, new: &str) -> String {
    similar::TextDiff::from_lines(old, new).unified_diff().context_radius(3).header("student", "repaired").to_string()
}

/// Repairs `student` against `reference`. With `repair` off only checks
/// equivalence.
pub fn run(reference: &str, student: &str, cfg: &RepairConfig, repair: bool) -> RepairReport {
    let start = Instant::now();
    let deadline = start + cfg.timeout;
    let mut report = match run_inner(reference, student, cfg, deadline, repair) {
        Ok(r) | Err(r) => r,
    };
    report.elapsed = start.elapsed();
    report
}

pub fn repair_program(reference: &str, student: &str, cfg: &RepairConfig) -> RepairReport {
    run(reference, student, cfg, true)
}

pub fn verify_program(reference: &str, student: &str, cfg: &RepairConfig) -> RepairReport {
    run(reference, student, cfg, false)
}

fn run_inner(
    reference: &str,
    student: &str,
    cfg: &RepairConfig,
    deadline: Instant,
    repair: bool,
) -> Result<RepairReport, RepairReport> {
    let orig = load(reference, student).map_err(|(r, m)| RepairReport::failed(r, m))?;
    let approximate_reals = uses_floats(&orig.ast_s) || uses_floats(&orig.ast_r);
    let mut session = Session::start(cfg.solver.clone())
        .map_err(|e| RepairReport::failed(FailureReason::SmtIssue, e.to_string()))?;
    let solver = session.solver_name();
    let fail = |r: FailureReason, m: String, pass: Option<Pass>, passes: usize| {
        let mut rep = RepairReport::failed(r, m);
        rep.solver = solver.clone();
        rep.approximate_reals = approximate_reals;
        rep.passes = passes;
        if let Some(p) = pass {
            rep.alignment = Some(p.summary);
            rep.edges = p.edges;
        }
        rep
    };

    let mut first: Option<Pass> = None;
    let mut current = orig;
    let mut changed = false;
    for pass_no in 1..=cfg.max_passes.max(1) {
        // written-back code may branch more finely than the student did; the
        // pairing cap bounds repair effort, not the re-check of a result
        let later = RepairConfig { max_pairings: cfg.max_pairings.saturating_mul(LATER_PASS_CAP), ..cfg.clone() };
        let pass_cfg = if pass_no == 1 { cfg } else { &later };
        let pass = match run_pass(&current, &mut session, pass_cfg, deadline, repair) {
            Ok(p) => p,
            Err((r, m, p)) => {
                // a later pass failing means the written-back program is wrong
                let r = if first.is_some() && r == FailureReason::NoRepair { FailureReason::ConcretizationFailed } else { r };
                let p = first.take().or(p);
                return Err(fail(r, m, p, pass_no));
            }
        };
        let next = pass.repaired.clone();
        if first.is_none() {
            first = Some(Pass { summary: pass.summary.clone(), edges: pass.edges.clone(), repaired: None });
        }
        let Some(ast) = next else {
            let first = first.take().unwrap();
            let repaired_ast = current.ast_s.clone();
            let mut rep = RepairReport::failed(FailureReason::NoRepair, "");
            rep.status = if changed { Status::Repaired } else { Status::Verified };
            rep.reason = None;
            rep.message = None;
            rep.alignment = Some(first.summary);
            rep.edges = first.edges;
            rep.passes = pass_no;
            rep.solver = solver;
            rep.approximate_reals = approximate_reals;
            if changed {
                let student_ast = parse(student).expect("parsed before");
                let text = render(&repaired_ast);
                rep.diff = Some(unified_diff(&render(&student_ast), &text));
                let ted = tree_edit_distance(&student_ast, &repaired_ast);
                rep.ted = Some(ted);
                rep.rps = Some(ted as f64 / ast_size(&student_ast).max(1) as f64);
                rep.repaired_source = Some(text);
            } else {
                rep.ted = Some(0);
                rep.rps = Some(0.0);
            }
            rep.repaired_ast = Some(repaired_ast);
            return Ok(rep);
        };
        changed = true;
        let text = render(&ast);
        current = match load(reference, &text) {
            Ok(p) => p,
            Err((_, m)) => {
                return Err(fail(FailureReason::ConcretizationFailed, m, first.take(), pass_no));
            }
        };
    }
    Err(fail(
        FailureReason::ConcretizationFailed,
        format!("repair did not settle after {} passes", cfg.max_passes),
        first.take(),
        cfg.max_passes,
    ))
}

/// Dump of everything the alignment computes, for debugging.
#[derive(Clone, Debug, Serialize)]
pub struct AlignmentDump {
    pub nodes: Vec<(String, String)>,
    pub candidates: usize,
    /// Edge map of the first aligned automaton: (student edge, reference edge).
    pub edges: Vec<(Option<String>, Option<String>)>,
    pub preds: Vec<Vec<crate::align::VarPair>>,
    /// Per function and variable class: student names, reference names, matrix.
    pub global_matrices: Vec<crate::align::GlobalMatrix>,
}

pub fn alignment_dump(reference: &str, student: &str, cfg: &RepairConfig) -> Result<AlignmentDump, (FailureReason, String)> {
    let p = load(reference, student)?;
    let (total, cands) = alignments(&p, cfg)?;
    let a = cands.first().ok_or((FailureReason::StructuralMismatch, "no aligned automaton".to_string()))?;
    Ok(AlignmentDump {
        nodes: a.nodes.pairs.iter().map(|(s, r)| (p.cfa_s.node(*s).name(), p.cfa_r.node(*r).name())).collect(),
        candidates: total,
        edges: a
            .edges
            .iter()
            .map(|e| (e.student.map(|x| p.cfa_s.edge(x).name()), e.reference.map(|x| p.cfa_r.edge(x).name())))
            .collect(),
        preds: a.preds.iter().map(|x| x.pairs.clone()).collect(),
        global_matrices: crate::align::global_matrices(&p.cfa_s, &p.cfa_r, &a.edges),
    })
}

/// Counts per failure reason, in reason order.
pub fn reason_counts<'a>(reports: impl IntoIterator<Item = &'a RepairReport>) -> BTreeMap<FailureReason, usize> {
    let mut m = BTreeMap::new();
    for r in reports {
        if let Some(x) = r.reason {
            *m.entry(x).or_insert(0) += 1;
        }
    }
    m
}
