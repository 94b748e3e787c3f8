// SPDX-License-Identifier: Apache-2.0

//! Alignment of a student automaton with a reference automaton: nodes from
//! the loop/function skeleton, edges per node pair and kind, and a bijection
//! between the two programs' variables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cfa::{Cfa, CfaEdge, EdgeId, EdgeKind, GuardRole, Lhs, NodeId, NodeKind, UpdateRhs};
use crate::lang::ast::{Ast, Expr, Label, Stmt, StmtKind};
use crate::lang::types::VarType;

/// Skeleton tree: function and loop entries only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkelTree {
    pub label: Label,
    pub children: Vec<SkelTree>,
}

impl SkelTree {
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(SkelTree::depth).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(SkelTree::size).sum::<usize>()
    }
}

/// One skeleton tree per function, in definition order.
pub fn ast_skeleton(ast: &Ast) -> Vec<SkelTree> {
    fn loops(stmts: &[Stmt]) -> Vec<SkelTree> {
        stmts.iter().flat_map(loops_in).collect()
    }
    fn loops_in(s: &Stmt) -> Vec<SkelTree> {
        match &s.kind {
            StmtKind::While { body, .. } | StmtKind::For { body, .. } => {
                vec![SkelTree { label: Label::LoopEntry, children: loops_in(body) }]
            }
            StmtKind::If { then_branch, else_branch, .. } => {
                let mut v = loops_in(then_branch);
                if let Some(e) = else_branch {
                    v.extend(loops_in(e));
                }
                v
            }
            StmtKind::Block(stmts) => loops(stmts),
            _ => Vec::new(),
        }
    }
    ast.functions.iter().map(|f| SkelTree { label: Label::FuncEntry, children: loops(&f.body) }).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
pub enum AlignError {
    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),
    #[error("{count} edge pairings at {node} exceed the cap of {cap}")]
    CombinatoricsExceeded { node: String, count: usize, cap: usize },
}

/// Student node to reference node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeAlignment {
    pub pairs: Vec<(NodeId, NodeId)>,
}

impl NodeAlignment {
    pub fn to_ref(&self, s: NodeId) -> Option<NodeId> {
        self.pairs.iter().find(|(a, _)| *a == s).map(|(_, b)| *b)
    }

    pub fn to_student(&self, r: NodeId) -> Option<NodeId> {
        self.pairs.iter().find(|(_, b)| *b == r).map(|(a, _)| *a)
    }

    pub fn inverse(&self) -> NodeAlignment {
        NodeAlignment { pairs: self.pairs.iter().map(|(a, b)| (*b, *a)).collect() }
    }
}

/// Aligns skeleton nodes position by position and adds the matching exits.
pub fn align_nodes(
    skel_s: &[SkelTree],
    skel_r: &[SkelTree],
    cfa_s: &Cfa,
    cfa_r: &Cfa,
) -> Result<NodeAlignment, AlignError> {
    if skel_s.len() != skel_r.len() {
        return Err(AlignError::StructuralMismatch(format!(
            "{} functions in the student program, {} in the reference",
            skel_s.len(),
            skel_r.len()
        )));
    }
    for (i, (a, b)) in skel_s.iter().zip(skel_r).enumerate() {
        if a != b {
            return Err(AlignError::StructuralMismatch(format!(
                "loop structure of function {} differs ({} vs {} loops)",
                cfa_r.functions.get(i).map(|f| f.name.as_str()).unwrap_or("?"),
                a.size() - 1,
                b.size() - 1
            )));
        }
    }
    let mut pairs = Vec::new();
    for fi in 0..skel_s.len() {
        // entries are created in skeleton preorder, so positions line up
        let entries = |c: &Cfa| -> Vec<NodeId> {
            c.function_nodes(fi)
                .filter(|n| matches!(n.kind, NodeKind::FuncEntry | NodeKind::LoopEntry))
                .map(|n| n.id)
                .collect()
        };
        for (s, r) in entries(cfa_s).into_iter().zip(entries(cfa_r)) {
            pairs.push((s, r));
            pairs.push((cfa_s.omega[&s], cfa_r.omega[&r]));
        }
    }
    pairs.sort();
    Ok(NodeAlignment { pairs })
}

/// One aligned edge. A missing side is an inserted empty edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedEdge {
    pub student: Option<EdgeId>,
    pub reference: Option<EdgeId>,
    /// (student, reference) source nodes.
    pub source: (NodeId, NodeId),
    pub target: (NodeId, NodeId),
    pub kind: EdgeKind,
}

impl AlignedEdge {
    /// `bb'` for a reference edge `b` and its student partner; `-x'` for a
    /// student edge without one.
    pub fn name(&self, cfa_s: &Cfa, cfa_r: &Cfa) -> String {
        match (self.reference, self.student) {
            (Some(r), _) => {
                let n = cfa_r.edge(r).name();
                format!("{n}{n}'")
            }
            (None, Some(s)) => format!("-{}'", cfa_s.edge(s).name()),
            (None, None) => "-".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    Ret,
    Cursor,
    Output,
    Param,
    Matched,
    /// Student variable minted for an unmatched reference variable.
    Fresh,
    /// Reference placeholder for an unmatched student variable; never equated.
    Dummy,
}

pub const RET: &str = "$ret";
pub const CUR: &str = "$cur";
pub const OUT: &str = "$out";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarPair {
    pub student: String,
    pub reference: String,
    /// `None` for the pinned pseudo variables.
    pub ty: Option<VarType>,
    pub kind: PairKind,
}

/// Variable bijection for one function pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pred {
    pub pairs: Vec<VarPair>,
}

impl Pred {
    pub fn student_of(&self, r: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.reference == r && p.kind != PairKind::Dummy).map(|p| p.student.as_str())
    }

    pub fn reference_of(&self, s: &str) -> Option<&str> {
        self.pairs.iter().find(|p| p.student == s && p.kind != PairKind::Dummy).map(|p| p.reference.as_str())
    }

    /// Student variables minted for the alignment, with their types.
    pub fn fresh(&self) -> impl Iterator<Item = (&str, VarType)> {
        self.pairs.iter().filter(|p| p.kind == PairKind::Fresh).map(|p| (p.student.as_str(), p.ty.unwrap()))
    }

    pub fn render(&self) -> String {
        self.pairs
            .iter()
            .filter(|p| p.kind != PairKind::Dummy)
            .map(|p| format!("{}<->{}", p.student.trim_start_matches('$'), p.reference.trim_start_matches('$')))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Rewrites a reference expression into student names.
pub fn rename_to_student(e: &Expr, pred: &Pred, funcs: &BTreeMap<String, String>) -> Expr {
    let renamed = e.rename(&|v| pred.student_of(v).map(str::to_string));
    rename_calls(&renamed, funcs)
}

fn rename_calls(e: &Expr, funcs: &BTreeMap<String, String>) -> Expr {
    let r = |x: &Expr| Box::new(rename_calls(x, funcs));
    match e {
        Expr::Call(n, args) => Expr::Call(
            funcs.get(n).cloned().unwrap_or_else(|| n.clone()),
            args.iter().map(|a| rename_calls(a, funcs)).collect(),
        ),
        Expr::Int(_) | Expr::Real(_) | Expr::Bool(_) | Expr::Var(_) => e.clone(),
        Expr::Index(a, i) => Expr::Index(a.clone(), r(i)),
        Expr::Unary(op, x) => Expr::Unary(*op, r(x)),
        Expr::Cast(t, x) => Expr::Cast(*t, r(x)),
        Expr::Binary(op, a, b) => Expr::Binary(*op, r(a), r(b)),
    }
}

/// A candidate product automaton.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignedAutomaton {
    pub nodes: NodeAlignment,
    pub edges: Vec<AlignedEdge>,
    /// One bijection per function pair, by function index.
    pub preds: Vec<Pred>,
    /// Whether student edges had to be paired with empty reference slots.
    pub student_surplus: bool,
}

impl AlignedAutomaton {
    /// Reference function name to student function name, by position.
    pub fn function_map(cfa_s: &Cfa, cfa_r: &Cfa) -> BTreeMap<String, String> {
        cfa_r.functions.iter().zip(&cfa_s.functions).map(|(r, s)| (r.name.clone(), s.name.clone())).collect()
    }
}

/// Pairing choices for one (node pair, kind) group.
#[derive(Clone, Debug)]
struct Group {
    source: (NodeId, NodeId),
    target: (NodeId, NodeId),
    kind: EdgeKind,
    student: Vec<EdgeId>,
    reference: Vec<EdgeId>,
}

impl Group {
    /// Number of injective pairings of the smaller side into the larger.
    fn count(&self) -> usize {
        let (n, m) = (self.student.len(), self.reference.len());
        let (small, large) = (n.min(m), n.max(m));
        (0..small).map(|i| large - i).product()
    }

    /// The `index`-th pairing in lexicographic order of chosen indices.
    fn pairing(&self, index: usize) -> Vec<AlignedEdge> {
        let (n, m) = (self.student.len(), self.reference.len());
        let small = n.min(m);
        let large = n.max(m);
        let choice = nth_injection(small, large, index);
        let mut out = Vec::new();
        let mut used = vec![false; large];
        for (i, &j) in choice.iter().enumerate() {
            used[j] = true;
            let (s, r) = if n <= m { (self.student[i], self.reference[j]) } else { (self.student[j], self.reference[i]) };
            out.push(self.edge(Some(s), Some(r)));
        }
        for (j, u) in used.iter().enumerate() {
            if !u {
                if n <= m {
                    out.push(self.edge(None, Some(self.reference[j])));
                } else {
                    out.push(self.edge(Some(self.student[j]), None));
                }
            }
        }
        out
    }

    fn edge(&self, s: Option<EdgeId>, r: Option<EdgeId>) -> AlignedEdge {
        AlignedEdge { student: s, reference: r, source: self.source, target: self.target, kind: self.kind }
    }
}

/// The `index`-th injective map {0..k} -> {0..n} in lexicographic order.
pub fn nth_injection(k: usize, n: usize, mut index: usize) -> Vec<usize> {
    let mut avail: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(k);
    for pos in 0..k {
        let rest: usize = (0..(k - pos - 1)).map(|i| avail.len() - 1 - i).product();
        let pick = index / rest;
        index %= rest;
        out.push(avail.remove(pick));
    }
    out
}

/// Lazily enumerated edge alignments, in lexicographic order of the
/// per-group pairing indices.
pub struct EdgeCandidates {
    groups: Vec<Group>,
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl EdgeCandidates {
    /// Total number of candidates (product over groups).
    pub fn total(&self) -> usize {
        self.counts.iter().fold(1usize, |a, c| a.saturating_mul(*c))
    }

    /// Per-group candidate counts with group descriptions.
    pub fn group_counts(&self) -> Vec<usize> {
        self.counts.clone()
    }
}

impl Iterator for EdgeCandidates {
    type Item = (Vec<AlignedEdge>, bool);

    fn next(&mut self) -> Option<Self::Item> {
        let idx = self.next.clone()?;
        let mut edges = Vec::new();
        let mut surplus = false;
        for (g, &i) in self.groups.iter().zip(&idx) {
            surplus |= g.student.len() > g.reference.len();
            edges.extend(g.pairing(i));
        }
        // advance the odometer, last group fastest
        let mut nxt = idx;
        let mut pos = nxt.len();
        loop {
            if pos == 0 {
                self.next = None;
                break;
            }
            pos -= 1;
            nxt[pos] += 1;
            if nxt[pos] < self.counts[pos] {
                self.next = Some(nxt);
                break;
            }
            nxt[pos] = 0;
        }
        edges.sort_by_key(|e| (e.reference.is_none(), e.reference, e.student));
        Some((edges, surplus))
    }
}

type GroupKey = ((NodeId, NodeId), (NodeId, NodeId), EdgeKind);

fn slot(
    groups: &mut BTreeMap<GroupKey, Group>,
    source: (NodeId, NodeId),
    target: (NodeId, NodeId),
    kind: EdgeKind,
) -> &mut Group {
    groups.entry((source, target, kind)).or_insert_with(|| Group {
        source,
        target,
        kind,
        student: Vec::new(),
        reference: Vec::new(),
    })
}

/// Groups edges by aligned node pair and kind; fails if any group has more
/// pairings than `cap`.
pub fn align_edges(cfa_s: &Cfa, cfa_r: &Cfa, v: &NodeAlignment, cap: usize) -> Result<EdgeCandidates, AlignError> {
    let mut groups: BTreeMap<GroupKey, Group> = BTreeMap::new();
    for e in &cfa_r.edges {
        let src = (v.to_student(e.source).expect("aligned node"), e.source);
        let dst = (v.to_student(e.target).expect("aligned node"), e.target);
        slot(&mut groups, src, dst, e.kind).reference.push(e.id);
    }
    for e in &cfa_s.edges {
        let src = (e.source, v.to_ref(e.source).expect("aligned node"));
        let dst = (e.target, v.to_ref(e.target).expect("aligned node"));
        slot(&mut groups, src, dst, e.kind).student.push(e.id);
    }
    let groups: Vec<Group> = groups.into_values().collect();
    for g in &groups {
        let c = g.count();
        if c > cap {
            return Err(AlignError::CombinatoricsExceeded {
                node: format!(
                    "{}{}",
                    cfa_r.node(g.source.1).name(),
                    cfa_s.node(g.source.0).name().replace('q', "q'")
                ),
                count: c,
                cap,
            });
        }
    }
    let counts: Vec<usize> = groups.iter().map(Group::count).collect();
    Ok(EdgeCandidates { next: Some(vec![0; groups.len()]), groups, counts })
}

/// Usage features of a variable on an edge label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    GuardOperand,
    Lhs,
    RhsOperand,
    ReadTarget,
    PrintArg,
    LoopCondOperand,
}

/// Feature multiset per variable on one edge.
pub type UsageVector = BTreeMap<String, BTreeMap<Feature, usize>>;

pub fn usage(edge: Option<&CfaEdge>) -> UsageVector {
    let mut u: UsageVector = BTreeMap::new();
    let Some(edge) = edge else { return u };
    let mut add = |v: &str, f: Feature| *u.entry(v.to_string()).or_default().entry(f).or_default() += 1;
    for ga in &edge.label {
        let f = match ga.guard_origin.map(|o| o.role) {
            Some(GuardRole::Loop) => Feature::LoopCondOperand,
            _ => Feature::GuardOperand,
        };
        ga.guard.visit_vars(&mut |v| add(v, f));
        for up in &ga.updates {
            match &up.lhs {
                Lhs::Var(x) => add(x, if up.rhs == UpdateRhs::Read { Feature::ReadTarget } else { Feature::Lhs }),
                Lhs::Elem(a, i) => {
                    add(a, if up.rhs == UpdateRhs::Read { Feature::ReadTarget } else { Feature::Lhs });
                    i.visit_vars(&mut |v| add(v, Feature::RhsOperand));
                }
                Lhs::Ret | Lhs::Out => {}
            }
            match &up.rhs {
                UpdateRhs::Expr(e) => e.visit_vars(&mut |v| add(v, Feature::RhsOperand)),
                UpdateRhs::Emit(e) => e.visit_vars(&mut |v| add(v, Feature::PrintArg)),
                UpdateRhs::Read | UpdateRhs::Keep => {}
            }
        }
    }
    u
}

/// Jaccard distance between feature multisets; 0 for two empty sets.
pub fn jaccard(a: Option<&BTreeMap<Feature, usize>>, b: Option<&BTreeMap<Feature, usize>>) -> f64 {
    let empty = BTreeMap::new();
    let (a, b) = (a.unwrap_or(&empty), b.unwrap_or(&empty));
    let keys: BTreeSet<&Feature> = a.keys().chain(b.keys()).collect();
    let (mut inter, mut union) = (0usize, 0usize);
    for k in keys {
        let (x, y) = (a.get(k).copied().unwrap_or(0), b.get(k).copied().unwrap_or(0));
        inter += x.min(y);
        union += x.max(y);
    }
    if union == 0 {
        0.0
    } else {
        1.0 - inter as f64 / union as f64
    }
}

/// Average distance matrix `M_g[i][j]` between student variables `xs` and
/// reference variables `ys` over the aligned edges.
pub fn global_matrix(xs: &[String], ys: &[String], per_edge: &[(UsageVector, UsageVector)]) -> Vec<Vec<f64>> {
    let mut m = vec![vec![0.0; ys.len()]; xs.len()];
    if per_edge.is_empty() {
        return m;
    }
    for (us, ur) in per_edge {
        for (i, x) in xs.iter().enumerate() {
            for (j, y) in ys.iter().enumerate() {
                m[i][j] += jaccard(us.get(x), ur.get(y));
            }
        }
    }
    let n = per_edge.len() as f64;
    for row in &mut m {
        for c in row {
            *c /= n;
        }
    }
    m
}

/// Minimum-cost perfect matching of a square matrix: exhaustive up to 8 rows,
/// greedy row minimum beyond. Ties go to the lexicographically first permutation.
pub fn min_bijection(m: &[Vec<f64>]) -> Vec<usize> {
    let n = m.len();
    if n <= 8 {
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            let c: f64 = p.iter().enumerate().map(|(i, &j)| m[i][j]).sum();
            if best.as_ref().is_none_or(|(b, _)| c < *b - 1e-12) {
                best = Some((c, p.to_vec()));
            }
        });
        best.map(|(_, p)| p).unwrap_or_default()
    } else {
        let mut used = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for row in m {
            let j = (0..n)
                .filter(|j| !used[*j])
                .min_by(|a, b| row[*a].partial_cmp(&row[*b]).unwrap().then(a.cmp(b)))
                .unwrap();
            used[j] = true;
            out.push(j);
        }
        out
    }
}

/// Calls `f` on every permutation in lexicographic order.
fn permutations(p: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        // rotate to keep lexicographic order
        p[k..=i].rotate_right(1);
        permutations(p, k + 1, f);
        p[k..=i].rotate_left(1);
    }
}

pub fn bijection_cost(m: &[Vec<f64>], p: &[usize]) -> f64 {
    p.iter().enumerate().map(|(i, &j)| m[i][j]).sum()
}

/// Distance matrix of one variable class of one function pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlobalMatrix {
    pub function: String,
    pub ty: VarType,
    pub student: Vec<String>,
    pub reference: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

/// Infers the variable bijection of every function pair.
pub fn variable_alignment(cfa_s: &Cfa, cfa_r: &Cfa, edges: &[AlignedEdge]) -> Vec<Pred> {
    alignment_with_matrices(cfa_s, cfa_r, edges).0
}

/// The global matrices `variable_alignment` minimises over.
pub fn global_matrices(cfa_s: &Cfa, cfa_r: &Cfa, edges: &[AlignedEdge]) -> Vec<GlobalMatrix> {
    alignment_with_matrices(cfa_s, cfa_r, edges).1
}

fn alignment_with_matrices(cfa_s: &Cfa, cfa_r: &Cfa, edges: &[AlignedEdge]) -> (Vec<Pred>, Vec<GlobalMatrix>) {
    let mut preds = Vec::new();
    let mut mats = Vec::new();
    for (fi, (fs, fr)) in cfa_s.functions.iter().zip(&cfa_r.functions).enumerate() {
        let mut pairs = vec![
            VarPair { student: RET.into(), reference: RET.into(), ty: None, kind: PairKind::Ret },
            VarPair { student: CUR.into(), reference: CUR.into(), ty: None, kind: PairKind::Cursor },
            VarPair { student: OUT.into(), reference: OUT.into(), ty: None, kind: PairKind::Output },
        ];
        for (ps, pr) in fs.params.iter().zip(&fr.params) {
            pairs.push(VarPair {
                student: ps.clone(),
                reference: pr.clone(),
                ty: fs.env.var_type(ps),
                kind: PairKind::Param,
            });
        }
        let per_edge: Vec<(UsageVector, UsageVector)> = edges
            .iter()
            .filter(|e| cfa_r.node(e.source.1).func == fi)
            .map(|e| (usage(e.student.map(|x| cfa_s.edge(x))), usage(e.reference.map(|x| cfa_r.edge(x)))))
            .collect();
        let locals = |env: &crate::lang::types::TypeEnv| -> Vec<(String, VarType)> {
            env.ordered().into_iter().filter(|(_, i)| !i.is_param).map(|(n, i)| (n.clone(), i.ty)).collect()
        };
        let (ls, lr) = (locals(&fs.env), locals(&fr.env));
        let classes: BTreeSet<VarType> = ls.iter().chain(&lr).map(|(_, t)| *t).collect();
        let mut taken: BTreeSet<String> = fs.env.vars.keys().cloned().collect();
        for ty in classes {
            let xs: Vec<String> = ls.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n.clone()).collect();
            let ys: Vec<String> = lr.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n.clone()).collect();
            let n = xs.len().max(ys.len());
            let mut xs_full: Vec<(String, PairKind)> = xs.iter().map(|x| (x.clone(), PairKind::Matched)).collect();
            // placeholders carry no usage; they are named after their partner below
            for k in xs.len()..n {
                xs_full.push((format!("$fresh{k}"), PairKind::Fresh));
            }
            let mut ys_full: Vec<(String, bool)> = ys.iter().map(|y| (y.clone(), false)).collect();
            for i in ys.len()..n {
                ys_full.push((format!("$dummy{i}"), true));
            }
            let xnames: Vec<String> = xs_full.iter().map(|(x, _)| x.clone()).collect();
            let ynames: Vec<String> = ys_full.iter().map(|(y, _)| y.clone()).collect();
            let m = global_matrix(&xnames, &ynames, &per_edge);
            let perm = min_bijection(&m);
            mats.push(GlobalMatrix {
                function: fs.name.clone(),
                ty,
                student: xnames.clone(),
                reference: ynames.clone(),
                matrix: m.clone(),
            });
            for (i, &j) in perm.iter().enumerate() {
                let kind = if ys_full[j].1 { PairKind::Dummy } else { xs_full[i].1 };
                let student = if xs_full[i].1 == PairKind::Fresh {
                    let y = &ynames[j];
                    let mut name = y.clone();
                    let mut k = 2;
                    while taken.contains(&name) {
                        name = format!("{y}_{k}");
                        k += 1;
                    }
                    taken.insert(name.clone());
                    name
                } else {
                    xnames[i].clone()
                };
                pairs.push(VarPair { student, reference: ynames[j].clone(), ty: Some(ty), kind });
            }
        }
        preds.push(Pred { pairs });
    }
    (preds, mats)
}

/// Checks that two automata can be paired function by function: equal
/// parameter lists and return types.
pub fn check_signatures(cfa_s: &Cfa, cfa_r: &Cfa) -> Result<(), AlignError> {
    for (fs, fr) in cfa_s.functions.iter().zip(&cfa_r.functions) {
        let sig = |f: &crate::cfa::CfaFunction| -> (crate::lang::ast::Type, Vec<Option<VarType>>) {
            (f.ret_ty, f.params.iter().map(|p| f.env.var_type(p)).collect())
        };
        if sig(fs) != sig(fr) {
            return Err(AlignError::StructuralMismatch(format!(
                "signature of `{}` differs from reference `{}`",
                fs.name, fr.name
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injections_are_lexicographic() {
        let all: Vec<Vec<usize>> = (0..6).map(|i| nth_injection(2, 3, i)).collect();
        assert_eq!(all, vec![vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 2], vec![2, 0], vec![2, 1]]);
    }

    #[test]
    fn jaccard_extremes() {
        let mut a = BTreeMap::new();
        a.insert(Feature::Lhs, 2);
        assert_eq!(jaccard(None, None), 0.0);
        assert_eq!(jaccard(Some(&a), Some(&a)), 0.0);
        assert_eq!(jaccard(Some(&a), None), 1.0);
        let mut b = BTreeMap::new();
        b.insert(Feature::Lhs, 1);
        assert!((jaccard(Some(&a), Some(&b)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_bijection_is_optimal() {
        let m = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]];
        assert_eq!(min_bijection(&m), vec![1, 0, 2]);
        let mut count = 0;
        permutations(&mut vec![0, 1, 2, 3], 0, &mut |_| count += 1);
        assert_eq!(count, 24);
    }
}
