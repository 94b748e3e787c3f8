// SPDX-License-Identifier: Apache-2.0

//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every check prints exactly one result line.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgefix::align::{align_edges, align_nodes, ast_skeleton, bijection_cost, global_matrices, variable_alignment, PairKind};
use edgefix::cfa::{build_cfa, exec_label, CfaState, EdgeKind, GuardedAction, Lhs, NodeId, Update, UpdateRhs};
use edgefix::eval::{load_corpus, run_corpus};
use edgefix::lang::ast::{BinOp, Expr, Type};
use edgefix::lang::interp::{Frame, Machine};
use edgefix::lang::pretty::render_expr;
use edgefix::lang::types::{TypeEnv, VarInfo, VarType};
use edgefix::lang::{parse, Value};
use edgefix::repair::sketch::{extend, repair_sketch};
use edgefix::repair::{
    alignments, load, prepare, propose, repair_edge, repair_program, soundness_check, verify_program, Domain,
    EdgeOutcome, EdgeProblem, FailureReason, InputRange, RepairConfig, Status,
};
use edgefix::solver::{validate_model, Session, Sexp, Verdict};
use edgefix::vcgen::{edge_vc, fixed_sketch, resolve_sketch, CounterExample, EdgeSpec};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn corpus_pair(id: &str) -> (String, String) {
    let d = corpus_dir().join(id);
    let read = |f: &str| std::fs::read_to_string(d.join(f)).unwrap_or_else(|e| panic!("{}: {e}", d.join(f).display()));
    (read("reference.mc"), read("student.mc"))
}

fn session(cfg: &RepairConfig) -> Result<Session, String> {
    Session::start(cfg.solver.clone()).map_err(|e| e.to_string())
}

/// The first aligned automaton of a pair, as a list of edge problems.
fn edge_problems(reference: &str, student: &str, cfg: &RepairConfig) -> Result<Vec<EdgeProblem>, String> {
    let p = load(reference, student).map_err(|(r, m)| format!("{r}: {m}"))?;
    let (_, cands) = alignments(&p, cfg).map_err(|(r, m)| format!("{r}: {m}"))?;
    let a = cands.first().ok_or("no aligned automaton")?;
    Ok(a.edges.iter().map(|e| EdgeProblem::new(&p, a, e)).collect())
}

// the student program of the motivating example after the expected repair
const PRIME_EXPECTED: &str = "int check_prime(int n)
{
    if (n == 1)
        return 0;
    int i = 2;
    while (i <= n - 1)
    {
        if (n % i != 0)
            i = i + 1;
        else
            return 0;
    }
    return 1;
}
";

fn motivating_example() -> Check {
    let (r, s) = corpus_pair("prime");
    let cfg = RepairConfig::default();
    let start = Instant::now();
    let rep = repair_program(&r, &s, &cfg);
    let secs = start.elapsed().as_secs_f64();
    ensure(rep.status == Status::Repaired, || format!("status {:?}: {:?}", rep.status, rep.message))?;
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    let edge = |n: &str| rep.edges.iter().find(|e| e.name == n).ok_or_else(|| format!("no edge {n}"));
    for (n, want) in [
        ("aa'", "[n == 1] ret = 0;"),
        ("bb'", "[n != 1] i = 2;"),
        ("dd'", "[i <= n - 1] skip i; [n % i != 0] i = i + 1;"),
    ] {
        let e = edge(n)?;
        ensure(matches!(e.outcome, EdgeOutcome::Repaired { .. }), || format!("{n} not repaired"))?;
        ensure(e.repaired_label.as_deref() == Some(want), || format!("{n} repaired to {:?}", e.repaired_label))?;
    }
    for n in ["cc'", "ee'", "ff'"] {
        ensure(edge(n)?.outcome == EdgeOutcome::Verified, || format!("{n} changed"))?;
    }
    // every edge of the result is proved equivalent to its expected counterpart
    let src = rep.repaired_source.clone().ok_or("no repaired source")?;
    let proof = verify_program(PRIME_EXPECTED, &src, &cfg);
    ensure(proof.status == Status::Verified, || format!("result differs from expected: {:?}", proof.message))?;
    ensure(proof.edges.iter().all(|e| e.outcome == EdgeOutcome::Verified), || "an edge failed".into())?;
    let domain = Domain::Ranges { inputs: vec![InputRange::Int { lo: -50, hi: 200 }] };
    let sound = soundness_check(&parse(&r).unwrap(), &parse(&src).unwrap(), &domain);
    ensure(sound.passed, || format!("divergence {:?}", sound.divergence))?;
    Ok(format!("{} edges proved, {secs:.2}s", proof.edges.len()))
}

fn cegis_trace() -> Check {
    let (r, s) = corpus_pair("prime");
    let cfg = RepairConfig { k: 8, ..RepairConfig::default() };
    let probs = edge_problems(&r, &s, &cfg)?;
    let prob = probs.iter().find(|p| p.name == "bb'").ok_or("no edge bb'")?;
    let mut session = session(&cfg)?;
    let deadline = Instant::now() + cfg.timeout;
    let own = prob.check(&mut session, &cfg, deadline).map_err(|o| format!("{o:?}"))?.ok_or("bb' verifies")?;

    let st = prob.student.as_deref().map(fixed_sketch);
    let rf = prob.reference.as_deref().map(fixed_sketch);
    let spec = EdgeSpec { student: st.as_deref(), reference: rf.as_deref(), from_entry: prob.from_entry, to_exit: prob.to_exit };
    let vc = edge_vc(&prob.ctx, &spec, "").map_err(|e| e.to_string())?;
    let mut q = vc.query();
    let pattern = [("s__n__0", 1), ("r__n__0", 1), ("s__i__0", 0), ("r__j__0", 0)];
    for (sym, v) in pattern {
        q.hard.push(Sexp::eq(Sexp::atom(sym), Sexp::int(v)));
    }
    let Ok(Verdict::Sat(m)) = session.check_sat(&q, cfg.query_budget) else {
        return Err("pattern is not a model of the edge formula".into());
    };
    ensure(validate_model(&q, &m).map_err(|e| e.to_string())?, || "substitution does not satisfy the formula".into())?;
    let ce = CounterExample::from_model(&vc, &m);
    for (sym, v) in pattern {
        ensure(ce.value(sym) == Some(Sexp::int(v)), || format!("{sym} = {:?}", ce.value(sym)))?;
    }
    ensure(own.value("s__i__0") == Some(Sexp::int(0)) && own.value("r__j__0") == Some(Sexp::int(0)), || {
        format!("engine counter-example {:?}", own.values)
    })?;

    let input = prob.input();
    let prep = prepare(&prob.ctx, &input);
    let (cost, cands) =
        propose(&prob.ctx, &input, &prep, &[ce], &[], &mut session, &cfg, deadline).map_err(|o| format!("{o:?}"))?;
    ensure(cands.len() >= 2, || format!("{} candidates after round 1", cands.len()))?;
    let guards: BTreeSet<String> =
        cands.iter().map(|a| render_expr(&resolve_sketch(&prep.sketch, a)[0].guard)).collect();
    ensure(guards.contains("false") && guards.contains("n != 1"), || format!("guards {guards:?}"))?;
    Ok(format!("{} candidates of cost {cost}, guards {:?}", cands.len(), guards))
}

fn soundness_suite() -> Check {
    let cases = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    let cfg = RepairConfig::default();
    let report = run_corpus(&cases, &cfg, 4);
    let topics: BTreeSet<&str> = cases.iter().map(|c| c.manifest.topic.as_str()).collect();
    ensure(cases.len() >= 20, || format!("{} cases", cases.len()))?;
    ensure(topics.len() >= 5, || format!("topics {topics:?}"))?;
    for c in &report.cases {
        if c.report.succeeded() {
            let s = c.soundness.as_ref().ok_or_else(|| format!("{}: no differential check", c.id))?;
            ensure(s.exhaustive, || format!("{}: domain not exhaustive", c.id))?;
            ensure(s.passed, || format!("{}: divergence {:?}", c.id, s.divergence))?;
        }
    }
    let expected: BTreeMap<&str, Option<&str>> =
        cases.iter().map(|c| (c.manifest.id.as_str(), c.manifest.expected.as_deref())).collect();
    let matched: Vec<_> = report.cases.iter().filter(|c| expected[c.id.as_str()] != Some("SM")).collect();
    let ok = matched.iter().filter(|c| c.report.succeeded()).count();
    let rate = ok as f64 / matched.len().max(1) as f64;
    ensure(rate >= 0.9, || format!("repair rate {:.1}% on matched cases", 100.0 * rate))?;
    Ok(format!(
        "{} cases, {} topics, 0 unsound, {ok}/{} matched repaired ({:.1}%)",
        cases.len(),
        topics.len(),
        matched.len(),
        100.0 * rate
    ))
}

// (reference, student); each differs from its reference on one edge
const SINGLE_EDGE: [(&str, &str); 10] = [
    ("int f(int x) { return x + 2; }", "int f(int x) { return x + 1; }"),
    ("void main() { int x; x = read(); print(x * 2); }", "void main() { int x; x = read(); print(x * 3); }"),
    (
        "int f(int x) { if (x > 0) return 1; return 0; }",
        "int f(int x) { if (x > 0) return 2; return 0; }",
    ),
    (
        "int f(int x) { int y = x - 1; return y * 3; }",
        "int f(int x) { int y = x + 1; return y * 2; }",
    ),
    (
        "int f(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i = i + 1; } return s; }",
        "int f(int n) { int s = 0; int i = 0; while (i < n) { s = s + 2 * i; i = i + 1; } return s; }",
    ),
    (
        "int f(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i = i + 1; } return s; }",
        "int f(int n) { int s = 0; int i = 0; while (i < n) { s = s + i; i = i + 2; } return s; }",
    ),
    ("float f(float c) { return c * 1.8 + 32.0; }", "float f(float c) { return c * 1.8 + 30.0; }"),
    ("int f(int x) { return x % 3; }", "int f(int x) { return x % 2; }"),
    ("int f(int x) { x = x + 1; return x; }", "int f(int x) { return x; }"),
    (
        "int f(int x) { if (x % 2 == 0) return x / 2; return 3 * x + 1; }",
        "int f(int x) { if (x % 2 == 0) return x / 2; return 3 * x - 1; }",
    ),
];

/// Smallest number of changed holes over every verifying hole assignment.
fn brute_force_minimum(prob: &EdgeProblem, session: &mut Session, cfg: &RepairConfig) -> Result<Option<usize>, String> {
    let input = prob.input();
    let prep = prepare(&prob.ctx, &input);
    let sizes: Vec<usize> = prep.holes.iter().map(|h| h.space.len()).collect();
    let total: usize = sizes.iter().product();
    let rf = prob.reference.as_deref().map(fixed_sketch);
    let mut best: Option<usize> = None;
    for mut k in 0..total {
        let mut a = BTreeMap::new();
        for (h, n) in prep.holes.iter().zip(&sizes) {
            a.insert(h.id, k % n);
            k /= n;
        }
        let changed = a.values().filter(|v| **v != 0).count();
        if best.is_some_and(|b| changed >= b) {
            continue;
        }
        let cand = fixed_sketch(&resolve_sketch(&prep.sketch, &a));
        let deadline = Instant::now() + cfg.query_budget;
        match edgefix::repair::check_edge(&prob.ctx, Some(&cand), rf.as_deref(), &input, session, cfg, deadline) {
            Ok(None) => best = Some(changed),
            Ok(Some(_)) => {}
            Err(o) => return Err(format!("{o:?}")),
        }
    }
    Ok(best)
}

fn edge_minimality() -> Check {
    let cfg = RepairConfig::default();
    let mut session = session(&cfg)?;
    let mut summary = Vec::new();
    for (i, (r, s)) in SINGLE_EDGE.iter().enumerate() {
        let probs = edge_problems(r, s, &cfg)?;
        let deadline = Instant::now() + cfg.timeout;
        let mut failing = Vec::new();
        for p in &probs {
            match p.check(&mut session, &cfg, deadline) {
                Ok(None) => {}
                Ok(Some(_)) => failing.push(p),
                Err(o) => return Err(format!("instance {i}: {o:?}")),
            }
        }
        ensure(failing.len() == 1, || format!("instance {i}: {} failing edges", failing.len()))?;
        let prob = failing[0];
        let holes = prepare(&prob.ctx, &prob.input()).holes.len();
        ensure(holes <= 3, || format!("instance {i}: {holes} holes"))?;
        let rep = repair_edge(&prob.ctx, &prob.input(), &mut session, &cfg, deadline);
        let EdgeOutcome::Repaired { changes } = &rep.outcome else {
            return Err(format!("instance {i}: {:?}", rep.outcome));
        };
        let min = brute_force_minimum(prob, &mut session, &cfg)?.ok_or_else(|| format!("instance {i}: no repair exists"))?;
        ensure(changes.len() == min && rep.cost == Some(min as u64), || {
            format!("instance {i}: engine changed {} holes, minimum is {min}", changes.len())
        })?;
        summary.push(min.to_string());
    }
    Ok(format!("10 instances, minimal changes [{}]", summary.join(",")))
}

const VARS: [&str; 3] = ["x", "y", "z"];

fn rand_term(rng: &mut ChaCha8Rng, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        return if rng.gen_bool(0.5) {
            Expr::var(*VARS.choose(rng).unwrap())
        } else {
            Expr::Int(rng.gen_range(-4..=4))
        };
    }
    let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul].choose(rng).unwrap();
    Expr::bin(op, rand_term(rng, depth - 1), rand_term(rng, depth - 1))
}

fn rand_guard(rng: &mut ChaCha8Rng) -> Expr {
    match rng.gen_range(0..6) {
        0 => Expr::Bool(true),
        1 => Expr::bin(BinOp::And, rand_guard(rng), rand_guard(rng)),
        _ => {
            let op = *[BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne].choose(rng).unwrap();
            Expr::bin(op, rand_term(rng, 1), rand_term(rng, 1))
        }
    }
}

fn rand_label(rng: &mut ChaCha8Rng, max_gas: usize) -> Vec<GuardedAction> {
    let n = rng.gen_range(0..=max_gas);
    (0..n)
        .map(|_| GuardedAction {
            guard: rand_guard(rng),
            branch: rng.gen_bool(0.5),
            guard_origin: None,
            updates: (0..rng.gen_range(0..=3))
                .map(|_| Update {
                    lhs: if rng.gen_bool(0.2) { Lhs::Ret } else { Lhs::Var(VARS.choose(rng).unwrap().to_string()) },
                    rhs: UpdateRhs::Expr(rand_term(rng, 2)),
                    origin: None,
                })
                .collect(),
        })
        .collect()
}

fn run_label(
    ast: &edgefix::lang::Ast,
    env: &TypeEnv,
    label: &[GuardedAction],
    store: &[i64; 4],
) -> (bool, BTreeMap<String, Value<f64>>, Value<f64>) {
    let mut m = Machine::<f64>::new(ast, Vec::new(), 1_000);
    let mut frame = Frame::new(env.clone());
    for (v, x) in VARS.iter().zip(store) {
        frame.set(v, Value::Int(*x)).unwrap();
    }
    let mut st = CfaState { frame, ret: Value::Int(store[3]) };
    let taken = exec_label(&mut m, &mut st, Type::Int, label).expect("no runtime errors without division");
    (taken, st.frame.vars.into_iter().collect(), st.ret)
}

fn sketch_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut env = TypeEnv::default();
    for (i, v) in VARS.iter().enumerate() {
        env.vars.insert(v.to_string(), VarInfo { ty: VarType::Int, is_param: false, order: i });
    }
    let ast = parse("int main() { return 0; }").unwrap();
    let mut holes = 0;
    for pair in 0..1000 {
        let student = {
            let mut l = rand_label(&mut rng, 3);
            if l.is_empty() {
                l.push(GuardedAction::unconditional());
            }
            l
        };
        let reference = rand_label(&mut rng, 3);
        let extended = extend(&student, &reference, false);
        let (sketch, hs) = repair_sketch(&extended, &student, &reference, &env, Type::Int);
        holes += hs.len();
        let originals: BTreeMap<usize, usize> = hs.iter().map(|h| (h.id, 0)).collect();
        ensure(resolve_sketch(&sketch, &originals) == extended, || format!("pair {pair}: originals do not recover the label"))?;
        for _ in 0..100 {
            let store = [rng.gen_range(-20..=20), rng.gen_range(-20..=20), rng.gen_range(-20..=20), rng.gen_range(-20..=20)];
            let a = run_label(&ast, &env, &student, &store);
            let b = run_label(&ast, &env, &extended, &store);
            ensure(a == b, || format!("pair {pair}: padded label differs on {store:?}"))?;
        }
    }
    Ok(format!("1000 pairs, {holes} holes, 100000 stores"))
}

fn rand_expr_src(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    let a = *vars.choose(rng).unwrap();
    match rng.gen_range(0..3) {
        0 => a.to_string(),
        1 => format!("{a} + {}", vars.choose(rng).unwrap()),
        _ => format!("{a} * {}", rng.gen_range(1..4)),
    }
}

/// A one-function program with `ifs` early returns before an optional loop
/// and `loop_ifs` early returns inside it.
fn rand_program(rng: &mut ChaCha8Rng, locals: &[&str], ifs: usize, with_loop: bool, loop_ifs: usize) -> String {
    let mut all = vec!["x"];
    all.extend_from_slice(locals);
    let mut s = String::from("int f(int x) {\n");
    for l in locals {
        s += &format!("  int {l} = {};\n", rng.gen_range(0..3));
    }
    for _ in 0..ifs {
        s += &format!("  if (x == {}) return {};\n", rng.gen_range(0..9), rand_expr_src(rng, &all));
    }
    for _ in 0..rng.gen_range(1..=2) {
        s += &format!("  {} = {};\n", locals.choose(rng).unwrap(), rand_expr_src(rng, &all));
    }
    if with_loop {
        let v = locals[0];
        s += &format!("  while ({v} < x) {{\n");
        for _ in 0..loop_ifs {
            s += &format!("    if ({} == {}) return {};\n", locals.choose(rng).unwrap(), rng.gen_range(0..9), rand_expr_src(rng, &all));
        }
        s += &format!("    {} = {};\n", locals.choose(rng).unwrap(), rand_expr_src(rng, &all));
        s += &format!("    {v} = {v} + 1;\n  }}\n");
    }
    s += &format!("  return {};\n}}\n", rand_expr_src(rng, &all));
    s
}

fn binomial(m: usize, n: usize) -> usize {
    (0..n).fold(1, |acc, i| acc * (m - i) / (i + 1))
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn alignment_properties() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut groups, mut perms) = (0, 0);
    for k in 0..200 {
        let with_loop = rng.gen_bool(0.5);
        let ls: Vec<&str> = ["a", "b", "c"][..rng.gen_range(1..=3)].to_vec();
        let lr: Vec<&str> = ["p", "q", "r"][..rng.gen_range(1..=3)].to_vec();
        let shape: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..=2));
        let src_s = rand_program(&mut rng, &ls, shape[0], with_loop, shape[1]);
        let src_r = rand_program(&mut rng, &lr, shape[2], with_loop, shape[3]);
        let (ast_s, ast_r) = (parse(&src_s).unwrap(), parse(&src_r).unwrap());
        let (cfa_s, cfa_r) = (build_cfa(&ast_s).unwrap(), build_cfa(&ast_r).unwrap());
        let nodes = align_nodes(&ast_skeleton(&ast_s), &ast_skeleton(&ast_r), &cfa_s, &cfa_r)
            .map_err(|e| format!("program {k}: {e}"))?;

        // count the edges of each aligned node pair and kind on both sides
        let mut sides: BTreeMap<(NodeId, NodeId, u8), (usize, usize)> = BTreeMap::new();
        let kind = |k: EdgeKind| k as u8;
        for e in &cfa_r.edges {
            sides.entry((e.source, e.target, kind(e.kind))).or_default().1 += 1;
        }
        for e in &cfa_s.edges {
            let (src, dst) = (nodes.to_ref(e.source).unwrap(), nodes.to_ref(e.target).unwrap());
            sides.entry((src, dst, kind(e.kind))).or_default().0 += 1;
        }
        let mut want: Vec<usize> = Vec::new();
        for (ns, nr) in sides.values() {
            let (m, n) = (*ns.max(nr), *ns.min(nr));
            ensure(m <= 3, || format!("program {k}: {m} parallel edges"))?;
            want.push(binomial(m, n) * factorial(n));
        }
        let cands = align_edges(&cfa_s, &cfa_r, &nodes, 1_000).map_err(|e| e.to_string())?;
        let mut got = cands.group_counts();
        let total = cands.total();
        want.sort();
        got.sort();
        ensure(got == want, || format!("program {k}: counts {got:?}, expected {want:?}"))?;
        let all: Vec<_> = cands.collect();
        let distinct: BTreeSet<String> = all.iter().map(|(e, _)| format!("{e:?}")).collect();
        ensure(all.len() == total && distinct.len() == total, || format!("program {k}: enumeration size"))?;
        groups += want.len();

        let edges = &all[0].0;
        let preds = variable_alignment(&cfa_s, &cfa_r, edges);
        for gm in global_matrices(&cfa_s, &cfa_r, edges) {
            let pairs: Vec<_> = preds[0]
                .pairs
                .iter()
                .filter(|p| p.ty == Some(gm.ty) && matches!(p.kind, PairKind::Matched | PairKind::Fresh | PairKind::Dummy))
                .collect();
            let perm: Vec<usize> = pairs
                .iter()
                .map(|p| gm.reference.iter().position(|y| *y == p.reference).unwrap_or(usize::MAX))
                .collect();
            let mut sorted = perm.clone();
            sorted.sort();
            ensure(sorted == (0..gm.matrix.len()).collect::<Vec<_>>(), || format!("program {k}: not a bijection"))?;
            let cost = bijection_cost(&gm.matrix, &perm);
            let mut p: Vec<usize> = (0..perm.len()).collect();
            for _ in 0..50 {
                p.shuffle(&mut rng);
                let c = bijection_cost(&gm.matrix, &p);
                ensure(cost <= c + 1e-9, || format!("program {k}: cost {cost} > random {c}"))?;
            }
            perms += 50;
        }
    }
    Ok(format!("200 programs, {groups} edge groups, {perms} random permutations"))
}

fn run_cli(dir: &Path, out: &str) -> Result<Vec<u8>, String> {
    let status = Command::new(env!("CARGO_BIN_EXE_edgefix"))
        .current_dir(dir)
        .args(["repair", "--ref", "reference.mc", "--student", "student.mc", "--json", out])
        .status()
        .map_err(|e| e.to_string())?;
    ensure(status.code().is_some_and(|c| c <= 1), || format!("exit status {status}"))?;
    let bytes = std::fs::read(dir.join(out)).map_err(|e| e.to_string())?;
    std::fs::remove_file(dir.join(out)).map_err(|e| e.to_string())?;
    Ok(bytes)
}

fn input_independence() -> Check {
    let mut runs = 0;
    for id in ["prime", "sum_to_n", "grade"] {
        let (r, s) = corpus_pair(id);
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let p = dir.path();
        std::fs::write(p.join("reference.mc"), &r).unwrap();
        std::fs::write(p.join("student.mc"), &s).unwrap();
        let base = run_cli(p, "report.json")?;
        std::fs::create_dir(p.join("tests")).unwrap();
        for (name, body) in [("tests/t1.in", "5\n"), ("tests/t1.out", "1\n"), ("tests/t2.in", "1\n"), ("input.txt", "7 8\n")] {
            std::fs::write(p.join(name), body).unwrap();
        }
        let added = run_cli(p, "report.json")?;
        std::fs::remove_file(p.join("tests/t1.out")).unwrap();
        std::fs::remove_file(p.join("input.txt")).unwrap();
        let fewer = run_cli(p, "report.json")?;
        std::fs::remove_dir_all(p.join("tests")).unwrap();
        let removed = run_cli(p, "report.json")?;
        runs += 4;
        ensure(base == added && base == fewer && base == removed, || format!("{id}: report bytes changed"))?;
    }
    Ok(format!("{runs} runs, identical reports"))
}

// no positive solution exists, but the solver cannot show that
const CUBES_REF: &str = "int f(int x, int y, int z)
{
    if (x > 0 && y > 0 && z > 0 && x * x * x + y * y * y == z * z * z)
        return 1;
    return 0;
}
";
const CUBES_STUDENT: &str = "int f(int x, int y, int z)
{
    return 0;
}
";

fn failure_taxonomy() -> Check {
    let cfg = RepairConfig::default();
    let cases = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    let sm: Vec<_> = cases.iter().filter(|c| c.manifest.expected.as_deref() == Some("SM")).collect();
    ensure(!sm.is_empty(), || "no structurally mismatched cases".into())?;
    for c in &sm {
        let rep = repair_program(&c.reference, &c.student, &cfg);
        ensure(rep.reason == Some(FailureReason::StructuralMismatch), || format!("{}: {:?}", c.manifest.id, rep.reason))?;
    }
    let start = Instant::now();
    let rep = repair_program(CUBES_REF, CUBES_STUDENT, &cfg);
    let secs = start.elapsed();
    ensure(matches!(rep.reason, Some(FailureReason::Timeout | FailureReason::SmtIssue)), || {
        format!("nonlinear guard gave {:?} {:?}", rep.status, rep.reason)
    })?;
    ensure(secs < Duration::from_secs(300), || format!("took {secs:?}"))?;
    Ok(format!("{} SM pairs, nonlinear guard: {} after {:.1}s", sm.len(), rep.reason.unwrap(), secs.as_secs_f64()))
}

fn main() {
    let checks: [(&str, fn() -> Check); 8] = [
        ("motivating example repair", motivating_example),
        ("counter-example trace", cegis_trace),
        ("corpus soundness", soundness_suite),
        ("edge minimality", edge_minimality),
        ("sketch properties", sketch_properties),
        ("alignment properties", alignment_properties),
        ("input independence", input_independence),
        ("failure taxonomy", failure_taxonomy),
    ];
    let results: Vec<Check> = std::thread::scope(|s| {
        let handles: Vec<_> = checks.iter().map(|(_, f)| s.spawn(f)).collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err("panicked".into()))).collect()
    });
    let mut failed = 0;
    for (i, ((name, _), r)) in checks.iter().zip(&results).enumerate() {
        match r {
            Ok(d) => println!("criterion {} {name}: pass ({d})", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({d})", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
