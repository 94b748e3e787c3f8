// SPDX-License-Identifier: Apache-2.0

//! External SMT solver sessions speaking SMT-LIB 2 over a pipe.

pub mod eval;
pub mod sexp;

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use eval::{EvalError, Evaluator, SVal};
pub use sexp::Sexp;

/// Environment variable naming the solver binary.
pub const SOLVER_ENV: &str = "EDGEFIX_SOLVER";

/// Definitions shared by every query: the output value datatype and C-style
/// division. Division by zero is given the value 0 so that terms stay total;
/// separate side conditions rule such states out.
pub const PRELUDE: &str = "\
(declare-datatypes ((Val 0)) (((IV (iv Int)) (RV (rv Real)))))
(define-fun tdiv ((a Int) (b Int)) Int
  (ite (= b 0) 0
    (let ((q (div (ite (>= a 0) a (- a)) (ite (>= b 0) b (- b)))))
      (ite (= (>= a 0) (> b 0)) q (- q)))))
(define-fun tmod ((a Int) (b Int)) Int (- a (* b (tdiv a b))))
(define-fun rdiv ((a Real) (b Real)) Real (ite (= b 0.0) 0.0 (/ a b)))
(define-fun ftrunc ((x Real)) Int (ite (>= x 0.0) (to_int x) (- (to_int (- x)))))
";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub binary: String,
    pub args: Vec<String>,
    pub seed: u32,
    /// Write every query as a standalone script into this directory.
    pub dump_dir: Option<PathBuf>,
    /// Use cost-bounded `check-sat` instead of `assert-soft`.
    pub force_fallback: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            binary: std::env::var(SOLVER_ENV).unwrap_or_else(|_| "z3".to_string()),
            args: vec!["-in".to_string()],
            seed: 0,
            dump_dir: None,
            force_fallback: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("cannot start solver `{binary}`: {message}")]
    Spawn { binary: String, message: String },
    #[error("solver process died: {0}")]
    Crash(String),
    #[error("solver rejected a command: {0}")]
    Protocol(String),
}

/// A model as returned by `get-value` plus the full `get-model` listing.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub values: Vec<(Sexp, Sexp)>,
    pub definitions: Sexp,
}

impl Model {
    pub fn value(&self, term: &Sexp) -> Option<&Sexp> {
        self.values.iter().find(|(t, _)| t == term).map(|(_, v)| v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Sat(Model),
    Unsat,
    Unknown(String),
    Timeout,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
            Verdict::Timeout => "timeout",
        }
    }
}

/// One satisfiability or optimisation problem.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Query {
    /// `declare-const`/`declare-fun` commands.
    pub decls: Vec<Sexp>,
    pub hard: Vec<Sexp>,
    /// Soft constraints with positive weights.
    pub soft: Vec<(Sexp, u32)>,
    /// Terms whose model values are wanted.
    pub wanted: Vec<Sexp>,
}

impl Query {
    /// Standalone SMT-LIB 2 script.
    pub fn script(&self, seed: u32) -> String {
        let mut s = String::new();
        s.push_str("(set-option :produce-models true)\n");
        s.push_str(&format!("(set-option :random-seed {seed})\n"));
        s.push_str(PRELUDE);
        for d in &self.decls {
            s.push_str(&format!("{d}\n"));
        }
        for h in &self.hard {
            s.push_str(&format!("(assert {h})\n"));
        }
        for (f, w) in &self.soft {
            s.push_str(&format!("(assert-soft {f} :weight {w})\n"));
        }
        s.push_str("(check-sat)\n(get-model)\n");
        s
    }
}

pub struct Session {
    cfg: SolverConfig,
    child: Option<Child>,
    stdin: Option<ChildStdin>,
    rx: Option<Receiver<String>>,
    depth: usize,
    soft_supported: bool,
    version: String,
    dumped: usize,
    /// Prefix for dumped script names.
    pub dump_label: String,
}

const GRACE: Duration = Duration::from_secs(3);

impl Session {
    pub fn start(cfg: SolverConfig) -> Result<Session, SolverError> {
        let mut s = Session {
            cfg,
            child: None,
            stdin: None,
            rx: None,
            depth: 0,
            soft_supported: false,
            version: String::new(),
            dumped: 0,
            dump_label: "query".into(),
        };
        s.spawn()?;
        Ok(s)
    }

    fn spawn(&mut self) -> Result<(), SolverError> {
        let mut child = Command::new(&self.cfg.binary)
            .args(&self.cfg.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Spawn { binary: self.cfg.binary.clone(), message: e.to_string() })?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.stdin = child.stdin.take();
        self.child = Some(child);
        self.rx = Some(rx);
        self.depth = 0;
        let t = Duration::from_secs(10);
        self.raw("(set-option :print-success true)", t)?;
        self.command("(set-option :produce-models true)", t)?;
        self.command(&format!("(set-option :random-seed {})", self.cfg.seed), t)?;
        for cmd in sexp::parse_all(PRELUDE).expect("prelude parses") {
            self.command(&cmd.to_string(), t)?;
        }
        let v = self.raw("(get-info :version)", t)?;
        self.version = v
            .as_list()
            .and_then(|l| l.get(1))
            .and_then(Sexp::as_atom)
            .map(|a| a.trim_matches('"').to_string())
            .unwrap_or_default();
        self.soft_supported = !self.cfg.force_fallback && {
            self.command("(push 1)", t)?;
            let ok = self.raw("(assert-soft true :weight 1)", t)?.is_success();
            self.command("(pop 1)", t)?;
            ok
        };
        Ok(())
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn solver_name(&self) -> String {
        format!("{} {}", self.cfg.binary, self.version)
    }

    pub fn supports_soft(&self) -> bool {
        self.soft_supported
    }

    /// Current push depth; zero between operations.
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn kill(&mut self) {
        if let Some(mut c) = self.child.take() {
            let _ = c.kill();
            let _ = c.wait();
        }
        self.stdin = None;
        self.rx = None;
        self.depth = 0;
    }

    fn restart(&mut self) -> Result<(), SolverError> {
        self.kill();
        self.spawn()
    }

    /// Sends one command and reads exactly one response.
    fn raw(&mut self, cmd: &str, wait: Duration) -> Result<Sexp, SolverError> {
        if self.child.is_none() {
            self.spawn()?;
        }
        let stdin = self.stdin.as_mut().ok_or_else(|| SolverError::Crash("no stdin".into()))?;
        if writeln!(stdin, "{cmd}").and_then(|_| stdin.flush()).is_err() {
            self.kill();
            return Err(SolverError::Crash("broken pipe".into()));
        }
        let deadline = Instant::now() + wait;
        let mut buf = String::new();
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            let rx = self.rx.as_ref().unwrap();
            match rx.recv_timeout(left) {
                Ok(line) => {
                    buf.push_str(&line);
                    buf.push('\n');
                    if sexp::is_complete(&buf) {
                        break;
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.kill();
                    return Err(SolverError::Crash("timed out waiting for a response".into()));
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.kill();
                    return Err(SolverError::Crash("solver exited".into()));
                }
            }
        }
        sexp::parse(buf.trim()).map_err(|e| SolverError::Protocol(format!("{e}: {buf}")))
    }

    fn command(&mut self, cmd: &str, wait: Duration) -> Result<(), SolverError> {
        let r = self.raw(cmd, wait)?;
        if r.is_success() {
            Ok(())
        } else {
            Err(SolverError::Protocol(format!("{cmd} -> {r}")))
        }
    }

    fn dump(&mut self, q: &Query) {
        if let Some(dir) = &self.cfg.dump_dir {
            self.dumped += 1;
            let path = dir.join(format!("{}-{:04}.smt2", self.dump_label, self.dumped));
            let _ = std::fs::create_dir_all(dir);
            if let Err(e) = std::fs::write(&path, q.script(self.cfg.seed)) {
                log::warn!("cannot write {}: {e}", path.display());
            }
        }
    }

    /// Runs `body` inside one push/pop frame, restarting the process if the
    /// solver stops answering.
    fn framed<T>(
        &mut self,
        budget: Duration,
        body: impl FnOnce(&mut Session, Instant) -> Result<T, SolverError>,
    ) -> Result<Option<T>, SolverError> {
        let deadline = Instant::now() + budget;
        let short = Duration::from_secs(10);
        self.command("(push 1)", short)?;
        self.depth += 1;
        let out = body(self, deadline);
        match out {
            Ok(v) => {
                self.command("(pop 1)", short)?;
                self.depth -= 1;
                Ok(Some(v))
            }
            Err(SolverError::Crash(msg)) if Instant::now() >= deadline => {
                log::debug!("solver unresponsive past deadline ({msg}); restarting");
                self.restart()?;
                Ok(None)
            }
            Err(e) => {
                // leave the session in a known state
                let _ = self.restart();
                Err(e)
            }
        }
    }

    fn declare_and_assert(&mut self, q: &Query) -> Result<(), SolverError> {
        let t = Duration::from_secs(10);
        for d in &q.decls {
            self.command(&d.to_string(), t)?;
        }
        for h in &q.hard {
            self.command(&format!("(assert {h})"), t)?;
        }
        Ok(())
    }

    fn check(&mut self, deadline: Instant) -> Result<Verdict, SolverError> {
        let left = deadline.saturating_duration_since(Instant::now());
        if left.is_zero() {
            return Ok(Verdict::Timeout);
        }
        let ms = left.as_millis().max(1);
        self.command(&format!("(set-option :timeout {ms})"), Duration::from_secs(10))?;
        let r = self.raw("(check-sat)", left + GRACE)?;
        Ok(match r.as_atom() {
            Some("sat") => Verdict::Sat(Model { values: Vec::new(), definitions: Sexp::List(Vec::new()) }),
            Some("unsat") => Verdict::Unsat,
            Some("unknown") => {
                let reason = self.raw("(get-info :reason-unknown)", Duration::from_secs(10))?;
                let reason = reason.to_string();
                if reason.contains("timeout") || reason.contains("canceled") || Instant::now() >= deadline {
                    Verdict::Timeout
                } else {
                    Verdict::Unknown(reason)
                }
            }
            _ => return Err(SolverError::Protocol(format!("check-sat -> {r}"))),
        })
    }

    fn fetch_model(&mut self, wanted: &[Sexp]) -> Result<Model, SolverError> {
        let t = Duration::from_secs(30);
        let definitions = self.raw("(get-model)", t)?;
        let mut values = Vec::new();
        if !wanted.is_empty() {
            let terms = Sexp::List(wanted.to_vec());
            let r = self.raw(&format!("(get-value {terms})"), t)?;
            let pairs = r.as_list().ok_or_else(|| SolverError::Protocol(format!("get-value -> {r}")))?;
            for p in pairs {
                match p.as_list() {
                    Some([t, v]) => values.push((t.clone(), v.clone())),
                    _ => return Err(SolverError::Protocol(format!("get-value -> {r}"))),
                }
            }
        }
        Ok(Model { values, definitions })
    }

    /// Checks the hard constraints of `q`; soft constraints are ignored.
    pub fn check_sat(&mut self, q: &Query, budget: Duration) -> Result<Verdict, SolverError> {
        if budget.is_zero() {
            return Ok(Verdict::Timeout);
        }
        let plain = Query { soft: Vec::new(), ..q.clone() };
        self.dump(&plain);
        let r = self.framed(budget, |s, deadline| {
            s.declare_and_assert(&plain)?;
            match s.check(deadline)? {
                Verdict::Sat(_) => Ok(Verdict::Sat(s.fetch_model(&plain.wanted)?)),
                v => Ok(v),
            }
        })?;
        Ok(r.unwrap_or(Verdict::Timeout))
    }

    /// Up to `k` models of minimal soft cost. Later models are found by
    /// blocking the values of `block_terms` in earlier ones and are kept only
    /// while the cost stays minimal.
    pub fn optimize(
        &mut self,
        q: &Query,
        block_terms: &[Sexp],
        k: usize,
        budget: Duration,
    ) -> Result<OptResult, SolverError> {
        if budget.is_zero() {
            return Ok(OptResult::Timeout);
        }
        self.dump(q);
        let mut wanted = q.wanted.clone();
        for t in block_terms {
            if !wanted.contains(t) {
                wanted.push(t.clone());
            }
        }
        let softs: Vec<Sexp> = q.soft.iter().map(|(f, _)| f.clone()).collect();
        for f in &softs {
            if !wanted.contains(f) {
                wanted.push(f.clone());
            }
        }
        let use_soft = self.soft_supported;
        let r = self.framed(budget, |s, deadline| {
            s.declare_and_assert(q)?;
            let t = Duration::from_secs(10);
            if use_soft {
                for (f, w) in &q.soft {
                    s.command(&format!("(assert-soft {f} :weight {w})"), t)?;
                }
            }
            let cost_of = |m: &Model| -> u64 {
                q.soft
                    .iter()
                    .filter(|(f, _)| !m.value(f).is_some_and(Sexp::is_true))
                    .map(|(_, w)| u64::from(*w))
                    .sum()
            };
            let mut models: Vec<Model> = Vec::new();
            let mut best: Option<u64> = None;
            let total: u64 = q.soft.iter().map(|(_, w)| u64::from(*w)).sum();
            // with the fallback the bound is searched upward from zero
            let mut bound = 0u64;
            while models.len() < k {
                if !use_soft {
                    let b = best.unwrap_or(bound);
                    s.command("(push 1)", t)?;
                    s.depth += 1;
                    let cost_term = Sexp::app(
                        "+",
                        std::iter::once(Sexp::int(0))
                            .chain(q.soft.iter().map(|(f, w)| Sexp::ite(f.clone(), Sexp::int(0), Sexp::int(i64::from(*w)))))
                            .collect(),
                    );
                    s.command(&format!("(assert (<= {cost_term} {b}))"), t)?;
                }
                let v = s.check(deadline)?;
                let outcome = match v {
                    Verdict::Sat(_) => {
                        let m = s.fetch_model(&wanted)?;
                        Some(Ok(m))
                    }
                    other => Some(Err(other)),
                };
                if !use_soft {
                    s.command("(pop 1)", t)?;
                    s.depth -= 1;
                }
                match outcome {
                    Some(Ok(m)) => {
                        let c = cost_of(&m);
                        if let Some(b) = best {
                            if c > b {
                                break;
                            }
                        }
                        best.get_or_insert(c);
                        let block: Vec<Sexp> = block_terms
                            .iter()
                            .filter_map(|t| m.value(t).map(|v| Sexp::eq(t.clone(), v.clone())))
                            .collect();
                        models.push(m);
                        if block.is_empty() {
                            break;
                        }
                        s.command(&format!("(assert {})", Sexp::not(Sexp::and(block))), t)?;
                    }
                    Some(Err(Verdict::Unsat)) => {
                        if !use_soft && best.is_none() && bound < total {
                            bound += 1;
                            continue;
                        }
                        if models.is_empty() {
                            return Ok(OptResult::Unsat);
                        }
                        break;
                    }
                    Some(Err(Verdict::Timeout)) => {
                        if models.is_empty() {
                            return Ok(OptResult::Timeout);
                        }
                        break;
                    }
                    Some(Err(Verdict::Unknown(r))) => {
                        if models.is_empty() {
                            return Ok(OptResult::Unknown(r));
                        }
                        break;
                    }
                    Some(Err(Verdict::Sat(_))) | None => unreachable!(),
                }
            }
            Ok(OptResult::Models { cost: best.unwrap_or(0), models })
        })?;
        Ok(r.unwrap_or(OptResult::Timeout))
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        if let Some(stdin) = self.stdin.as_mut() {
            let _ = writeln!(stdin, "(exit)");
        }
        self.kill();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OptResult {
    Models { cost: u64, models: Vec<Model> },
    Unsat,
    Unknown(String),
    Timeout,
}

trait Success {
    fn is_success(&self) -> bool;
}

impl Success for Sexp {
    fn is_success(&self) -> bool {
        matches!(self, Sexp::Atom(a) if a == "success")
    }
}

/// Checks that every hard constraint of `q` holds in `m` under the in-repo
/// evaluator. `Err` means the evaluator could not decide.
pub fn validate_model(q: &Query, m: &Model) -> Result<bool, EvalError> {
    let mut ev: Evaluator<crate::Rational> = Evaluator::new();
    ev.load(&sexp::parse_all(PRELUDE).expect("prelude parses"));
    ev.load(&q.decls);
    ev.load(std::slice::from_ref(&m.definitions));
    for h in &q.hard {
        if !ev.eval_bool(h)? {
            return Ok(false);
        }
    }
    Ok(true)
}
