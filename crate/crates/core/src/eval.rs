// SPDX-License-Identifier: Apache-2.0

//! Batch repair over a corpus of reference/student pairs.
//!
//! A corpus is a directory with one sub-directory per case, each holding a
//! `manifest.json`:
//!
//! ```json
//! { "id": "sum_to_n", "topic": "simple-loops",
//!   "reference": "reference.mc", "student": "student.mc",
//!   "domain": { "kind": "ranges", "inputs": [ { "type": "int", "lo": -5, "hi": 60 } ] },
//!   "tags": [], "expected": "repaired" }
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lang::parse;
use crate::repair::{soundness_check, verify_program, Domain, FailureReason, RepairConfig, RepairReport, Soundness, Status};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: bad manifest: {source}")]
    Manifest { path: PathBuf, source: serde_json::Error },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub id: String,
    pub topic: String,
    pub reference: PathBuf,
    pub student: PathBuf,
    pub domain: Domain,
    #[serde(default)]
    pub tags: Vec<String>,
    /// `repaired`, `verified` or a failure reason; informational.
    #[serde(default)]
    pub expected: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub manifest: Manifest,
    pub reference: String,
    pub student: String,
}

fn read(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path).map_err(|source| EvalError::Io { path: path.to_path_buf(), source })
}

/// Loads every `*/manifest.json` under `dir`, ordered by case id.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusCase>, EvalError> {
    let entries = std::fs::read_dir(dir).map_err(|source| EvalError::Io { path: dir.to_path_buf(), source })?;
    let mut cases = Vec::new();
    for e in entries {
        let e = e.map_err(|source| EvalError::Io { path: dir.to_path_buf(), source })?;
        let base = e.path();
        let mpath = base.join("manifest.json");
        if !mpath.is_file() {
            continue;
        }
        let manifest: Manifest =
            serde_json::from_str(&read(&mpath)?).map_err(|source| EvalError::Manifest { path: mpath.clone(), source })?;
        let reference = read(&base.join(&manifest.reference))?;
        let student = read(&base.join(&manifest.student))?;
        cases.push(CorpusCase { manifest, reference, student });
    }
    cases.sort_by(|a, b| a.manifest.id.cmp(&b.manifest.id));
    Ok(cases)
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseResult {
    pub id: String,
    pub topic: String,
    pub tags: Vec<String>,
    /// The reference verified against itself.
    pub admitted: bool,
    pub report: RepairReport,
    /// Differential check of the repaired (or verified) program.
    pub soundness: Option<Soundness>,
    pub seconds: f64,
}

impl CaseResult {
    pub fn structurally_matched(&self) -> bool {
        !matches!(
            self.report.reason,
            Some(FailureReason::StructuralMismatch | FailureReason::Unsupported | FailureReason::CombinatoricsExceeded)
        )
    }

    /// Success that also passed the differential check.
    pub fn sound_success(&self) -> bool {
        self.report.succeeded() && self.soundness.as_ref().is_some_and(|s| s.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RpsSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub cases: usize,
    pub admitted: usize,
    /// Fraction of cases whose structure matched the reference.
    pub sm_rate: f64,
    /// Fraction of cases repaired or verified.
    pub repair_rate: f64,
    /// Repair rate among structurally matching cases.
    pub repair_rate_matched: f64,
    /// Successes whose differential check failed; must be zero.
    pub unsound: usize,
    pub mean_seconds: f64,
    /// Percentage of failures per reason.
    pub failure_reasons: Vec<(FailureReason, f64)>,
    pub rps: Option<RpsSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub aggregate: Aggregate,
    pub cases: Vec<CaseResult>,
}

pub fn run_case(case: &CorpusCase, cfg: &RepairConfig) -> CaseResult {
    let start = std::time::Instant::now();
    let m = &case.manifest;
    let admitted = verify_program(&case.reference, &case.reference, cfg).status == Status::Verified;
    let report = crate::repair::repair_program(&case.reference, &case.student, cfg);
    let soundness = match (&report.repaired_ast, parse(&case.reference)) {
        (Some(ast), Ok(reference)) if report.succeeded() => Some(soundness_check(&reference, ast, &m.domain)),
        _ => None,
    };
    CaseResult {
        id: m.id.clone(),
        topic: m.topic.clone(),
        tags: m.tags.clone(),
        admitted,
        report,
        soundness,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn aggregate(results: &[CaseResult]) -> Aggregate {
    let n = results.len();
    let matched: Vec<&CaseResult> = results.iter().filter(|r| r.structurally_matched()).collect();
    let ok = results.iter().filter(|r| r.report.succeeded()).count();
    let ok_matched = matched.iter().filter(|r| r.report.succeeded()).count();
    let failures: Vec<FailureReason> = results.iter().filter_map(|r| r.report.reason).collect();
    let counts = crate::repair::reason_counts(results.iter().map(|r| &r.report));
    let mut rps: Vec<f64> = results.iter().filter(|r| r.report.succeeded()).filter_map(|r| r.report.rps).collect();
    rps.sort_by(f64::total_cmp);
    let rps = (!rps.is_empty()).then(|| {
        let mid = rps.len() / 2;
        let median = if rps.len() % 2 == 1 { rps[mid] } else { (rps[mid - 1] + rps[mid]) / 2.0 };
        RpsSummary { min: rps[0], median, max: rps[rps.len() - 1] }
    });
    Aggregate {
        cases: n,
        admitted: results.iter().filter(|r| r.admitted).count(),
        sm_rate: ratio(matched.len(), n),
        repair_rate: ratio(ok, n),
        repair_rate_matched: ratio(ok_matched, matched.len()),
        unsound: results.iter().filter(|r| r.report.succeeded() && !r.sound_success()).count(),
        mean_seconds: if n == 0 { 0.0 } else { results.iter().map(|r| r.seconds).sum::<f64>() / n as f64 },
        failure_reasons: counts.into_iter().map(|(k, c)| (k, 100.0 * ratio(c, failures.len()))).collect(),
        rps,
    }
}

/// Runs every case with at most `jobs` workers; results are ordered by id.
pub fn run_corpus(cases: &[CorpusCase], cfg: &RepairConfig, jobs: usize) -> CorpusReport {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    let mut results: Vec<CaseResult> = pool.install(|| cases.par_iter().map(|c| run_case(c, cfg)).collect());
    results.sort_by(|a, b| a.id.cmp(&b.id));
    CorpusReport { aggregate: aggregate(&results), cases: results }
}

/// Plain-text table of per-case outcomes and the aggregate.
pub fn table(report: &CorpusReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<20} {:<24} {:<9} {:<22} {:>6} {:>8} {:>7}", "case", "topic", "status", "reason", "rps", "sound", "secs");
    for c in &report.cases {
        let status = match c.report.status {
            Status::Verified => "verified",
            Status::Repaired => "repaired",
            Status::Failed => "failed",
        };
        let reason = c.report.reason.map(|r| r.name()).unwrap_or("-");
        let rps = c.report.rps.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into());
        let sound = match &c.soundness {
            Some(s) if s.passed => "pass",
            Some(_) => "FAIL",
            None => "-",
        };
        let _ = writeln!(s, "{:<20} {:<24} {:<9} {:<22} {:>6} {:>8} {:>7.2}", c.id, c.topic, status, reason, rps, sound, c.seconds);
    }
    let a = &report.aggregate;
    let _ = writeln!(s);
    let _ = writeln!(s, "cases {}  admitted {}  unsound {}", a.cases, a.admitted, a.unsound);
    let _ = writeln!(
        s,
        "SM rate {:.1}%  repair rate {:.1}%  repair rate (matched) {:.1}%  mean {:.2}s",
        100.0 * a.sm_rate,
        100.0 * a.repair_rate,
        100.0 * a.repair_rate_matched,
        a.mean_seconds
    );
    for (r, p) in &a.failure_reasons {
        let _ = writeln!(s, "  {:<22} {:>5.1}%", r.name(), p);
    }
    if let Some(r) = &a.rps {
        let _ = writeln!(s, "RPS min {:.3}  median {:.3}  max {:.3}", r.min, r.median, r.max);
    }
    s
}
