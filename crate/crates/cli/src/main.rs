// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use edgefix::eval::{load_corpus, run_corpus, table};
use edgefix::repair::{alignment_dump, repair_program, verify_program, RepairConfig, RepairReport};
use edgefix::solver::{Session, SolverConfig};

#[derive(Parser)]
#[command(name = "edgefix", about = "Verified repair of student programs against a reference", disable_version_flag = true)]
struct Cli {
    /// Print engine and solver versions.
    #[arg(long)]
    version: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Clone)]
struct Common {
    /// Solver binary (defaults to $EDGEFIX_SOLVER, then `z3`).
    #[arg(long)]
    solver: Option<String>,
    /// Global budget per program, in seconds.
    #[arg(long, default_value_t = 300)]
    timeout: u64,
    /// Budget per solver query, in seconds.
    #[arg(long, default_value_t = 10)]
    query_timeout: u64,
    /// Candidates per synthesis round.
    #[arg(long, default_value_t = 4)]
    k: usize,
    /// Edge pairings allowed per node pair.
    #[arg(long, default_value_t = 24)]
    max_pairings: usize,
    /// Synthesis rounds per edge.
    #[arg(long, default_value_t = 32)]
    max_rounds: usize,
    /// Write every solver query to this directory.
    #[arg(long)]
    dump_smt: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> RepairConfig {
        let mut solver = SolverConfig::default();
        if let Some(s) = &self.solver {
            solver.binary = s.clone();
        }
        solver.dump_dir = self.dump_smt.clone();
        RepairConfig {
            timeout: Duration::from_secs(self.timeout),
            query_budget: Duration::from_secs(self.query_timeout),
            k: self.k,
            max_pairings: self.max_pairings,
            max_rounds: self.max_rounds,
            solver,
            ..RepairConfig::default()
        }
    }
}

#[derive(Args)]
struct Pair {
    /// Reference program.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Student program.
    #[arg(long)]
    student: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Repair the student program; prints a unified diff on success.
    Repair {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        common: Common,
        /// Write the JSON report here (`-` for standard output) instead of the diff.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Check equivalence without repairing.
    Verify {
        #[command(flatten)]
        pair: Pair,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Dump node map, edge map, variable pairs and distance matrices as JSON.
    Align {
        #[command(flatten)]
        pair: Pair,
        #[arg(long, default_value_t = 24)]
        max_pairings: usize,
    },
    /// Repair every case of a corpus directory.
    RunCorpus {
        dir: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Worker threads.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
        /// Write the aggregate JSON report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print the control-flow automaton of a program.
    Cfa {
        file: PathBuf,
        /// Graphviz output.
        #[arg(long)]
        dot: bool,
    },
}

/// Failure that is the caller's fault: exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())).into())
}

fn write_out(target: &Path, text: &str) -> Result<()> {
    if target == Path::new("-") {
        println!("{text}");
        Ok(())
    } else {
        std::fs::write(target, format!("{text}\n")).with_context(|| format!("cannot write {}", target.display()))
    }
}

fn finish(report: &RepairReport, json: Option<&Path>, diff: bool) -> Result<ExitCode> {
    match json {
        Some(p) => write_out(p, &report.to_json())?,
        None if report.succeeded() => {
            if diff {
                if let Some(d) = &report.diff {
                    print!("{d}");
                }
            }
            eprintln!("{}", if report.repaired_source.is_some() { "repaired" } else { "verified" });
        }
        None => {}
    }
    if report.succeeded() {
        Ok(ExitCode::SUCCESS)
    } else {
        let reason = report.reason.map(|r| r.name()).unwrap_or("unknown");
        eprintln!("failed: {reason}: {}", report.message.as_deref().unwrap_or(""));
        Ok(ExitCode::from(1))
    }
}

fn versions(solver: &SolverConfig) -> String {
    let engine = format!("edgefix {}", env!("CARGO_PKG_VERSION"));
    match Session::start(solver.clone()) {
        Ok(s) => format!("{engine}\nsolver {}", s.solver_name()),
        Err(e) => format!("{engine}\nsolver unavailable: {e}"),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if cli.version {
        println!("{}", versions(&SolverConfig::default()));
        return Ok(ExitCode::SUCCESS);
    }
    let Some(command) = cli.command else {
        return Err(Usage("no command given; see --help".into()).into());
    };
    match command {
        Command::Repair { pair, common, json } => {
            let (r, s) = (read(&pair.reference)?, read(&pair.student)?);
            let report = repair_program(&r, &s, &common.config());
            finish(&report, json.as_deref(), true)
        }
        Command::Verify { pair, common, json } => {
            let (r, s) = (read(&pair.reference)?, read(&pair.student)?);
            let report = verify_program(&r, &s, &common.config());
            finish(&report, json.as_deref(), false)
        }
        Command::Align { pair, max_pairings } => {
            let (r, s) = (read(&pair.reference)?, read(&pair.student)?);
            let cfg = RepairConfig { max_pairings, ..RepairConfig::default() };
            match alignment_dump(&r, &s, &cfg) {
                Ok(d) => {
                    println!("{}", serde_json::to_string_pretty(&d)?);
                    Ok(ExitCode::SUCCESS)
                }
                Err((reason, msg)) => {
                    eprintln!("failed: {reason}: {msg}");
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::RunCorpus { dir, common, jobs, json } => {
            let cases = load_corpus(&dir).map_err(|e| Usage(e.to_string()))?;
            let report = run_corpus(&cases, &common.config(), jobs);
            print!("{}", table(&report));
            if let Some(p) = json {
                write_out(&p, &serde_json::to_string_pretty(&report)?)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Cfa { file, dot } => {
            let ast = edgefix::lang::parse(&read(&file)?).map_err(|e| Usage(e.to_string()))?;
            let cfa = edgefix::cfa::build_cfa(&ast).map_err(|e| Usage(e.to_string()))?;
            print!("{}", if dot { cfa.to_dot() } else { cfa.dump() });
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
