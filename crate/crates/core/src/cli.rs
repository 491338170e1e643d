//! Command-line entry points.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::encoding::{encode_learning, translate_framework, EncodingOptions};
use crate::error::Error;
use crate::learner::{learn_with, LearnOptions, LearnOutcome, Mode, Status};
use crate::model::{AbaFramework, LearningProblem, DOM};
use crate::oracle::Oracle;
use crate::solver::{
    answer_sets, emit_aspcore2, ground, optimal_answer_sets, parse_aspcore2, AspBackend,
    ExternalSolver, Internal,
};
use crate::syntax::{parse_framework, parse_problem, print_framework};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "abalearn",
    version,
    about = "Learn flat ABA frameworks from positive and negative examples"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    B,
    Be,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::B => Mode::B,
            ModeArg::Be => Mode::BE,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StatsFormat {
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a framework for a problem file.
    Learn {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "b")]
        mode: ModeArg,
        /// `internal`, or `external:COMMAND` for a solver reading ASP-Core-2 on stdin.
        #[arg(long, default_value = "internal")]
        solver: String,
        /// Print the applied transformations on stderr.
        #[arg(long)]
        trace: bool,
        /// Print run statistics on stderr.
        #[arg(long, value_enum)]
        stats: Option<StatsFormat>,
        /// Re-check the result with the exhaustive semantics.
        #[arg(long)]
        verify: bool,
        /// Ground assumptions the exhaustive check may enumerate.
        #[arg(long, default_value_t = crate::oracle::DEFAULT_BOUND)]
        oracle_bound: usize,
        #[arg(long, default_value_t = LearnOptions::default().max_solver_calls)]
        max_solver_calls: usize,
    },
    /// Check whether a framework solves a problem.
    Verify {
        #[arg(long)]
        framework: PathBuf,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, default_value_t = crate::oracle::DEFAULT_BOUND)]
        oracle_bound: usize,
    },
    /// Print the stable extensions of a framework.
    Solve {
        #[arg(long)]
        framework: PathBuf,
        #[arg(long, default_value_t = 100)]
        limit: usize,
    },
    /// Print the ASP encoding of a learning problem.
    Encode {
        #[arg(long)]
        problem: PathBuf,
    },
    /// Run every problem of a directory and print a summary table.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        #[arg(long, default_value_t = 60)]
        timeout_secs: u64,
        #[arg(long, value_enum, default_value = "b")]
        mode: ModeArg,
        /// One JSON record per problem instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Solve an ASP-Core-2 program read from stdin.
    #[command(hide = true)]
    Asp {
        /// Print every answer set rather than the optimal ones.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = 1000)]
        limit: usize,
    },
}

/// Run statistics as printed by `learn --stats json`.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct RunStats {
    pub problem: String,
    pub mode: Mode,
    pub outcome: Status,
    pub intensional: bool,
    pub learned_rules: usize,
    pub new_assumptions: usize,
    pub solver_calls: usize,
    pub backtracks: usize,
    pub wall_ms: u128,
}

impl RunStats {
    pub fn new(problem: &str, out: &LearnOutcome) -> Self {
        RunStats {
            problem: problem.to_string(),
            mode: out.mode,
            outcome: out.status,
            intensional: out.intensional,
            learned_rules: out.learned_rules.len(),
            new_assumptions: out.new_assumptions.len(),
            solver_calls: out.stats.solver_calls,
            backtracks: out.stats.backtracks,
            wall_ms: out.stats.wall.as_millis(),
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::EmptyProblem
            | Error::Invalid(_)
            | Error::FlatnessViolation(_)
            | Error::RangeRestriction { .. }
            | Error::Io(_) => EXIT_INPUT,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    })
}

fn load_problem(path: &Path) -> Result<LearningProblem, Failure> {
    parse_problem(&read(path)?).map_err(|e| in_file(path, e))
}

fn load_framework(path: &Path) -> Result<AbaFramework, Failure> {
    parse_framework(&read(path)?).map_err(|e| in_file(path, e))
}

fn in_file(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn backend(spec: &str) -> Result<Box<dyn AspBackend>, Failure> {
    if spec == "internal" {
        return Ok(Box::new(Internal));
    }
    match spec.strip_prefix("external:") {
        Some(cmd) => Ok(Box::new(ExternalSolver::from_spec(cmd)?)),
        None => Err(Failure {
            code: EXIT_USAGE,
            message: format!("unknown solver `{spec}`; expected `internal` or `external:COMMAND`"),
        }),
    }
}

fn problem_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, stdin, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Entry point of the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(
        std::env::args_os(),
        &mut std::io::stdin().lock(),
        &mut stdout.lock(),
        &mut stderr.lock(),
    )
}

fn dispatch(
    command: Command,
    stdin: &mut dyn Read,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CmdResult {
    match command {
        Command::Learn {
            problem,
            mode,
            solver,
            trace,
            stats,
            verify,
            oracle_bound,
            max_solver_calls,
        } => {
            let p = load_problem(&problem)?;
            let backend = backend(&solver)?;
            let opts = LearnOptions {
                max_solver_calls,
                oracle: Oracle {
                    bound: oracle_bound,
                },
                ..LearnOptions::with_mode(mode.into())
            };
            let outcome = learn_with(&p, &opts, backend.as_ref())?;
            if trace {
                for e in &outcome.trace {
                    writeln!(err, "% {e}")?;
                }
            }
            if stats.is_some() {
                let s = RunStats::new(&problem_name(&problem), &outcome);
                writeln!(
                    err,
                    "{}",
                    serde_json::to_string(&s).expect("stats serialise")
                )?;
            }
            let Some(fw) = &outcome.framework else {
                writeln!(err, "% {}", outcome.status)?;
                return Ok(EXIT_FAILURE);
            };
            if verify {
                let failed = Oracle {
                    bound: oracle_bound,
                }
                .solution_report(fw, &p)?;
                if !failed.is_empty() {
                    for f in &failed {
                        writeln!(err, "% verification failed: {f}")?;
                    }
                    return Ok(EXIT_FAILURE);
                }
                writeln!(err, "% verified")?;
            }
            write!(out, "{}", print_framework(fw))?;
            if !outcome.intensional {
                writeln!(err, "% the solution is not intensional")?;
            }
            Ok(EXIT_OK)
        }
        Command::Verify {
            framework,
            problem,
            oracle_bound,
        } => {
            let fw = load_framework(&framework)?;
            let p = load_problem(&problem)?;
            let failed = Oracle {
                bound: oracle_bound,
            }
            .solution_report(&fw, &p)?;
            if failed.is_empty() {
                writeln!(out, "solution")?;
                Ok(EXIT_OK)
            } else {
                writeln!(out, "not a solution")?;
                for f in &failed {
                    writeln!(out, "  {f}")?;
                }
                Ok(EXIT_FAILURE)
            }
        }
        Command::Solve { framework, limit } => {
            let fw = load_framework(&framework)?;
            let g = ground(&translate_framework(&fw))?;
            let sets = answer_sets(&g, limit);
            for (i, s) in sets.iter().enumerate() {
                let visible: Vec<String> = s
                    .atoms
                    .iter()
                    .filter(|a| a.pred.as_ref() != DOM && !AbaFramework::is_bogus(a))
                    .map(|a| a.to_string())
                    .collect();
                writeln!(out, "Extension {}: {}", i + 1, visible.join(" "))?;
            }
            if sets.is_empty() {
                writeln!(out, "no stable extensions")?;
            }
            Ok(EXIT_OK)
        }
        Command::Encode { problem } => {
            let p = load_problem(&problem)?;
            let program = encode_learning(
                &p.background,
                &p.positives,
                &p.negatives,
                &p.learnables,
                &EncodingOptions::default(),
            )?;
            write!(out, "{}", emit_aspcore2(&program))?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            suite,
            timeout_secs,
            mode,
            json,
        } => bench(
            &suite,
            Duration::from_secs(timeout_secs),
            mode.into(),
            json,
            out,
        ),
        Command::Asp { all, limit } => {
            let mut text = String::new();
            stdin.read_to_string(&mut text)?;
            let g = ground(&parse_aspcore2(&text)?)?;
            let sets = if all {
                answer_sets(&g, limit)
            } else {
                optimal_answer_sets(&g, limit)
            };
            if sets.is_empty() {
                writeln!(out, "UNSATISFIABLE")?;
            }
            for s in &sets {
                let atoms: Vec<String> = s.atoms.iter().map(|a| a.to_string()).collect();
                writeln!(out, "{}", atoms.join(" "))?;
            }
            Ok(EXIT_OK)
        }
    }
}

/// One row of the benchmark table.
#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub problem: String,
    pub background: usize,
    pub positives: usize,
    pub negatives: usize,
    pub wall_ms: u128,
    pub outcome: String,
    pub intensional: bool,
}

fn bench(
    suite: &Path,
    timeout: Duration,
    mode: Mode,
    json: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let mut files: Vec<PathBuf> = fs::read_dir(suite)
        .map_err(|e| Failure {
            code: EXIT_INPUT,
            message: format!("{}: {e}", suite.display()),
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "aba"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for path in &files {
        let p = load_problem(path)?;
        let (tx, rx) = mpsc::channel();
        let job = p.clone();
        let start = Instant::now();
        thread::spawn(move || {
            let opts = LearnOptions {
                check_invariants: false,
                ..LearnOptions::with_mode(mode)
            };
            let _ = tx.send(learn_with(&job, &opts, &Internal));
        });
        let (outcome, intensional) = match rx.recv_timeout(timeout) {
            Ok(Ok(o)) => (o.status.to_string(), o.is_success() && o.intensional),
            Ok(Err(e)) => (format!("error: {e}"), false),
            Err(_) => ("timeout".to_string(), false),
        };
        rows.push(BenchRow {
            problem: problem_name(path),
            background: p.background.rules.len(),
            positives: p.positives.len(),
            negatives: p.negatives.len(),
            wall_ms: start.elapsed().as_millis(),
            outcome,
            intensional,
        });
    }
    if json {
        for r in &rows {
            writeln!(out, "{}", serde_json::to_string(r).expect("row serialises"))?;
        }
    } else {
        let width = rows
            .iter()
            .map(|r| r.problem.len())
            .max()
            .unwrap_or(7)
            .max(7);
        writeln!(
            out,
            "{:<width$}  {:>4}  {:>4}  {:>4}  {:>10}  outcome",
            "problem", "|BK|", "|E+|", "|E-|", "time (s)"
        )?;
        for r in &rows {
            let outcome = if r.outcome == "success" && !r.intensional {
                "success (non-intensional)".to_string()
            } else {
                r.outcome.clone()
            };
            writeln!(
                out,
                "{:<width$}  {:>4}  {:>4}  {:>4}  {:>10.3}  {}",
                r.problem,
                r.background,
                r.positives,
                r.negatives,
                r.wall_ms as f64 / 1000.0,
                outcome
            )?;
        }
    }
    let all_ok = rows.iter().all(|r| r.outcome == "success");
    Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
}
