use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Stdio};

use super::{emit_aspcore2, AnswerSet, AspBackend, AspProgram};
use crate::error::{Error, Result};
use crate::model::{Atom, Substitution};
use crate::syntax::parse_ground_atoms;

/// Runs an executable that reads ASP-Core-2 on stdin and prints answer sets
/// on stdout, either one atom list per line or clingo style after `Answer:`.
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    pub program: PathBuf,
    pub args: Vec<String>,
}

/// What an external solver reported.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SolverOutput {
    pub unsatisfiable: bool,
    pub models: Vec<Vec<Atom>>,
}

impl ExternalSolver {
    /// `spec` is a command line: the executable followed by its arguments.
    pub fn from_spec(spec: &str) -> Result<Self> {
        let mut parts = spec.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::ExternalSolver("empty solver command".into()))?;
        Ok(ExternalSolver {
            program: PathBuf::from(program),
            args: parts.map(str::to_string).collect(),
        })
    }

    pub fn run(&self, text: &str) -> Result<SolverOutput> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::ExternalSolver(format!("{}: {e}", self.program.display())))?;
        {
            let mut stdin = child.stdin.take().expect("piped stdin");
            stdin.write_all(text.as_bytes())?;
        }
        let out = child.wait_with_output()?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        let parsed = parse_solver_output(&stdout);
        if !parsed.unsatisfiable && parsed.models.is_empty() {
            return Err(Error::ExternalSolver(format!(
                "no answer set or UNSATISFIABLE in output (exit status {}): {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(parsed)
    }
}

pub fn parse_solver_output(stdout: &str) -> SolverOutput {
    let mut out = SolverOutput::default();
    let marked = stdout.lines().any(|l| l.starts_with("Answer:"));
    let mut take_next = false;
    let mut satisfiable = false;
    for line in stdout.lines() {
        let line = line.trim();
        if line == "UNSATISFIABLE" {
            out.unsatisfiable = true;
            continue;
        }
        if line == "SATISFIABLE" || line == "OPTIMUM FOUND" {
            satisfiable = true;
            continue;
        }
        if marked {
            if take_next {
                take_next = false;
                if let Ok(atoms) = parse_ground_atoms(line) {
                    out.models.push(atoms);
                }
            } else if line.starts_with("Answer:") {
                take_next = true;
            }
        } else if !line.is_empty() {
            if let Ok(atoms) = parse_ground_atoms(line) {
                out.models.push(atoms);
            }
        }
    }
    if satisfiable && out.models.is_empty() && !out.unsatisfiable {
        out.models.push(vec![]);
    }
    out
}

fn cost(atoms: &[Atom], program: &AspProgram) -> usize {
    atoms
        .iter()
        .filter(|a| {
            program
                .minimize
                .iter()
                .any(|m| m.match_onto(a, &mut Substitution::new()))
        })
        .count()
}

impl AspBackend for ExternalSolver {
    fn is_satisfiable(&self, program: &AspProgram) -> Result<bool> {
        let mut plain = program.clone();
        plain.minimize.clear();
        Ok(!self.run(&emit_aspcore2(&plain))?.models.is_empty())
    }

    fn optimal(&self, program: &AspProgram, limit: usize) -> Result<Vec<AnswerSet>> {
        let output = self.run(&emit_aspcore2(program))?;
        let mut sets: Vec<AnswerSet> = output
            .models
            .iter()
            .map(|m| AnswerSet {
                cost: cost(m, program),
                atoms: m.iter().cloned().collect(),
            })
            .collect();
        let Some(best) = sets.iter().map(|s| s.cost).min() else {
            return Ok(vec![]);
        };
        sets.retain(|s| s.cost == best);
        sets.sort();
        sets.dedup();
        sets.truncate(limit);
        Ok(sets)
    }
}
