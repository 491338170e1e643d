use std::collections::BTreeSet;
use std::fmt::Write;

use crate::model::{AbaFramework, LearningProblem, NormalizedRule, Symbol};

fn rule_line(out: &mut String, r: &NormalizedRule) {
    if let Some(l) = &r.label {
        let _ = write!(out, "{l}: ");
    }
    // Facts are written denormalised only when parsing restores them exactly.
    let fact = r.as_ground_fact().filter(|g| {
        let back = NormalizedRule::fact(g);
        back.head == r.head && back.equalities == r.equalities
    });
    match fact {
        Some(g) => {
            let _ = writeln!(out, "{g}.");
        }
        None => {
            let _ = writeln!(out, "{r}.");
        }
    }
}

fn framework_body(out: &mut String, fw: &AbaFramework, mentioned: &mut BTreeSet<Symbol>) {
    for r in &fw.rules {
        rule_line(out, r);
        mentioned.extend(r.constants());
    }
    let visible: Vec<_> = fw
        .assumptions
        .iter()
        .filter(|a| !AbaFramework::is_bogus(a))
        .collect();
    if !visible.is_empty() {
        out.push('\n');
    }
    for a in visible {
        let _ = writeln!(out, "#assumption {a}.");
        if let Some((schema, c)) = fw.contraries.get(&a.pred) {
            let _ = writeln!(out, "#contrary {schema}, {c}.");
            mentioned.extend(schema.constants().cloned());
            mentioned.extend(c.constants().cloned());
        }
    }
}

fn constants_line(out: &mut String, fw: &AbaFramework, mentioned: &BTreeSet<Symbol>) {
    let extra: Vec<&str> = fw
        .universe
        .iter()
        .filter(|c| !mentioned.contains(*c))
        .map(|c| &**c)
        .collect();
    if !extra.is_empty() {
        let _ = writeln!(out, "#constant {}.", extra.join(", "));
    }
}

/// Renders a framework in the `.aba` syntax accepted by the parser.
pub fn print_framework(fw: &AbaFramework) -> String {
    let mut out = String::new();
    let mut mentioned = BTreeSet::new();
    framework_body(&mut out, fw, &mut mentioned);
    constants_line(&mut out, fw, &mentioned);
    out
}

pub fn print_problem(problem: &LearningProblem) -> String {
    let mut out = String::new();
    let mut mentioned = BTreeSet::new();
    framework_body(&mut out, &problem.background, &mut mentioned);
    out.push('\n');
    for e in &problem.positives {
        let _ = writeln!(out, "#positive {e}.");
        mentioned.extend(e.constants().cloned());
    }
    for e in &problem.negatives {
        let _ = writeln!(out, "#negative {e}.");
        mentioned.extend(e.constants().cloned());
    }
    let arities = problem.background.arities();
    for p in &problem.learnables {
        let arity = arities
            .get(p)
            .and_then(|s| s.iter().next().copied())
            .or_else(|| {
                problem
                    .positives
                    .iter()
                    .chain(&problem.negatives)
                    .find(|e| &e.pred == p)
                    .map(|e| e.arity())
            })
            .unwrap_or(0);
        let _ = writeln!(out, "#learnable {p}/{arity}.");
    }
    constants_line(&mut out, &problem.background, &mentioned);
    out
}
