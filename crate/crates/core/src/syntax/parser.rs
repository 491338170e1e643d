use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{Cursor, Tok};
use super::{parse_atom, parse_term};
use crate::error::{Error, Result};
use crate::model::{
    sym, AbaFramework, Atom, BodyLiteral, ContraryMap, Equality, LearningProblem, RawRule, Symbol,
    Violation, RESERVED_PREFIX,
};

#[derive(Default)]
struct Collected {
    rules: Vec<(Option<String>, RawRule)>,
    assumptions: Vec<Atom>,
    contraries: Vec<(Atom, Atom)>,
    positives: Vec<Atom>,
    negatives: Vec<Atom>,
    learnables: Vec<(Symbol, usize)>,
    constants: Vec<Symbol>,
    statements: usize,
}

fn checked_atom(cur: &mut Cursor) -> Result<Atom> {
    let (line, column) = cur.position();
    let atom = parse_atom(cur)?;
    if atom.pred.starts_with(RESERVED_PREFIX) {
        return Err(Error::Syntax {
            line,
            column,
            message: format!(
                "predicate `{}` uses the reserved `{RESERVED_PREFIX}` prefix",
                atom.pred
            ),
        });
    }
    Ok(atom)
}

fn ground_atom(cur: &mut Cursor, what: &str) -> Result<Atom> {
    let (line, column) = cur.position();
    let atom = checked_atom(cur)?;
    if !atom.is_ground() {
        return Err(Error::Syntax {
            line,
            column,
            message: format!("{what} `{atom}` must be ground"),
        });
    }
    Ok(atom)
}

fn body(cur: &mut Cursor) -> Result<Vec<BodyLiteral>> {
    let mut out = Vec::new();
    loop {
        if matches!(cur.peek_at(1), Some(Tok::Eq)) {
            let l = parse_term(cur)?;
            cur.expect(&Tok::Eq, "`=`")?;
            let r = parse_term(cur)?;
            out.push(BodyLiteral::Eq(Equality::new(l, r)));
        } else if cur.peek() == Some(&Tok::Not) {
            return Err(
                cur.error("negation as failure is not part of ABA rules; use an assumption".into())
            );
        } else {
            out.push(BodyLiteral::Atom(checked_atom(cur)?));
        }
        if cur.eat(&Tok::Dot) {
            return Ok(out);
        }
        cur.expect(&Tok::Comma, "`,` or `.`")?;
    }
}

fn directive(cur: &mut Cursor, name: &str, c: &mut Collected) -> Result<()> {
    match name {
        "assumption" => loop {
            c.assumptions.push(checked_atom(cur)?);
            if cur.eat(&Tok::Dot) {
                return Ok(());
            }
            cur.expect(&Tok::Comma, "`,` or `.`")?;
        },
        "contrary" => {
            let a = checked_atom(cur)?;
            cur.expect(&Tok::Comma, "`,`")?;
            let ca = checked_atom(cur)?;
            cur.expect(&Tok::Dot, "`.`")?;
            c.contraries.push((a, ca));
            Ok(())
        }
        "positive" | "negative" => loop {
            let e = ground_atom(cur, "example")?;
            if name == "positive" {
                c.positives.push(e);
            } else {
                c.negatives.push(e);
            }
            if cur.eat(&Tok::Dot) {
                return Ok(());
            }
            cur.expect(&Tok::Comma, "`,` or `.`")?;
        },
        "learnable" => loop {
            let p = match cur.peek().cloned() {
                Some(Tok::Ident(p)) if !p.starts_with(RESERVED_PREFIX) => p,
                _ => return Err(cur.error("expected a predicate name".into())),
            };
            cur.next();
            cur.expect(&Tok::Slash, "`/`")?;
            let arity = match cur.peek().cloned() {
                Some(Tok::Ident(n)) => n
                    .parse::<usize>()
                    .map_err(|_| cur.error("expected an arity".into()))?,
                _ => return Err(cur.error("expected an arity".into())),
            };
            cur.next();
            c.learnables.push((sym(&p), arity));
            if cur.eat(&Tok::Dot) {
                return Ok(());
            }
            cur.expect(&Tok::Comma, "`,` or `.`")?;
        },
        "constant" => loop {
            match cur.peek().cloned() {
                Some(Tok::Ident(k)) => {
                    cur.next();
                    c.constants.push(sym(&k));
                }
                _ => return Err(cur.error("expected a constant".into())),
            }
            if cur.eat(&Tok::Dot) {
                return Ok(());
            }
            cur.expect(&Tok::Comma, "`,` or `.`")?;
        },
        other => Err(cur.error(format!("unknown directive `#{other}`"))),
    }
}

fn collect(text: &str) -> Result<Collected> {
    let mut cur = Cursor::new(text)?;
    let mut c = Collected::default();
    while !cur.at_end() {
        c.statements += 1;
        if let Some(Tok::Directive(d)) = cur.peek().cloned() {
            cur.next();
            directive(&mut cur, &d, &mut c)?;
            continue;
        }
        let label = match (cur.peek().cloned(), cur.peek_at(1)) {
            (Some(Tok::Ident(l)), Some(Tok::Colon)) => {
                cur.next();
                cur.next();
                Some(l)
            }
            _ => None,
        };
        let head = checked_atom(&mut cur)?;
        let body = if cur.eat(&Tok::Dot) {
            vec![]
        } else {
            cur.expect(&Tok::If, "`:-` or `.`")?;
            body(&mut cur)?
        };
        c.rules.push((label, RawRule { head, body }));
    }
    if c.statements == 0 {
        return Err(Error::EmptyProblem);
    }
    Ok(c)
}

fn build(c: Collected) -> Result<(AbaFramework, Collected)> {
    let apreds: BTreeSet<Symbol> = c.assumptions.iter().map(|a| a.pred.clone()).collect();
    let mut rules = Vec::with_capacity(c.rules.len());
    for (label, raw) in &c.rules {
        let mut r = raw.normalize(&apreds)?;
        if let Some(l) = label {
            r = r.labelled(l);
        }
        rules.push(r);
    }
    let mut contraries = ContraryMap::new();
    let mut seen = BTreeSet::new();
    let mut violations = Vec::new();
    for (a, ca) in &c.contraries {
        if !apreds.contains(&a.pred) {
            violations.push(Violation::AssumptionSchema(format!(
                "{a} (contrary declared for a non-assumption)"
            )));
        }
        if !seen.insert(a.pred.clone()) {
            violations.push(Violation::AssumptionSchema(format!(
                "{a} (contrary declared twice)"
            )));
        }
        contraries.insert(a.clone(), ca.clone());
    }
    if !violations.is_empty() {
        return Err(Error::Invalid(violations));
    }
    let fw = AbaFramework::new(rules, c.assumptions.clone(), contraries)
        .with_constants(c.constants.iter().map(|s| &**s))
        .with_bogus_if_empty();
    Ok((fw, c))
}

/// Parses a learning problem and validates it.
pub fn parse_problem(text: &str) -> Result<LearningProblem> {
    let (fw, c) = build(collect(text)?)?;
    let problem = LearningProblem::new(
        fw,
        c.positives.iter().cloned(),
        c.negatives.iter().cloned(),
        c.learnables.iter().map(|(p, _)| p.clone()),
    );
    let mut violations = problem.validate();
    let arities = problem.background.arities();
    let mut declared: BTreeMap<&Symbol, usize> = BTreeMap::new();
    for (p, n) in &c.learnables {
        let known = arities
            .get(p)
            .and_then(|s| s.iter().next().copied())
            .or_else(|| {
                problem
                    .positives
                    .iter()
                    .chain(&problem.negatives)
                    .find(|e| &e.pred == p)
                    .map(Atom::arity)
            });
        let clash = known.is_some_and(|k| k != *n) || declared.get(p).is_some_and(|d| d != n);
        if clash {
            violations.push(Violation::ArityClash {
                predicate: p.to_string(),
                arities: known.into_iter().chain([*n]).collect(),
            });
        }
        declared.insert(p, *n);
    }
    if violations.is_empty() {
        Ok(problem)
    } else {
        Err(Error::Invalid(violations))
    }
}

/// Parses a framework; example and learnable declarations are ignored.
pub fn parse_framework(text: &str) -> Result<AbaFramework> {
    let (fw, _) = build(collect(text)?)?;
    let violations = fw.validate();
    if violations.is_empty() {
        Ok(fw)
    } else {
        Err(Error::Invalid(violations))
    }
}
