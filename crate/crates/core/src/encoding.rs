//! ASP encodings of frameworks and learning problems.
//!
//! A framework becomes a normal program: its rules are copied, and every
//! assumption `a(X)` occurring in a rule body is defined by
//! `a(X) :- dom(X), not c(X)` where `c(X)` is its contrary. Learning adds
//! example constraints and, for each learnable `p`, a choice over a primed
//! copy `__new_p` that is minimised.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::{sym, AbaFramework, Atom, Equality, NormalizedRule, Symbol, Term, DOM};
use crate::solver::{safe_vars, AnswerSet, AspProgram, AspRule};

const PRIME: &str = "__new_";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodingOptions {
    /// Guard the choice for a contrary predicate by the atoms accompanying
    /// the assumption in rule bodies instead of `dom`.
    pub domain_restriction: bool,
    /// Restrict the choice for predicates of positive examples to the
    /// example atoms themselves. Not equisatisfiable in general.
    pub positive_example_choice_simplification: bool,
}

impl Default for EncodingOptions {
    fn default() -> Self {
        EncodingOptions {
            domain_restriction: true,
            positive_example_choice_simplification: false,
        }
    }
}

pub fn primed(pred: &str) -> Symbol {
    sym(&format!("{PRIME}{pred}"))
}

pub fn unprimed(pred: &str) -> Option<&str> {
    pred.strip_prefix(PRIME)
}

fn dom(v: &Symbol) -> Atom {
    Atom::with_symbol(sym(DOM), vec![Term::Var(v.clone())])
}

fn tuple(n: usize) -> Vec<Term> {
    if n == 1 {
        return vec![Term::var("X")];
    }
    (1..=n).map(|i| Term::var(&format!("X{i}"))).collect()
}

/// Adds `dom` guards for variables not bound by a positive atom.
fn make_safe(mut rule: AspRule) -> AspRule {
    let safe = safe_vars(&rule);
    let mut missing: Vec<Symbol> = Vec::new();
    let mentioned = rule
        .head
        .iter()
        .chain(&rule.negative)
        .flat_map(Atom::vars)
        .chain(rule.equalities.iter().flat_map(Equality::vars));
    for v in mentioned {
        if !safe.contains(v) && !missing.contains(v) {
            missing.push(v.clone());
        }
    }
    rule.positive.extend(missing.iter().map(dom));
    rule
}

fn rule_to_asp(r: &NormalizedRule) -> AspRule {
    make_safe(
        AspRule::normal(r.head.clone(), r.body.clone(), vec![])
            .with_equalities(r.equalities.clone()),
    )
}

/// The framework as a normal program: rules plus one defining rule per
/// assumption. Answer sets correspond to stable extensions.
pub fn translate_framework(fw: &AbaFramework) -> AspProgram {
    let mut program = AspProgram::new(fw.universe.clone());
    for r in &fw.rules {
        program.push(rule_to_asp(r));
    }
    for a in &fw.assumptions {
        let contrary = fw.contrary(a).expect("contrary map is total");
        let guard: Vec<Atom> = a.vars().map(dom).collect();
        program.push(AspRule::normal(a.clone(), guard, vec![contrary]));
    }
    program
}

/// Arity of a predicate as used in the framework or the examples.
fn arity_of<'a>(
    pred: &Symbol,
    arities: &BTreeMap<Symbol, BTreeSet<usize>>,
    mut examples: impl Iterator<Item = &'a Atom>,
) -> Option<usize> {
    arities
        .get(pred)
        .and_then(|s| s.iter().next().copied())
        .or_else(|| examples.find(|e| &e.pred == pred).map(Atom::arity))
}

/// Guards for the choice over a contrary predicate: for every body where an
/// assumption with that contrary occurs, the non-assumption atoms sharing
/// variables with the assumption, plus the equalities they fully cover.
fn restricted_guards(fw: &AbaFramework, pred: &Symbol) -> Vec<(Atom, Vec<Atom>, Vec<Equality>)> {
    let apreds = fw.assumption_preds();
    let mut out: Vec<(Atom, Vec<Atom>, Vec<Equality>)> = Vec::new();
    for r in &fw.rules {
        for a in r.body.iter().filter(|a| apreds.contains(&a.pred)) {
            let Some(contrary) = fw.contrary(a) else {
                continue;
            };
            if &contrary.pred != pred {
                continue;
            }
            let vars: BTreeSet<&Symbol> = a.vars().collect();
            let guard: Vec<Atom> = r
                .body
                .iter()
                .filter(|b| !apreds.contains(&b.pred) && b.vars().any(|v| vars.contains(v)))
                .cloned()
                .collect();
            let covered: BTreeSet<&Symbol> = guard.iter().flat_map(Atom::vars).collect();
            let eqs: Vec<Equality> = r
                .equalities
                .iter()
                .filter(|e| e.vars().next().is_some() && e.vars().all(|v| covered.contains(v)))
                .cloned()
                .collect();
            let entry = (contrary, guard, eqs);
            if !out.contains(&entry) {
                out.push(entry);
            }
        }
    }
    out
}

/// The learning program for `fw` with examples and learnable predicates.
pub fn encode_learning(
    fw: &AbaFramework,
    positives: &BTreeSet<Atom>,
    negatives: &BTreeSet<Atom>,
    learnables: &BTreeSet<Symbol>,
    opts: &EncodingOptions,
) -> Result<AspProgram> {
    let apreds = fw.assumption_preds();
    if let Some(p) = learnables.iter().find(|p| apreds.contains(*p)) {
        return Err(Error::Encoding(format!(
            "learnable predicate `{p}` is an assumption"
        )));
    }
    let mut program = translate_framework(fw);
    for e in positives.iter().chain(negatives) {
        program.universe.extend(e.constants().cloned());
    }
    for e in positives {
        program.push(AspRule::constraint(vec![], vec![e.clone()]));
    }
    for e in negatives {
        program.push(AspRule::constraint(vec![e.clone()], vec![]));
    }
    let arities = fw.arities();
    let contrary_preds = fw.contrary_preds();
    let body_preds: BTreeSet<&Symbol> = fw
        .rules
        .iter()
        .flat_map(|r| r.body.iter().map(|a| &a.pred))
        .collect();
    let positive_preds: BTreeSet<&Symbol> = positives.iter().map(|e| &e.pred).collect();
    for p in learnables {
        let Some(n) = arity_of(p, &arities, positives.iter().chain(negatives)) else {
            continue;
        };
        let args = tuple(n);
        let head = Atom::with_symbol(p.clone(), args.clone());
        let new = Atom::with_symbol(primed(p), args.clone());
        program.push(AspRule::normal(head, vec![new.clone()], vec![]));
        program.minimize.push(new.clone());

        if opts.positive_example_choice_simplification && positive_preds.contains(p) {
            for e in positives.iter().filter(|e| &e.pred == p) {
                program.push(AspRule::choice(
                    Atom::with_symbol(primed(p), e.args.clone()),
                    vec![],
                ));
            }
            continue;
        }
        let restrict = opts.domain_restriction
            && contrary_preds.contains(p)
            && !body_preds.contains(p)
            && !positive_preds.contains(p);
        let guards = if restrict {
            restricted_guards(fw, p)
        } else {
            vec![]
        };
        if guards.is_empty() {
            let guard = args.iter().filter_map(Term::as_var).map(dom).collect();
            program.push(AspRule::choice(new, guard));
            continue;
        }
        for (contrary, guard, eqs) in guards {
            let choice =
                AspRule::choice(Atom::with_symbol(primed(p), contrary.args.clone()), guard);
            program.push(make_safe(choice.with_equalities(eqs)));
        }
    }
    Ok(program)
}

/// Satisfiable iff the framework bravely entails the examples.
pub fn encode_entailment(
    fw: &AbaFramework,
    positives: &BTreeSet<Atom>,
    negatives: &BTreeSet<Atom>,
) -> AspProgram {
    encode_learning(
        fw,
        positives,
        negatives,
        &BTreeSet::new(),
        &EncodingOptions::default(),
    )
    .expect("no learnable predicates to reject")
}

/// One normalised fact `p(X) :- X = t` per primed atom `__new_p(t)`.
pub fn decode_facts(answer: &AnswerSet, learnables: &BTreeSet<Symbol>) -> Vec<NormalizedRule> {
    answer
        .atoms
        .iter()
        .filter_map(|a| {
            let p = unprimed(&a.pred)?;
            learnables
                .contains(p)
                .then(|| NormalizedRule::fact(&Atom::new(p, a.args.clone())))
        })
        .collect()
}
