//! The transformation rules: rote learning, folding, assumption
//! introduction and fact subsumption.

use std::collections::BTreeSet;

use crate::encoding::encode_entailment;
use crate::error::{Error, Result};
use crate::model::{is_variant, AbaFramework, Atom, NormalizedRule, Symbol, Term};
use crate::solver::AspBackend;

mod fold;

pub use fold::{
    apply_folding, fold_candidates, fold_with, foldable, step_bound, FoldCandidate, FoldEnumerator,
    FoldOutcome, FoldPolicy, FoldStep, FoldTrace, FolderSource, Rulebase,
};

/// `p(X) ← X = t` for a ground non-assumption atom `p(t)`.
pub fn rote_learn(atom: &Atom, fw: &AbaFramework) -> Result<NormalizedRule> {
    if fw.is_assumption(atom) {
        return Err(Error::FlatnessViolation(format!(
            "`{atom}` is an assumption and cannot be learned"
        )));
    }
    Ok(NormalizedRule::fact(atom))
}

/// The assumption added by [`introduce_assumption`].
#[derive(Clone, Copy, Debug)]
pub enum AssumptionSource<'a> {
    /// A new assumption predicate with contrary `c_<name>`.
    Fresh(&'a str),
    /// An assumption schema already in the framework.
    Existing(&'a Atom),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Introduced {
    pub framework: AbaFramework,
    pub rule: NormalizedRule,
    pub assumption: Atom,
    pub contrary: Atom,
}

pub fn contrary_name(assumption: &str) -> String {
    format!("c_{assumption}")
}

/// Replaces `rule` (or adds it, if absent) by `rule` extended with an
/// assumption over `vars`. Existing contraries are left untouched.
pub fn introduce_assumption(
    rule: &NormalizedRule,
    fw: &AbaFramework,
    vars: &[Symbol],
    source: AssumptionSource,
) -> Result<Introduced> {
    let args: Vec<Term> = vars.iter().cloned().map(Term::Var).collect();
    let mut out = fw.clone();
    let (assumption, contrary) = match source {
        AssumptionSource::Fresh(name) => {
            let cname = contrary_name(name);
            let taken = fw.predicates();
            for n in [name, cname.as_str()] {
                if taken.contains(n)
                    || rule.head.pred.as_ref() == n
                    || rule.body.iter().any(|a| a.pred.as_ref() == n)
                {
                    return Err(Error::NameCollision(n.to_string()));
                }
            }
            let a = Atom::new(name, args.clone());
            let c = Atom::new(&cname, args);
            out.assumptions.push(a.clone());
            out.contraries.insert(a.clone(), c.clone());
            (a, c)
        }
        AssumptionSource::Existing(schema) => {
            if !fw.assumptions.iter().any(|a| a.pred == schema.pred) {
                return Err(Error::Encoding(format!("`{schema}` is not an assumption")));
            }
            if schema.arity() != args.len() {
                return Err(Error::Encoding(format!(
                    "assumption `{schema}` takes {} arguments, got {}",
                    schema.arity(),
                    args.len()
                )));
            }
            let a = Atom::with_symbol(schema.pred.clone(), args);
            let c = fw.contrary(&a).expect("contrary map is total");
            (a, c)
        }
    };
    let mut body = rule.body.clone();
    body.push(assumption.clone());
    let mut extended = NormalizedRule::new(rule.head.clone(), rule.equalities.clone(), body);
    extended.label = rule.label.clone();
    match out.rules.iter().position(|r| r == rule) {
        Some(i) => out.rules[i] = extended.clone(),
        None => out.rules.push(extended.clone()),
    }
    Ok(Introduced {
        framework: out,
        rule: extended,
        assumption,
        contrary,
    })
}

/// Assumption instances `α(X)` relative to the body of `rule`: some rule of
/// `rules` has as body exactly that body plus `α(X)`, up to renaming.
pub fn relative_assumptions(
    rule: &NormalizedRule,
    rules: &[NormalizedRule],
    fw: &AbaFramework,
) -> Vec<Atom> {
    let target = rule.literals();
    let mut out: Vec<Atom> = Vec::new();
    for r in rules {
        for (i, a) in r.body.iter().enumerate() {
            if !fw.is_assumption(a) {
                continue;
            }
            let mut rest = r.clone();
            rest.body.remove(i);
            for bij in
                crate::model::match_literal_sets(&rest.literals(), &target, Default::default())
            {
                let mut args = Vec::with_capacity(a.args.len());
                for t in &a.args {
                    match t {
                        Term::Var(v) => match bij.forward.get(v) {
                            Some(w) => args.push(Term::Var(w.clone())),
                            None => break,
                        },
                        Term::Const(_) => args.push(t.clone()),
                    }
                }
                if args.len() != a.args.len() {
                    continue;
                }
                let inst = Atom::with_symbol(a.pred.clone(), args);
                if !out.contains(&inst) {
                    out.push(inst);
                }
            }
        }
    }
    out.sort();
    out
}

/// `fw` without `fact` when the rest still bravely entails the examples.
pub fn subsume_fact(
    fw: &AbaFramework,
    positives: &BTreeSet<Atom>,
    negatives: &BTreeSet<Atom>,
    fact: &NormalizedRule,
    backend: &dyn AspBackend,
) -> Result<Option<AbaFramework>> {
    let Some(i) = fw.rules.iter().position(|r| is_variant(r, fact)) else {
        return Ok(None);
    };
    let mut rest = fw.clone();
    rest.rules.remove(i);
    let entailed = backend.is_satisfiable(&encode_entailment(&rest, positives, negatives))?;
    Ok(entailed.then_some(rest))
}
