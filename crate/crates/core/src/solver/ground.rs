use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{AspProgram, AspRule, RuleKind};
use crate::error::{Error, Result};
use crate::model::{Atom, EqualityClasses, Substitution, Symbol, Term, DOM};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundRule {
    pub kind: RuleKind,
    pub head: Option<usize>,
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
}

/// A propositional program over an indexed, canonically sorted atom table.
#[derive(Clone, Debug, Default)]
pub struct GroundProgram {
    atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    pub rules: Vec<GroundRule>,
    pub minimize: BTreeSet<usize>,
}

/// Ground rule over atoms rather than indices, used while building.
#[derive(Clone, Debug)]
pub struct GroundRuleAtoms {
    pub kind: RuleKind,
    pub head: Option<Atom>,
    pub positive: Vec<Atom>,
    pub negative: Vec<Atom>,
}

impl GroundProgram {
    /// Builds a program from rules over ground atoms. `extra` atoms are added
    /// to the table even if no rule mentions them.
    pub fn from_rules(
        rules: Vec<GroundRuleAtoms>,
        minimize: impl IntoIterator<Item = Atom>,
        extra: impl IntoIterator<Item = Atom>,
    ) -> Self {
        let minimize: Vec<Atom> = minimize.into_iter().collect();
        let mut table: BTreeSet<Atom> = extra.into_iter().collect();
        table.extend(minimize.iter().cloned());
        for r in &rules {
            table.extend(r.head.iter().cloned());
            table.extend(r.positive.iter().cloned());
            table.extend(r.negative.iter().cloned());
        }
        let atoms: Vec<Atom> = table.into_iter().collect();
        let index: HashMap<Atom, usize> = atoms
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect();
        let rules = rules
            .into_iter()
            .map(|r| GroundRule {
                kind: r.kind,
                head: r.head.map(|h| index[&h]),
                positive: r.positive.iter().map(|a| index[a]).collect(),
                negative: r.negative.iter().map(|a| index[a]).collect(),
            })
            .collect();
        let minimize = minimize.iter().map(|a| index[a]).collect();
        GroundProgram {
            atoms,
            index,
            rules,
            minimize,
        }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn index_of(&self, atom: &Atom) -> Option<usize> {
        self.index.get(atom).copied()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn cost_of<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> usize {
        atoms
            .into_iter()
            .filter(|a| self.index_of(a).is_some_and(|i| self.minimize.contains(&i)))
            .count()
    }
}

/// Variables that are safe: occurring in a positive atom, or linked through
/// equalities to a constant or a safe variable.
pub(crate) fn safe_vars(rule: &AspRule) -> BTreeSet<Symbol> {
    let mut safe: BTreeSet<Symbol> = rule.positive.iter().flat_map(Atom::vars).cloned().collect();
    loop {
        let before = safe.len();
        for e in &rule.equalities {
            let l = match &e.left {
                Term::Var(v) => safe.contains(v),
                Term::Const(_) => true,
            };
            let r = match &e.right {
                Term::Var(v) => safe.contains(v),
                Term::Const(_) => true,
            };
            if l || r {
                safe.extend(e.vars().cloned());
            }
        }
        if safe.len() == before {
            return safe;
        }
    }
}

pub(crate) fn check_range_restricted(rule: &AspRule) -> Result<()> {
    let safe = safe_vars(rule);
    let mentioned = rule
        .head
        .iter()
        .chain(&rule.negative)
        .flat_map(Atom::vars)
        .chain(rule.equalities.iter().flat_map(|e| e.vars()));
    for v in mentioned {
        if !safe.contains(v) {
            return Err(Error::RangeRestriction {
                variable: v.to_string(),
                rule: rule.to_string(),
            });
        }
    }
    Ok(())
}

fn rule_vars(rule: &AspRule) -> Vec<Symbol> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let atoms = rule.head.iter().chain(&rule.positive).chain(&rule.negative);
    let names = atoms
        .flat_map(Atom::vars)
        .chain(rule.equalities.iter().flat_map(|e| e.vars()));
    for v in names {
        if seen.insert(v.clone()) {
            out.push(v.clone());
        }
    }
    out
}

/// Every substitution of universe constants for the variables of `rule` that
/// satisfies its equalities, in a fixed order.
pub(crate) fn substitutions(rule: &AspRule, universe: &[Symbol]) -> Vec<Substitution> {
    let classes = EqualityClasses::new(&rule.equalities);
    if !classes.is_consistent() {
        return vec![];
    }
    let vars = rule_vars(rule);
    // One free slot per equality class without a constant; variables in the
    // same class share the slot.
    let mut slot_of: BTreeMap<Symbol, usize> = BTreeMap::new();
    let mut fixed: BTreeMap<Symbol, Term> = BTreeMap::new();
    let mut slots = 0;
    for v in &vars {
        let term = Term::Var(v.clone());
        if let Some(c) = classes.constant_of(&term) {
            fixed.insert(v.clone(), c.clone());
            continue;
        }
        let sibling = classes.classes().find(|c| c.contains(&term)).and_then(|c| {
            c.iter()
                .filter_map(Term::as_var)
                .find_map(|w| slot_of.get(w).copied())
        });
        let slot = sibling.unwrap_or_else(|| {
            slots += 1;
            slots - 1
        });
        slot_of.insert(v.clone(), slot);
    }
    if slots > 0 && universe.is_empty() {
        return vec![];
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; slots];
    loop {
        let mut subst: Substitution = fixed.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
        for (v, &s) in &slot_of {
            subst.insert(v.clone(), Term::Const(universe[digits[s]].clone()));
        }
        // Ground identities between constants may still fail.
        if rule
            .equalities
            .iter()
            .all(|e| e.left.apply(&subst) == e.right.apply(&subst))
        {
            out.push(subst);
        }
        let mut i = slots;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < universe.len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Grounds a program by substituting universe constants for variables.
pub fn ground(program: &AspProgram) -> Result<GroundProgram> {
    let universe: Vec<Symbol> = program.universe.iter().cloned().collect();
    let mut rules = Vec::new();
    for rule in &program.rules {
        check_range_restricted(rule)?;
        for s in substitutions(rule, &universe) {
            rules.push(GroundRuleAtoms {
                kind: rule.kind,
                head: rule.head.as_ref().map(|h| h.apply(&s)),
                positive: rule.positive.iter().map(|a| a.apply(&s)).collect(),
                negative: rule.negative.iter().map(|a| a.apply(&s)).collect(),
            });
        }
    }
    if program.synthesize_dom {
        for c in &universe {
            rules.push(GroundRuleAtoms {
                kind: RuleKind::Normal,
                head: Some(Atom::with_symbol(
                    crate::model::sym(DOM),
                    vec![Term::Const(c.clone())],
                )),
                positive: vec![],
                negative: vec![],
            });
        }
    }
    let mut table: BTreeSet<Atom> = BTreeSet::new();
    for r in &rules {
        table.extend(r.head.iter().cloned());
        table.extend(r.positive.iter().cloned());
        table.extend(r.negative.iter().cloned());
    }
    let minimize: Vec<Atom> = table
        .iter()
        .filter(|a| {
            program
                .minimize
                .iter()
                .any(|m| m.match_onto(a, &mut Substitution::new()))
        })
        .cloned()
        .collect();
    Ok(GroundProgram::from_rules(rules, minimize, []))
}
