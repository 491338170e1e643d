use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{sym, Atom, Equality, NormalizedRule, Symbol, Term, RESERVED_PREFIX};

/// Predicate holding for every constant of the universe.
pub const DOM: &str = "dom";

const BOGUS: &str = "__bogus";
const BOGUS_CONTRARY: &str = "__bogus_contrary";

/// Maps each assumption schema to its contrary schema.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContraryMap {
    entries: BTreeMap<Symbol, (Atom, Atom)>,
}

impl ContraryMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, assumption: Atom, contrary: Atom) {
        self.entries
            .insert(assumption.pred.clone(), (assumption, contrary));
    }

    pub fn remove(&mut self, assumption_pred: &str) -> Option<(Atom, Atom)> {
        self.entries.remove(assumption_pred)
    }

    pub fn get(&self, assumption_pred: &str) -> Option<&(Atom, Atom)> {
        self.entries.get(assumption_pred)
    }

    /// The contrary of any instance of an assumption schema.
    pub fn contrary_of(&self, assumption: &Atom) -> Option<Atom> {
        let (schema, contrary) = self.entries.get(&assumption.pred)?;
        let mut subst = super::Substitution::new();
        schema
            .match_onto(assumption, &mut subst)
            .then(|| contrary.apply(&subst))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, &Atom)> {
        self.entries.values().map(|(a, c)| (a, c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A flat ABA framework over a finite universe of constants.
///
/// `dom(c)` holds for every constant `c` of the universe; those facts are
/// never stored in `rules` and are produced on demand by [`dom_rules`].
///
/// [`dom_rules`]: AbaFramework::dom_rules
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AbaFramework {
    pub rules: Vec<NormalizedRule>,
    pub assumptions: Vec<Atom>,
    pub contraries: ContraryMap,
    pub universe: BTreeSet<Symbol>,
}

impl AbaFramework {
    /// Builds a framework whose universe is every constant mentioned in it.
    pub fn new(
        rules: Vec<NormalizedRule>,
        assumptions: Vec<Atom>,
        contraries: ContraryMap,
    ) -> Self {
        let mut fw = AbaFramework {
            rules,
            assumptions,
            contraries,
            universe: BTreeSet::new(),
        };
        fw.absorb_constants();
        fw
    }

    pub fn with_constants<'a>(mut self, constants: impl IntoIterator<Item = &'a str>) -> Self {
        self.universe.extend(constants.into_iter().map(sym));
        self
    }

    /// Adds every constant occurring in rules and contraries to the universe.
    pub fn absorb_constants(&mut self) {
        for r in &self.rules {
            self.universe.extend(r.constants());
        }
        for (a, c) in self.contraries.iter() {
            self.universe.extend(a.constants().cloned());
            self.universe.extend(c.constants().cloned());
        }
    }

    /// Adds a bogus assumption, with its own contrary, when there is none.
    pub fn with_bogus_if_empty(mut self) -> Self {
        if self.assumptions.is_empty() {
            let a = Atom::new(BOGUS, vec![]);
            self.contraries
                .insert(a.clone(), Atom::new(BOGUS_CONTRARY, vec![]));
            self.assumptions.push(a);
        }
        self
    }

    /// Drops the bogus assumption once a real one exists.
    pub fn without_redundant_bogus(mut self) -> Self {
        if self.assumptions.iter().any(|a| !Self::is_bogus(a)) {
            self.assumptions.retain(|a| !Self::is_bogus(a));
            self.contraries.remove(BOGUS);
        }
        self
    }

    pub fn is_bogus(atom: &Atom) -> bool {
        &*atom.pred == BOGUS
    }

    pub fn assumption_preds(&self) -> BTreeSet<Symbol> {
        self.assumptions.iter().map(|a| a.pred.clone()).collect()
    }

    pub fn is_assumption(&self, atom: &Atom) -> bool {
        self.assumptions.iter().any(|a| a.pred == atom.pred)
    }

    pub fn contrary(&self, assumption: &Atom) -> Option<Atom> {
        self.contraries.contrary_of(assumption)
    }

    pub fn contrary_preds(&self) -> BTreeSet<Symbol> {
        self.contraries
            .iter()
            .map(|(_, c)| c.pred.clone())
            .collect()
    }

    pub fn dom_rules(&self) -> Vec<NormalizedRule> {
        self.universe
            .iter()
            .map(|c| {
                NormalizedRule::new(
                    Atom::new(DOM, vec![Term::var("X")]),
                    vec![Equality::new(Term::var("X"), Term::Const(c.clone()))],
                    vec![],
                )
            })
            .collect()
    }

    /// Explicit rules followed by the synthesised `dom` facts.
    pub fn rules_with_dom(&self) -> Vec<NormalizedRule> {
        let mut out = self.rules.clone();
        out.extend(self.dom_rules());
        out
    }

    /// `pred(⟨R, A, contraries⟩)`, including `dom`.
    pub fn predicates(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        out.insert(sym(DOM));
        for r in &self.rules {
            out.insert(r.head.pred.clone());
            out.extend(r.body.iter().map(|a| a.pred.clone()));
        }
        for (a, c) in self.contraries.iter() {
            out.insert(a.pred.clone());
            out.insert(c.pred.clone());
        }
        out.extend(self.assumptions.iter().map(|a| a.pred.clone()));
        out
    }

    /// Number of rules counting the implicit `dom(c)` facts and the identity
    /// rules `c = c` for every constant.
    pub fn rule_count_with_implicit(&self) -> usize {
        self.rules.len() + 2 * self.universe.len()
    }

    pub fn arities(&self) -> BTreeMap<Symbol, BTreeSet<usize>> {
        let mut out: BTreeMap<Symbol, BTreeSet<usize>> = BTreeMap::new();
        let mut note = |a: &Atom| {
            out.entry(a.pred.clone()).or_default().insert(a.arity());
        };
        note(&Atom::new(DOM, vec![Term::var("X")]));
        for r in &self.rules {
            note(&r.head);
            r.body.iter().for_each(&mut note);
        }
        for a in &self.assumptions {
            note(a);
        }
        for (a, c) in self.contraries.iter() {
            note(a);
            note(c);
        }
        out
    }

    /// Structural side conditions: flatness, total contraries, range
    /// restriction of heads, consistent arities.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let apreds = self.assumption_preds();
        for r in &self.rules {
            if apreds.contains(&r.head.pred) {
                out.push(Violation::Flatness(r.to_string()));
            }
            if &*r.head.pred == DOM {
                out.push(Violation::DomRule(r.to_string()));
            }
            for v in r.unbound_head_vars() {
                out.push(Violation::HeadVariableUnbound {
                    rule: r.to_string(),
                    variable: v.to_string(),
                });
            }
        }
        for a in &self.assumptions {
            let vars: Vec<&Symbol> = a.vars().collect();
            let distinct: BTreeSet<&Symbol> = vars.iter().copied().collect();
            if vars.len() != a.arity() || distinct.len() != vars.len() {
                out.push(Violation::AssumptionSchema(a.to_string()));
            }
            match self.contraries.get(&a.pred) {
                None => out.push(Violation::MissingContrary(a.to_string())),
                Some((_, c)) => {
                    if apreds.contains(&c.pred) {
                        out.push(Violation::ContraryIsAssumption {
                            assumption: a.to_string(),
                            contrary: c.to_string(),
                        });
                    }
                    if c.vars().any(|v| !distinct.contains(v)) {
                        out.push(Violation::ContraryVariable {
                            assumption: a.to_string(),
                            contrary: c.to_string(),
                        });
                    }
                }
            }
        }
        for (pred, arities) in self.arities() {
            if arities.len() > 1 {
                out.push(Violation::ArityClash {
                    predicate: pred.to_string(),
                    arities: arities.into_iter().collect(),
                });
            }
        }
        for r in &self.rules {
            for c in r.constants() {
                if !self.universe.contains(&c) {
                    out.push(Violation::ConstantOutsideUniverse(c.to_string()));
                }
            }
        }
        out
    }
}

/// A brave learning problem: background framework, examples and learnable predicates.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LearningProblem {
    pub background: AbaFramework,
    pub positives: BTreeSet<Atom>,
    pub negatives: BTreeSet<Atom>,
    pub learnables: BTreeSet<Symbol>,
}

impl LearningProblem {
    pub fn new(
        mut background: AbaFramework,
        positives: impl IntoIterator<Item = Atom>,
        negatives: impl IntoIterator<Item = Atom>,
        learnables: impl IntoIterator<Item = Symbol>,
    ) -> Self {
        let positives: BTreeSet<Atom> = positives.into_iter().collect();
        let negatives: BTreeSet<Atom> = negatives.into_iter().collect();
        for e in positives.iter().chain(&negatives) {
            background.universe.extend(e.constants().cloned());
        }
        LearningProblem {
            background,
            positives,
            negatives,
            learnables: learnables.into_iter().collect(),
        }
    }

    pub fn examples(&self) -> (&BTreeSet<Atom>, &BTreeSet<Atom>) {
        (&self.positives, &self.negatives)
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = self.background.validate();
        let apreds = self.background.assumption_preds();
        for e in self.positives.intersection(&self.negatives) {
            out.push(Violation::ExampleOverlap(e.to_string()));
        }
        for e in self.positives.iter().chain(&self.negatives) {
            if !e.is_ground() {
                out.push(Violation::NonGroundExample(e.to_string()));
            }
            if apreds.contains(&e.pred) {
                out.push(Violation::AssumptionExample(e.to_string()));
            }
            if !self.learnables.contains(&e.pred) {
                out.push(Violation::ExampleNotLearnable(e.pred.to_string()));
            }
        }
        for p in &self.learnables {
            if apreds.contains(p) {
                out.push(Violation::LearnableAssumption(p.to_string()));
            }
            if &**p == DOM {
                out.push(Violation::LearnableAssumption(p.to_string()));
            }
        }
        let arities = self.background.arities();
        for e in self.positives.iter().chain(&self.negatives) {
            if let Some(known) = arities.get(&e.pred) {
                if !known.contains(&e.arity()) {
                    out.push(Violation::ArityClash {
                        predicate: e.pred.to_string(),
                        arities: known.iter().copied().chain([e.arity()]).collect(),
                    });
                }
            }
        }
        for p in self.background.predicates() {
            if p.starts_with(RESERVED_PREFIX)
                && !AbaFramework::is_bogus(&Atom::with_symbol(p.clone(), vec![]))
                && &*p != BOGUS_CONTRARY
            {
                out.push(Violation::ReservedName(p.to_string()));
            }
        }
        out.sort_by_key(ToString::to_string);
        out.dedup_by_key(|v| v.to_string());
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Flatness(String),
    DomRule(String),
    HeadVariableUnbound {
        rule: String,
        variable: String,
    },
    ArityClash {
        predicate: String,
        arities: Vec<usize>,
    },
    MissingContrary(String),
    ContraryIsAssumption {
        assumption: String,
        contrary: String,
    },
    ContraryVariable {
        assumption: String,
        contrary: String,
    },
    AssumptionSchema(String),
    ConstantOutsideUniverse(String),
    ExampleOverlap(String),
    NonGroundExample(String),
    AssumptionExample(String),
    ExampleNotLearnable(String),
    LearnableAssumption(String),
    ReservedName(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Flatness(r) => write!(f, "flatness violation: assumption in head of `{r}`"),
            Violation::DomRule(r) => write!(
                f,
                "`dom` facts are synthesised and cannot be defined: `{r}`"
            ),
            Violation::HeadVariableUnbound { rule, variable } => {
                write!(
                    f,
                    "head variable {variable} does not occur in the body of `{rule}`"
                )
            }
            Violation::ArityClash { predicate, arities } => {
                write!(f, "predicate `{predicate}` used with arities {arities:?}")
            }
            Violation::MissingContrary(a) => write!(f, "assumption `{a}` has no contrary"),
            Violation::ContraryIsAssumption {
                assumption,
                contrary,
            } => {
                write!(
                    f,
                    "contrary `{contrary}` of `{assumption}` is itself an assumption"
                )
            }
            Violation::ContraryVariable {
                assumption,
                contrary,
            } => {
                write!(
                    f,
                    "contrary `{contrary}` uses variables not in `{assumption}`"
                )
            }
            Violation::AssumptionSchema(a) => {
                write!(
                    f,
                    "assumption `{a}` must have pairwise distinct variable arguments"
                )
            }
            Violation::ConstantOutsideUniverse(c) => {
                write!(f, "constant `{c}` is outside the universe")
            }
            Violation::ExampleOverlap(e) => {
                write!(f, "`{e}` is both a positive and a negative example")
            }
            Violation::NonGroundExample(e) => write!(f, "example `{e}` is not ground"),
            Violation::AssumptionExample(e) => write!(f, "example `{e}` is an assumption"),
            Violation::ExampleNotLearnable(p) => {
                write!(f, "example predicate `{p}` is not learnable")
            }
            Violation::LearnableAssumption(p) => {
                write!(f, "learnable predicate `{p}` is an assumption or reserved")
            }
            Violation::ReservedName(p) => {
                write!(f, "predicate `{p}` uses the reserved `__` prefix")
            }
        }
    }
}
