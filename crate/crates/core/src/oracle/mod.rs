//! Argumentation-level semantics used as ground truth for the solver and the
//! learner: stable extensions, brave entailment and solution checking.
//!
//! Grounding here is deliberately independent of the solver's grounder.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{
    is_variant, sym, AbaFramework, Atom, LearningProblem, NormalizedRule, Substitution, Symbol,
    Term, DOM,
};

mod arguments;

pub use arguments::{argument_extensions, arguments, supports, Argument, Supports};

/// Default limit on ground assumptions for exhaustive enumeration.
pub const DEFAULT_BOUND: usize = 24;

/// A stable extension: its assumptions and every non-assumption atom they derive.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Extension {
    pub assumptions_in: BTreeSet<Atom>,
    pub claims: BTreeSet<Atom>,
}

impl Extension {
    /// Claims together with the assumptions, i.e. every accepted sentence.
    pub fn sentences(&self) -> BTreeSet<Atom> {
        self.claims.union(&self.assumptions_in).cloned().collect()
    }
}

/// All ground instances of a rule over `universe`, as `(head, body)`.
pub(crate) fn ground_rule(rule: &NormalizedRule, universe: &[Symbol]) -> Vec<(Atom, Vec<Atom>)> {
    let vars = rule.vars();
    let mut out = Vec::new();
    if !vars.is_empty() && universe.is_empty() {
        return out;
    }
    let total = universe.len().pow(vars.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut subst = Substitution::new();
        for v in &vars {
            subst.insert(v.clone(), Term::Const(universe[c % universe.len()].clone()));
            c /= universe.len();
        }
        let holds = rule
            .equalities
            .iter()
            .all(|e| e.left.apply(&subst) == e.right.apply(&subst));
        if holds {
            out.push((
                rule.head.apply(&subst),
                rule.body.iter().map(|a| a.apply(&subst)).collect(),
            ));
        }
    }
    out
}

/// Every ground instance of an atom schema over `universe`.
pub(crate) fn instances(schema: &Atom, universe: &[Symbol]) -> Vec<Atom> {
    let rule = NormalizedRule::new(schema.clone(), vec![], vec![]);
    ground_rule(&rule, universe)
        .into_iter()
        .map(|(h, _)| h)
        .collect()
}

/// A framework grounded over its universe, with atoms indexed.
pub(crate) struct GroundAba {
    pub atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    pub rules: Vec<(usize, Vec<usize>, Option<usize>)>,
    pub assumptions: Vec<usize>,
    pub contrary: Vec<usize>,
}

impl GroundAba {
    pub fn new(fw: &AbaFramework, extra: &BTreeSet<Symbol>, bound: usize) -> Result<Self> {
        let universe: Vec<Symbol> = fw.universe.union(extra).cloned().collect();
        let mut g = GroundAba {
            atoms: vec![],
            index: HashMap::new(),
            rules: vec![],
            assumptions: vec![],
            contrary: vec![],
        };
        let mut ground_asms = Vec::new();
        for schema in &fw.assumptions {
            ground_asms.extend(instances(schema, &universe));
        }
        if ground_asms.len() > bound {
            return Err(Error::AssumptionBoundExceeded {
                count: ground_asms.len(),
                bound,
            });
        }
        for a in ground_asms {
            let c = fw
                .contrary(&a)
                .ok_or_else(|| Error::Encoding(format!("assumption `{a}` has no contrary")))?;
            let ia = g.intern(a);
            let ic = g.intern(c);
            g.assumptions.push(ia);
            g.contrary.push(ic);
        }
        for c in &universe {
            let d = g.intern(Atom::with_symbol(sym(DOM), vec![Term::Const(c.clone())]));
            g.rules.push((d, vec![], None));
        }
        for (i, r) in fw.rules.iter().enumerate() {
            for (h, body) in ground_rule(r, &universe) {
                let h = g.intern(h);
                let body = body.into_iter().map(|a| g.intern(a)).collect();
                g.rules.push((h, body, Some(i)));
            }
        }
        Ok(g)
    }

    fn intern(&mut self, atom: Atom) -> usize {
        if let Some(&i) = self.index.get(&atom) {
            return i;
        }
        self.atoms.push(atom.clone());
        self.index.insert(atom, self.atoms.len() - 1);
        self.atoms.len() - 1
    }

    fn is_assumption(&self) -> Vec<bool> {
        let mut out = vec![false; self.atoms.len()];
        for &a in &self.assumptions {
            out[a] = true;
        }
        out
    }

    /// Least set of atoms derivable from the assumptions flagged in `held`.
    pub fn closure(&self, held: &[bool]) -> Vec<bool> {
        let mut derived = vec![false; self.atoms.len()];
        for (k, &a) in self.assumptions.iter().enumerate() {
            if held[k] {
                derived[a] = true;
            }
        }
        loop {
            let mut changed = false;
            for (h, body, _) in &self.rules {
                if !derived[*h] && body.iter().all(|b| derived[*b]) {
                    derived[*h] = true;
                    changed = true;
                }
            }
            if !changed {
                return derived;
            }
        }
    }

    fn extension(&self, held: &[bool]) -> Extension {
        let derived = self.closure(held);
        let is_asm = self.is_assumption();
        Extension {
            assumptions_in: self
                .assumptions
                .iter()
                .zip(held)
                .filter(|(_, h)| **h)
                .map(|(a, _)| self.atoms[*a].clone())
                .collect(),
            claims: (0..self.atoms.len())
                .filter(|&i| derived[i] && !is_asm[i])
                .map(|i| self.atoms[i].clone())
                .collect(),
        }
    }

    /// Stable assumption sets: depth-first over assumptions with pruning on
    /// conflicts among those already in and unreachable attacks on those out.
    pub fn stable(&self) -> Vec<Extension> {
        let n = self.assumptions.len();
        let mut out = Vec::new();
        // 0 = out, 1 = in, 2 = undecided
        let mut state = vec![2u8; n];
        self.search(0, &mut state, &mut out);
        out.sort();
        out
    }

    fn search(&self, k: usize, state: &mut Vec<u8>, out: &mut Vec<Extension>) {
        let held_in: Vec<bool> = state.iter().map(|s| *s == 1).collect();
        let lower = self.closure(&held_in);
        for (j, s) in state.iter().enumerate() {
            if *s == 1 && lower[self.contrary[j]] {
                return;
            }
        }
        let held_maybe: Vec<bool> = state.iter().map(|s| *s != 0).collect();
        let upper = self.closure(&held_maybe);
        for (j, s) in state.iter().enumerate() {
            if *s == 0 && !upper[self.contrary[j]] {
                return;
            }
        }
        if k == state.len() {
            out.push(self.extension(&held_in));
            return;
        }
        for choice in [1u8, 0u8] {
            state[k] = choice;
            self.search(k + 1, state, out);
        }
        state[k] = 2;
    }
}

/// Configuration for the exhaustive semantics.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub bound: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            bound: DEFAULT_BOUND,
        }
    }
}

impl Oracle {
    pub fn stable_extensions(&self, fw: &AbaFramework) -> Result<Vec<Extension>> {
        Ok(GroundAba::new(fw, &BTreeSet::new(), self.bound)?.stable())
    }

    /// A stable extension containing every positive and no negative example.
    pub fn entailment_witness(
        &self,
        fw: &AbaFramework,
        positives: &BTreeSet<Atom>,
        negatives: &BTreeSet<Atom>,
    ) -> Result<Option<Extension>> {
        let extra: BTreeSet<Symbol> = positives
            .iter()
            .chain(negatives)
            .flat_map(|e| e.constants().cloned())
            .collect();
        let g = GroundAba::new(fw, &extra, self.bound)?;
        Ok(g.stable().into_iter().find(|ext| {
            let s = ext.sentences();
            positives.iter().all(|e| s.contains(e)) && !negatives.iter().any(|e| s.contains(e))
        }))
    }

    pub fn bravely_entails(
        &self,
        fw: &AbaFramework,
        positives: &BTreeSet<Atom>,
        negatives: &BTreeSet<Atom>,
    ) -> Result<bool> {
        Ok(self.entailment_witness(fw, positives, negatives)?.is_some())
    }

    /// Checks the five solution conditions of a candidate framework.
    pub fn is_solution(&self, candidate: &AbaFramework, problem: &LearningProblem) -> Result<bool> {
        Ok(self.solution_report(candidate, problem)?.is_empty())
    }

    /// Names of the violated solution conditions; empty when a solution.
    pub fn solution_report(
        &self,
        candidate: &AbaFramework,
        problem: &LearningProblem,
    ) -> Result<Vec<String>> {
        let mut failed = structural_report(candidate, problem);
        let mut widened = candidate.clone();
        widened
            .universe
            .extend(problem.background.universe.iter().cloned());
        if !self.bravely_entails(&widened, &problem.positives, &problem.negatives)? {
            failed.push("examples are not bravely entailed".into());
        }
        Ok(failed)
    }
}

/// The solution conditions that do not need extensions: background rules and
/// assumptions kept, contraries unchanged, new rules only for learnables.
pub fn structural_report(candidate: &AbaFramework, problem: &LearningProblem) -> Vec<String> {
    let bk = &problem.background;
    let mut failed = Vec::new();
    let kept = |r: &NormalizedRule| candidate.rules.iter().any(|c| is_variant(r, c));
    if let Some(r) = bk.rules.iter().find(|r| !kept(r)) {
        failed.push(format!("background rule `{r}` was dropped"));
    }
    let old_preds = bk.predicates();
    for r in &candidate.rules {
        let new = !bk.rules.iter().any(|o| is_variant(o, r));
        if new && old_preds.contains(&r.head.pred) && !problem.learnables.contains(&r.head.pred) {
            failed.push(format!("new rule `{r}` defines a non-learnable predicate"));
        }
    }
    for a in bk.assumptions.iter().filter(|a| !AbaFramework::is_bogus(a)) {
        if !candidate.assumptions.iter().any(|b| same_schema(a, b)) {
            failed.push(format!("assumption `{a}` was dropped"));
            continue;
        }
        if candidate.contrary(a) != bk.contrary(a) {
            failed.push(format!("contrary of `{a}` changed"));
        }
    }
    failed
}

fn same_schema(a: &Atom, b: &Atom) -> bool {
    let x = NormalizedRule::new(a.clone(), vec![], vec![]);
    let y = NormalizedRule::new(b.clone(), vec![], vec![]);
    is_variant(&x, &y)
}

pub fn stable_extensions(fw: &AbaFramework) -> Result<Vec<Extension>> {
    Oracle::default().stable_extensions(fw)
}

pub fn bravely_entails(
    fw: &AbaFramework,
    positives: &BTreeSet<Atom>,
    negatives: &BTreeSet<Atom>,
) -> Result<bool> {
    Oracle::default().bravely_entails(fw, positives, negatives)
}

pub fn is_solution(candidate: &AbaFramework, problem: &LearningProblem) -> Result<bool> {
    Oracle::default().is_solution(candidate, problem)
}
