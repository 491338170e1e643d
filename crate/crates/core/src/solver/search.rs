//! DPLL-style model search over a ground program.
//!
//! Choice rules are compiled away with complement atoms. Propagation combines
//! forward and backward rule inference with an unfounded-set check. Only
//! atoms under negation are branched on; once they are fixed, the least model
//! of the reduct settles the rest and is re-verified before it is reported.

use std::collections::BTreeSet;

use super::{AnswerSet, GroundProgram, RuleKind};
use crate::model::Atom;

const UNKNOWN: i8 = 0;
const TRUE: i8 = 1;
const FALSE: i8 = -1;

#[derive(Clone, Debug)]
struct NRule {
    head: Option<usize>,
    pos: Vec<usize>,
    neg: Vec<usize>,
}

/// Normal program obtained from a ground program by compiling choice rules.
#[derive(Clone, Debug)]
struct Normal {
    /// Atoms of the source table; complements are numbered after them.
    visible: usize,
    atoms: usize,
    rules: Vec<NRule>,
    heads_of: Vec<Vec<usize>>,
    body_of: Vec<Vec<usize>>,
    minimize: Vec<usize>,
    /// Complement atom of each choice head, if any.
    complement: Vec<Option<usize>>,
    choice_guards: Vec<Vec<usize>>,
}

impl Normal {
    fn new(g: &GroundProgram) -> Self {
        let visible = g.len();
        let mut complement = vec![None; visible];
        let mut next = visible;
        for r in &g.rules {
            if r.kind == RuleKind::Choice {
                let h = r.head.expect("choice rules have a head");
                if complement[h].is_none() {
                    complement[h] = Some(next);
                    next += 1;
                }
            }
        }
        let mut rules = Vec::with_capacity(g.rules.len());
        let mut choice_guards = vec![Vec::new(); visible];
        for r in &g.rules {
            match r.kind {
                RuleKind::Normal | RuleKind::Constraint => rules.push(NRule {
                    head: r.head,
                    pos: r.positive.clone(),
                    neg: r.negative.clone(),
                }),
                RuleKind::Choice => {
                    let h = r.head.expect("choice rules have a head");
                    let n = complement[h].expect("complement allocated");
                    let mut neg = r.negative.clone();
                    neg.push(n);
                    rules.push(NRule {
                        head: Some(h),
                        pos: r.positive.clone(),
                        neg,
                    });
                    let mut neg = r.negative.clone();
                    neg.push(h);
                    rules.push(NRule {
                        head: Some(n),
                        pos: r.positive.clone(),
                        neg,
                    });
                    choice_guards[h].push(rules.len() - 1);
                }
            }
        }
        let mut heads_of = vec![Vec::new(); next];
        let mut body_of = vec![Vec::new(); next];
        for (i, r) in rules.iter().enumerate() {
            if let Some(h) = r.head {
                heads_of[h].push(i);
            }
            for &a in r.pos.iter().chain(&r.neg) {
                if body_of[a].last() != Some(&i) {
                    body_of[a].push(i);
                }
            }
        }
        Normal {
            visible,
            atoms: next,
            rules,
            heads_of,
            body_of,
            minimize: g.minimize.iter().copied().collect(),
            complement,
            choice_guards,
        }
    }

    /// Least model of the reduct with respect to `model`.
    fn reduct_least_model(&self, model: &[bool]) -> Vec<bool> {
        let mut derived = vec![false; self.atoms];
        let mut missing: Vec<usize> = Vec::with_capacity(self.rules.len());
        let mut queue = Vec::new();
        for r in &self.rules {
            let active = r.head.is_some() && r.neg.iter().all(|&a| !model[a]);
            missing.push(if active { r.pos.len() } else { usize::MAX });
        }
        for (i, r) in self.rules.iter().enumerate() {
            if missing[i] == 0 {
                let h = r.head.unwrap();
                if !derived[h] {
                    derived[h] = true;
                    queue.push(h);
                }
            }
        }
        while let Some(a) = queue.pop() {
            for &ri in &self.body_of[a] {
                if missing[ri] == usize::MAX {
                    continue;
                }
                let r = &self.rules[ri];
                let hits = r.pos.iter().filter(|&&p| p == a).count();
                if hits == 0 {
                    continue;
                }
                missing[ri] -= hits;
                if missing[ri] == 0 {
                    let h = r.head.unwrap();
                    if !derived[h] {
                        derived[h] = true;
                        queue.push(h);
                    }
                }
            }
        }
        derived
    }

    fn is_stable(&self, model: &[bool]) -> bool {
        let violated = self.rules.iter().any(|r| {
            r.head.is_none() && r.pos.iter().all(|&a| model[a]) && r.neg.iter().all(|&a| !model[a])
        });
        !violated && self.reduct_least_model(model) == model
    }
}

/// Tests whether `candidate` is an answer set of `ground`. Choice atoms are
/// free whenever one of their guards holds.
pub fn check_stable_model(ground: &GroundProgram, candidate: &BTreeSet<Atom>) -> bool {
    let normal = Normal::new(ground);
    let mut model = vec![false; normal.atoms];
    for a in candidate {
        match ground.index_of(a) {
            Some(i) => model[i] = true,
            None => return false,
        }
    }
    for h in 0..normal.visible {
        if let Some(n) = normal.complement[h] {
            if !model[h] {
                model[n] = normal.choice_guards[h].iter().any(|&ri| {
                    let r = &normal.rules[ri];
                    r.pos.iter().all(|&a| model[a]) && r.neg.iter().all(|&a| a == h || !model[a])
                });
            }
        }
    }
    normal.is_stable(&model)
}

enum Flow {
    Continue,
    Stop,
}

/// Configurable enumeration of answer sets.
pub struct Search<'a> {
    ground: &'a GroundProgram,
    normal: Normal,
    objective: bool,
    val: Vec<i8>,
    trail: Vec<usize>,
    queue: Vec<usize>,
    is_min: Vec<bool>,
    true_min: usize,
    /// Atoms occurring under negation; fixing them fixes the reduct.
    branch: Vec<usize>,
    bound: usize,
}

impl<'a> Search<'a> {
    pub fn new(ground: &'a GroundProgram) -> Self {
        let normal = Normal::new(ground);
        let mut is_min = vec![false; normal.atoms];
        for &m in &normal.minimize {
            is_min[m] = true;
        }
        let mut negated = vec![false; normal.atoms];
        for r in &normal.rules {
            for &a in &r.neg {
                negated[a] = true;
            }
        }
        let branch = (0..normal.atoms).filter(|&a| negated[a]).collect();
        Search {
            ground,
            val: vec![UNKNOWN; normal.atoms],
            normal,
            objective: true,
            trail: Vec::new(),
            queue: Vec::new(),
            is_min,
            true_min: 0,
            branch,
            bound: usize::MAX,
        }
    }

    pub fn ignore_objective(mut self) -> Self {
        self.objective = false;
        self
    }

    fn has_objective(&self) -> bool {
        self.objective && !self.normal.minimize.is_empty()
    }

    /// Some answer set; an optimal one when the objective is active.
    pub fn first(mut self) -> Option<AnswerSet> {
        if self.has_objective() {
            return self.optimal(1).into_iter().next();
        }
        let mut out = None;
        self.run(usize::MAX, &mut |s| {
            out = Some(s);
            Flow::Stop
        });
        out
    }

    /// Up to `limit` answer sets of minimum cost.
    pub fn optimal(&mut self, limit: usize) -> Vec<AnswerSet> {
        if !self.has_objective() {
            return self.collect_upto(usize::MAX, limit);
        }
        let Some(best) = self.optimum() else {
            return vec![];
        };
        self.collect_upto(best, limit)
    }

    /// Up to `limit` answer sets, cheapest cost level first.
    pub fn all(&mut self, limit: usize) -> Vec<AnswerSet> {
        if !self.has_objective() {
            return self.collect_upto(usize::MAX, limit);
        }
        let Some(best) = self.optimum() else {
            return vec![];
        };
        let mut out = Vec::new();
        for level in best..=self.normal.minimize.len() {
            if out.len() >= limit {
                break;
            }
            let remaining = limit - out.len();
            let mut found = Vec::new();
            self.run(level, &mut |s| {
                if s.cost == level {
                    found.push(s);
                }
                if found.len() >= remaining {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            });
            out.extend(found);
        }
        out
    }

    /// Minimum cost over all answer sets, found by branch and bound.
    pub fn optimum(&mut self) -> Option<usize> {
        let mut best: Option<usize> = None;
        let mut bound = usize::MAX;
        loop {
            let mut found = None;
            self.run(bound, &mut |s| {
                found = Some(s.cost);
                Flow::Stop
            });
            match found {
                Some(c) => {
                    best = Some(c);
                    if c == 0 {
                        return best;
                    }
                    bound = c - 1;
                }
                None => return best,
            }
        }
    }

    fn collect_upto(&mut self, bound: usize, limit: usize) -> Vec<AnswerSet> {
        let mut out = Vec::new();
        if limit == 0 {
            return out;
        }
        self.run(bound, &mut |s| {
            out.push(s);
            if out.len() >= limit {
                Flow::Stop
            } else {
                Flow::Continue
            }
        });
        out
    }

    fn reset(&mut self) {
        self.val.iter_mut().for_each(|v| *v = UNKNOWN);
        self.trail.clear();
        self.queue.clear();
        self.true_min = 0;
    }

    fn assign(&mut self, atom: usize, value: i8) -> bool {
        let cur = self.val[atom];
        if cur == value {
            return true;
        }
        if cur != UNKNOWN {
            return false;
        }
        self.val[atom] = value;
        if value == TRUE && self.is_min[atom] {
            self.true_min += 1;
        }
        self.trail.push(atom);
        self.queue.push(atom);
        true
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let a = self.trail.pop().unwrap();
            if self.val[a] == TRUE && self.is_min[a] {
                self.true_min -= 1;
            }
            self.val[a] = UNKNOWN;
        }
        self.queue.clear();
    }

    fn lit_value(&self, atom: usize, positive: bool) -> i8 {
        let v = self.val[atom];
        if positive {
            v
        } else {
            -v
        }
    }

    /// Forward and backward inference on a single rule.
    fn check_rule(&mut self, ri: usize) -> bool {
        let r = &self.normal.rules[ri];
        let mut unknown: Option<(usize, bool)> = None;
        let mut unknown_count = 0;
        for (&a, positive) in r
            .pos
            .iter()
            .map(|a| (a, true))
            .chain(r.neg.iter().map(|a| (a, false)))
        {
            match self.lit_value(a, positive) {
                FALSE => return true,
                UNKNOWN => {
                    unknown_count += 1;
                    unknown = Some((a, positive));
                }
                _ => {}
            }
        }
        let head_false = match r.head {
            None => true,
            Some(h) => self.val[h] == FALSE,
        };
        if unknown_count == 0 {
            return match r.head {
                None => false,
                Some(h) => self.assign(h, TRUE),
            };
        }
        if unknown_count == 1 && head_false {
            let (a, positive) = unknown.unwrap();
            return self.assign(a, if positive { FALSE } else { TRUE });
        }
        true
    }

    fn body_not_false(&self, r: &NRule) -> bool {
        r.pos.iter().all(|&a| self.val[a] != FALSE) && r.neg.iter().all(|&a| self.val[a] != TRUE)
    }

    /// Falsifies atoms that cannot be founded, and forces the body of the
    /// sole remaining support of a true atom.
    fn unfounded(&mut self) -> bool {
        let n = self.normal.atoms;
        let rules = &self.normal.rules;
        let mut possible = vec![false; n];
        let mut missing = vec![usize::MAX; rules.len()];
        let mut queue = Vec::new();
        for (i, r) in rules.iter().enumerate() {
            let Some(h) = r.head else { continue };
            if self.body_not_false(r) {
                missing[i] = r.pos.len();
                if missing[i] == 0 && !possible[h] {
                    possible[h] = true;
                    queue.push(h);
                }
            }
        }
        while let Some(a) = queue.pop() {
            for &ri in &self.normal.body_of[a] {
                if missing[ri] == usize::MAX {
                    continue;
                }
                let r = &rules[ri];
                let hits = r.pos.iter().filter(|&&p| p == a).count();
                if hits == 0 {
                    continue;
                }
                missing[ri] -= hits;
                if missing[ri] == 0 {
                    let h = r.head.unwrap();
                    if !possible[h] {
                        possible[h] = true;
                        queue.push(h);
                    }
                }
            }
        }
        for (a, &ok) in possible.iter().enumerate() {
            if !ok && !self.assign(a, FALSE) {
                return false;
            }
        }
        for a in 0..n {
            if self.val[a] != TRUE {
                continue;
            }
            let mut support = None;
            let mut count = 0;
            for &ri in &self.normal.heads_of[a] {
                if self.body_not_false(&self.normal.rules[ri]) {
                    count += 1;
                    support = Some(ri);
                }
            }
            match (count, support) {
                (0, _) => return false,
                (1, Some(ri)) => {
                    let r = self.normal.rules[ri].clone();
                    for &p in &r.pos {
                        if !self.assign(p, TRUE) {
                            return false;
                        }
                    }
                    for &q in &r.neg {
                        if !self.assign(q, FALSE) {
                            return false;
                        }
                    }
                }
                _ => {}
            }
        }
        true
    }

    fn propagate(&mut self, all_rules: bool) -> bool {
        if all_rules {
            for ri in 0..self.normal.rules.len() {
                if !self.check_rule(ri) {
                    return false;
                }
            }
        }
        loop {
            while let Some(a) = self.queue.pop() {
                for k in 0..self.normal.heads_of[a].len() {
                    let ri = self.normal.heads_of[a][k];
                    if !self.check_rule(ri) {
                        return false;
                    }
                }
                for k in 0..self.normal.body_of[a].len() {
                    let ri = self.normal.body_of[a][k];
                    if !self.check_rule(ri) {
                        return false;
                    }
                }
            }
            let before = self.trail.len();
            if self.objective && self.true_min > self.bound {
                return false;
            }
            // At the bound, every open minimize atom must stay false.
            if self.objective && self.true_min == self.bound {
                for k in 0..self.normal.minimize.len() {
                    let m = self.normal.minimize[k];
                    if self.val[m] == UNKNOWN {
                        self.assign(m, FALSE);
                    }
                }
                if self.trail.len() != before {
                    continue;
                }
            }
            if !self.unfounded() {
                return false;
            }
            if self.trail.len() == before {
                return true;
            }
        }
    }

    fn pick(&self) -> Option<usize> {
        self.branch
            .iter()
            .copied()
            .find(|&a| self.val[a] == UNKNOWN)
    }

    /// The answer set fixed by the current values of negated atoms, if the
    /// rest of the assignment agrees with it.
    fn leaf(&self) -> Option<Vec<bool>> {
        let guess: Vec<bool> = self.val.iter().map(|&v| v == TRUE).collect();
        let model = self.normal.reduct_least_model(&guess);
        let agrees = self
            .val
            .iter()
            .zip(&model)
            .all(|(&v, &m)| v == UNKNOWN || (v == TRUE) == m);
        (agrees && self.normal.is_stable(&model)).then_some(model)
    }

    fn answer(&self, model: &[bool]) -> AnswerSet {
        let atoms = (0..self.normal.visible)
            .filter(|&a| model[a])
            .map(|a| self.ground.atom(a).clone())
            .collect();
        AnswerSet {
            atoms,
            cost: self.normal.minimize.iter().filter(|&&m| model[m]).count(),
        }
    }

    /// Depth-first enumeration of answer sets of cost at most `bound`,
    /// branching on the first unassigned negated atom, false first.
    fn run(&mut self, bound: usize, visit: &mut dyn FnMut(AnswerSet) -> Flow) {
        self.reset();
        self.bound = bound;
        let mut decisions: Vec<(usize, usize, bool)> = Vec::new();
        let mut ok = self.propagate(true);
        loop {
            if ok && self.objective && self.true_min > bound {
                ok = false;
            }
            if ok {
                match self.pick() {
                    Some(a) => {
                        decisions.push((a, self.trail.len(), false));
                        ok = self.assign(a, FALSE) && self.propagate(false);
                        continue;
                    }
                    None => {
                        if let Some(model) = self.leaf() {
                            let s = self.answer(&model);
                            if !(self.objective && s.cost > bound) {
                                if let Flow::Stop = visit(s) {
                                    return;
                                }
                            }
                        }
                    }
                }
            }
            // Backtrack to the most recent decision still having its true branch.
            loop {
                let Some((a, mark, flipped)) = decisions.pop() else {
                    return;
                };
                self.undo_to(mark);
                if !flipped {
                    decisions.push((a, mark, true));
                    ok = self.assign(a, TRUE) && self.propagate(false);
                    break;
                }
            }
        }
    }
}

/// Up to `limit` answer sets, all optimal ones first when there is an objective.
pub fn answer_sets(ground: &GroundProgram, limit: usize) -> Vec<AnswerSet> {
    Search::new(ground).all(limit)
}

/// Up to `limit` answer sets of optimal cost.
pub fn optimal_answer_sets(ground: &GroundProgram, limit: usize) -> Vec<AnswerSet> {
    Search::new(ground).optimal(limit)
}
