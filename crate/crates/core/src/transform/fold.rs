use std::collections::{BTreeSet, HashMap};

use crate::model::{
    is_variant, AbaFramework, Atom, BodyLiteral, Equality, EqualityClasses, NormalizedRule,
    Substitution, Symbol, Term,
};

/// Where a folder rule comes from; used to rank fold candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FolderSource {
    Background,
    Learned,
    Domain,
}

/// Rules available as folders, kept in canonical order.
#[derive(Clone, Debug, Default)]
pub struct Rulebase {
    entries: Vec<(NormalizedRule, FolderSource)>,
}

impl Rulebase {
    pub fn new(entries: impl IntoIterator<Item = (NormalizedRule, FolderSource)>) -> Self {
        let mut entries: Vec<(NormalizedRule, FolderSource)> = entries.into_iter().collect();
        entries.sort_by_cached_key(|(r, _)| r.canonical_key());
        Rulebase { entries }
    }

    /// Background rules of `fw`, the learned rules, and the implicit `dom`
    /// facts, excluding any variant of `target`.
    pub fn for_target(
        fw: &AbaFramework,
        learned: &[NormalizedRule],
        target: &NormalizedRule,
    ) -> Self {
        let keep = |r: &&NormalizedRule| !is_variant(r, target);
        Rulebase::new(
            fw.rules
                .iter()
                .filter(keep)
                .map(|r| (r.clone(), FolderSource::Background))
                .chain(
                    learned
                        .iter()
                        .filter(keep)
                        .map(|r| (r.clone(), FolderSource::Learned)),
                )
                .chain(
                    fw.dom_rules()
                        .into_iter()
                        .map(|r| (r, FolderSource::Domain)),
                ),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = &(NormalizedRule, FolderSource)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One way of folding a rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldCandidate {
    pub folded: NormalizedRule,
    pub folder: NormalizedRule,
    pub source: FolderSource,
    /// The folder's head as it appears in `folded`.
    pub head: Atom,
    /// Folder equalities matched against the target (after renaming).
    pub eqs1: Vec<Equality>,
    /// Folder equalities carried over with fresh variables.
    pub eqs2: Vec<Equality>,
    /// Target body atoms replaced by `head`.
    pub b1: Vec<Atom>,
    /// Target equalities left over after removing `eqs1`.
    pub residual: Vec<Equality>,
    rank: (FolderSource, usize, usize),
}

fn injective_extend(
    fwd: &mut HashMap<Symbol, Symbol>,
    used: &mut BTreeSet<Symbol>,
    from: &Atom,
    to: &Atom,
) -> bool {
    if from.pred != to.pred || from.args.len() != to.args.len() {
        return false;
    }
    for (a, b) in from.args.iter().zip(&to.args) {
        match (a, b) {
            (Term::Const(x), Term::Const(y)) if x == y => {}
            (Term::Var(x), Term::Var(y)) => match fwd.get(x) {
                Some(z) if z == y => {}
                Some(_) => return false,
                None if used.contains(y) => return false,
                None => {
                    fwd.insert(x.clone(), y.clone());
                    used.insert(y.clone());
                }
            },
            _ => return false,
        }
    }
    true
}

/// Injective matchings of every folder body atom onto distinct target atoms.
fn body_matchings(pattern: &[Atom], target: &[Atom]) -> Vec<(HashMap<Symbol, Symbol>, Vec<usize>)> {
    fn go(
        pattern: &[Atom],
        target: &[Atom],
        taken: &mut Vec<usize>,
        fwd: HashMap<Symbol, Symbol>,
        used: BTreeSet<Symbol>,
        out: &mut Vec<(HashMap<Symbol, Symbol>, Vec<usize>)>,
    ) {
        let Some((first, rest)) = pattern.split_first() else {
            out.push((fwd, taken.clone()));
            return;
        };
        for (i, t) in target.iter().enumerate() {
            if taken.contains(&i) {
                continue;
            }
            let mut f = fwd.clone();
            let mut u = used.clone();
            if injective_extend(&mut f, &mut u, first, t) {
                taken.push(i);
                go(rest, target, taken, f, u, out);
                taken.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(
        pattern,
        target,
        &mut vec![],
        HashMap::new(),
        BTreeSet::new(),
        &mut out,
    );
    out
}

/// Extends a matching to the folder variables occurring only in equalities:
/// each is either mapped to an unused target variable or kept fresh.
fn equality_extensions(
    free: &[Symbol],
    target_vars: &[Symbol],
    base: HashMap<Symbol, Symbol>,
) -> Vec<HashMap<Symbol, Symbol>> {
    let mut out = vec![base];
    for v in free {
        let mut next = Vec::new();
        for m in out {
            let used: BTreeSet<&Symbol> = m.values().collect();
            for t in target_vars.iter().filter(|t| !used.contains(t)) {
                let mut m2 = m.clone();
                m2.insert(v.clone(), t.clone());
                next.push(m2);
            }
            next.push(m);
        }
        out = next;
    }
    out
}

fn single_step(
    target: &NormalizedRule,
    folder: &NormalizedRule,
    source: FolderSource,
    index: usize,
    avoid: &BTreeSet<Symbol>,
    need_constant: bool,
) -> Vec<FoldCandidate> {
    let renamed = folder.rename_apart(avoid, "Y");
    let target_vars = target.vars();
    let mut out = Vec::new();
    for (matching, taken) in body_matchings(&renamed.body, &target.body) {
        let matched: BTreeSet<&Symbol> = matching.keys().collect();
        let free: Vec<Symbol> = renamed
            .vars()
            .into_iter()
            .filter(|v| {
                !matched.contains(v) && renamed.equalities.iter().any(|e| e.vars().any(|w| w == v))
            })
            .collect();
        for theta in equality_extensions(&free, &target_vars, matching.clone()) {
            let subst: Substitution = theta
                .iter()
                .map(|(k, v)| (k.clone(), Term::Var(v.clone())))
                .collect();
            let mut eqs1 = Vec::new();
            let mut eqs2 = Vec::new();
            let mut mixed = false;
            for e in &renamed.equalities {
                let mapped = e.vars().filter(|v| theta.contains_key(*v)).count();
                let total = e.vars().count();
                if mapped == total {
                    eqs1.push(e.apply(&subst));
                } else if mapped == 0 {
                    eqs2.push(e.clone());
                } else {
                    mixed = true;
                }
            }
            if mixed || (need_constant && !eqs1.iter().any(|e| e.constant().is_some())) {
                continue;
            }
            let classes = EqualityClasses::new(&target.equalities);
            if !eqs1.iter().all(|e| classes.entails(e)) {
                continue;
            }
            let residual = classes.residual(&eqs1);
            let head = renamed.head.apply(&subst);
            let b2: Vec<Atom> = target
                .body
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken.contains(i))
                .map(|(_, a)| a.clone())
                .collect();
            let mut body = vec![head.clone()];
            body.extend(b2);
            let mut folded = NormalizedRule::new(
                target.head.clone(),
                residual
                    .iter()
                    .cloned()
                    .chain(eqs2.iter().cloned())
                    .collect(),
                body,
            );
            folded.label = target.label.clone();
            if !folded.unbound_head_vars().is_empty() {
                continue;
            }
            let b1 = taken.iter().map(|&i| target.body[i].clone()).collect();
            out.push(FoldCandidate {
                rank: (source, residual.len(), index),
                folded,
                folder: folder.clone(),
                source,
                head,
                eqs1,
                eqs2,
                b1,
                residual,
            });
        }
    }
    out
}

/// Every single fold of `target` using a rule of `rulebase`, ranked: background
/// folders before learned ones and `dom` facts last, then fewer residual
/// equalities, then the folder's canonical position.
pub fn fold_candidates(target: &NormalizedRule, rulebase: &Rulebase) -> Vec<FoldCandidate> {
    fold_candidates_avoiding(target, rulebase, &BTreeSet::new())
}

fn fold_candidates_avoiding(
    target: &NormalizedRule,
    rulebase: &Rulebase,
    extra_avoid: &BTreeSet<Symbol>,
) -> Vec<FoldCandidate> {
    let mut avoid: BTreeSet<Symbol> = target.vars().into_iter().collect();
    avoid.extend(extra_avoid.iter().cloned());
    let mut out: Vec<FoldCandidate> = Vec::new();
    for (i, (folder, source)) in rulebase.iter().enumerate() {
        if is_variant(folder, target) {
            continue;
        }
        for c in single_step(target, folder, *source, i, &avoid, true) {
            if !out.iter().any(|o| is_variant(&o.folded, &c.folded)) {
                out.push(c);
            }
        }
    }
    out.sort_by_cached_key(|c| (c.rank, c.folded.to_string()));
    out
}

/// Every result of folding `target` with `folder`, including folds that
/// consume no equality of `target`.
pub fn fold_with(target: &NormalizedRule, folder: &NormalizedRule) -> Vec<NormalizedRule> {
    let avoid: BTreeSet<Symbol> = target.vars().into_iter().collect();
    let mut out: Vec<NormalizedRule> = Vec::new();
    for c in single_step(target, folder, FolderSource::Background, 0, &avoid, false) {
        if !out.iter().any(|o| is_variant(o, &c.folded)) {
            out.push(c.folded);
        }
    }
    out
}

/// The fold-selection test: a rule is foldable when its body has an equality
/// binding a variable to a constant.
pub fn foldable(rule: &NormalizedRule) -> bool {
    rule.has_constant_equality()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldStep {
    pub before: NormalizedRule,
    pub folder: NormalizedRule,
    pub source: FolderSource,
    pub after: NormalizedRule,
    pub head: Atom,
    pub eqs2: Vec<Equality>,
}

/// The steps of a fold sequence and the accumulated body literals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FoldTrace {
    pub steps: Vec<FoldStep>,
    pub accumulated: Vec<BodyLiteral>,
}

impl FoldTrace {
    fn start(rule: &NormalizedRule) -> Self {
        FoldTrace {
            steps: vec![],
            accumulated: rule.literals(),
        }
    }

    fn contains_atom(&self, atom: &Atom) -> bool {
        self.accumulated
            .iter()
            .any(|l| matches!(l, BodyLiteral::Atom(a) if a == atom))
    }

    fn binds_constant(&self, c: &Symbol) -> bool {
        self.accumulated
            .iter()
            .any(|l| matches!(l, BodyLiteral::Eq(e) if e.constant() == Some(c)))
    }

    fn vars(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        for l in &self.accumulated {
            match l {
                BodyLiteral::Atom(a) => out.extend(a.vars().cloned()),
                BodyLiteral::Eq(e) => out.extend(e.vars().cloned()),
            }
        }
        out
    }

    /// Whether a candidate respects the boundedness conditions: its head is
    /// not already accumulated and its carried equalities bind no constant
    /// already bound.
    pub fn admits(&self, c: &FoldCandidate) -> bool {
        !self.contains_atom(&c.head)
            && !c
                .eqs2
                .iter()
                .filter_map(Equality::constant)
                .any(|k| self.binds_constant(k))
    }

    fn push(&mut self, before: &NormalizedRule, c: &FoldCandidate) {
        for e in &c.eqs2 {
            self.accumulated.push(BodyLiteral::Eq(e.clone()));
        }
        self.accumulated.push(BodyLiteral::Atom(c.head.clone()));
        self.steps.push(FoldStep {
            before: before.clone(),
            folder: c.folder.clone(),
            source: c.source,
            after: c.folded.clone(),
            head: c.head.clone(),
            eqs2: c.eqs2.clone(),
        });
    }

    /// Replays the boundedness conditions over the recorded steps.
    pub fn is_bounded(&self, initial: &NormalizedRule) -> bool {
        let mut replay = FoldTrace::start(initial);
        for s in &self.steps {
            if replay.contains_atom(&s.head) {
                return false;
            }
            if s.eqs2
                .iter()
                .filter_map(Equality::constant)
                .any(|k| replay.binds_constant(k))
            {
                return false;
            }
            for e in &s.eqs2 {
                replay.accumulated.push(BodyLiteral::Eq(e.clone()));
            }
            replay.accumulated.push(BodyLiteral::Atom(s.head.clone()));
        }
        replay.accumulated == self.accumulated
    }
}

/// Upper bound on the length of any admissible fold sequence from `rule`.
///
/// Every step consumes a constant equality; constant equalities can only be
/// added by carried equalities over constants not yet bound, so at most once
/// per constant.
pub fn step_bound(rule: &NormalizedRule, rulebase: &Rulebase, universe: usize) -> usize {
    let initial = rule
        .equalities
        .iter()
        .filter(|e| e.constant().is_some())
        .count();
    let widest = rulebase
        .iter()
        .map(|(r, _)| r.equalities.len())
        .max()
        .unwrap_or(0);
    initial + universe.max(rule.constants().len()) * widest
}

/// Result of a fold sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FoldOutcome {
    Folded {
        rule: NormalizedRule,
        trace: FoldTrace,
    },
    /// No sequence remains; the unfolded rule is handed back.
    Exhausted(NormalizedRule),
}

impl FoldOutcome {
    pub fn rule(&self) -> &NormalizedRule {
        match self {
            FoldOutcome::Folded { rule, .. } | FoldOutcome::Exhausted(rule) => rule,
        }
    }
}

/// Limits on fold search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FoldPolicy {
    /// Hand back the unfolded rule once every sequence has been produced.
    pub allow_exhausted: bool,
    /// Maximum number of distinct folded rules produced.
    pub max_results: usize,
    /// Maximum number of partial sequences expanded.
    pub max_expansions: usize,
}

impl Default for FoldPolicy {
    fn default() -> Self {
        FoldPolicy {
            allow_exhausted: false,
            max_results: 64,
            max_expansions: 20_000,
        }
    }
}

struct Frame {
    rule: NormalizedRule,
    trace: FoldTrace,
    candidates: Vec<FoldCandidate>,
    next: usize,
}

/// Depth-first enumeration of the intensional rules reachable from a rule by
/// admissible fold sequences, in ranked order and without duplicates.
pub struct FoldEnumerator {
    initial: NormalizedRule,
    rulebase: Rulebase,
    policy: FoldPolicy,
    bound: usize,
    stack: Vec<Frame>,
    produced: Vec<NormalizedRule>,
    expansions: usize,
    started: bool,
    finished: bool,
    /// Longest sequence explored.
    pub max_depth: usize,
}

impl FoldEnumerator {
    pub fn new(
        rule: NormalizedRule,
        rulebase: Rulebase,
        universe: usize,
        policy: FoldPolicy,
    ) -> Self {
        let bound = step_bound(&rule, &rulebase, universe);
        FoldEnumerator {
            initial: rule,
            rulebase,
            policy,
            bound,
            stack: vec![],
            produced: vec![],
            expansions: 0,
            started: false,
            finished: false,
            max_depth: 0,
        }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    fn frame(&mut self, rule: NormalizedRule, trace: FoldTrace) -> Frame {
        self.expansions += 1;
        let candidates = fold_candidates_avoiding(&rule, &self.rulebase, &trace.vars())
            .into_iter()
            .filter(|c| trace.admits(c))
            .collect();
        Frame {
            rule,
            trace,
            candidates,
            next: 0,
        }
    }

    fn record(&mut self, rule: NormalizedRule, trace: FoldTrace) -> Option<FoldOutcome> {
        if self.produced.iter().any(|r| is_variant(r, &rule)) {
            return None;
        }
        self.produced.push(rule.clone());
        Some(FoldOutcome::Folded { rule, trace })
    }

    fn exhausted(&mut self) -> Option<FoldOutcome> {
        if self.finished {
            return None;
        }
        self.finished = true;
        self.stack.clear();
        self.policy
            .allow_exhausted
            .then(|| FoldOutcome::Exhausted(self.initial.clone()))
    }
}

impl Iterator for FoldEnumerator {
    type Item = FoldOutcome;

    fn next(&mut self) -> Option<FoldOutcome> {
        if self.finished {
            return None;
        }
        if !self.started {
            self.started = true;
            if !foldable(&self.initial) {
                self.finished = true;
                return Some(FoldOutcome::Folded {
                    rule: self.initial.clone(),
                    trace: FoldTrace::start(&self.initial),
                });
            }
            let f = self.frame(self.initial.clone(), FoldTrace::start(&self.initial));
            self.stack.push(f);
        }
        loop {
            if self.produced.len() >= self.policy.max_results
                || self.expansions >= self.policy.max_expansions
            {
                return self.exhausted();
            }
            let Some(top) = self.stack.last_mut() else {
                return self.exhausted();
            };
            if top.next >= top.candidates.len() {
                self.stack.pop();
                continue;
            }
            let c = top.candidates[top.next].clone();
            top.next += 1;
            let mut trace = top.trace.clone();
            trace.push(&top.rule, &c);
            let depth = trace.steps.len();
            self.max_depth = self.max_depth.max(depth);
            assert!(depth <= self.bound, "fold sequence exceeded its bound");
            if !foldable(&c.folded) {
                if let Some(out) = self.record(c.folded, trace) {
                    return Some(out);
                }
                continue;
            }
            let f = self.frame(c.folded, trace);
            self.stack.push(f);
        }
    }
}

/// The first intensional rule reachable by folding, or the rule back when
/// none is.
pub fn apply_folding(rule: &NormalizedRule, rulebase: &Rulebase, universe: usize) -> FoldOutcome {
    let policy = FoldPolicy {
        allow_exhausted: true,
        ..FoldPolicy::default()
    };
    FoldEnumerator::new(rule.clone(), rulebase.clone(), universe, policy)
        .next()
        .unwrap_or_else(|| FoldOutcome::Exhausted(rule.clone()))
}
