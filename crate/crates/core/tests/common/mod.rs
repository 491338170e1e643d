//! Seeded generators and brute-force reference implementations shared by
//! the integration tests.

#![allow(dead_code)]

pub mod criteria;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use abalearn::model::{AbaFramework, Atom, LearningProblem, NormalizedRule, Substitution, Term};
use abalearn::solver::{AspProgram, AspRule, RuleKind};
use abalearn::syntax::{parse_framework, parse_problem};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const CONSTANTS: [&str; 3] = ["a", "b", "c"];
const VARS: [&str; 2] = ["X", "Y"];

#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_universe: usize,
    pub max_rules: usize,
    pub max_assumptions: usize,
    pub max_examples: usize,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_universe: 3,
            max_rules: 10,
            max_assumptions: 3,
            max_examples: 2,
        }
    }
}

/// Predicate signature of a generated framework.
#[derive(Clone, Debug)]
pub struct Signature {
    pub universe: Vec<&'static str>,
    /// Non-assumption predicates with their arities.
    pub plain: Vec<(String, usize)>,
    /// Assumption predicates (arity 0 or 1) with their contrary predicate.
    pub assumptions: Vec<(String, usize, String)>,
}

impl Signature {
    pub fn random(r: &mut ChaCha8Rng, shape: &Shape) -> Self {
        let n = r.random_range(1..=shape.max_universe);
        let universe = CONSTANTS[..n].to_vec();
        let plain: Vec<(String, usize)> = (0..r.random_range(2..=4))
            .map(|i| {
                (
                    format!("p{i}"),
                    if r.random_bool(0.15) {
                        2
                    } else {
                        r.random_range(0..=1)
                    },
                )
            })
            .collect();
        let mut assumptions = Vec::new();
        for i in 0..r.random_range(0..=shape.max_assumptions) {
            let arity = r.random_range(0..=1);
            let fitting: Vec<&(String, usize)> =
                plain.iter().filter(|(_, k)| *k == arity).collect();
            let contrary = match fitting.choose(r) {
                Some((p, _)) => p.clone(),
                None => format!("c{i}"),
            };
            assumptions.push((format!("a{i}"), arity, contrary));
        }
        Signature {
            universe,
            plain,
            assumptions,
        }
    }

    fn all_preds(&self) -> Vec<(String, usize)> {
        self.plain
            .iter()
            .cloned()
            .chain(self.assumptions.iter().map(|(a, k, _)| (a.clone(), *k)))
            .collect()
    }

    fn term(&self, r: &mut ChaCha8Rng, vars: &[&str]) -> String {
        if !vars.is_empty() && r.random_bool(0.75) {
            vars.choose(r).unwrap().to_string()
        } else {
            self.universe.choose(r).unwrap().to_string()
        }
    }

    fn atom(&self, r: &mut ChaCha8Rng, pred: &str, arity: usize, vars: &[&str]) -> String {
        if arity == 0 {
            return pred.to_string();
        }
        let args: Vec<String> = (0..arity).map(|_| self.term(r, vars)).collect();
        format!("{pred}({})", args.join(", "))
    }

    pub fn rule(&self, r: &mut ChaCha8Rng) -> String {
        let (head, arity) = self.plain.choose(r).unwrap().clone();
        let nvars = r.random_range(0..=2);
        let vars = &VARS[..nvars];
        let preds = self.all_preds();
        let mut body: Vec<String> = (0..r.random_range(0..=3))
            .map(|_| {
                let (p, k) = preds.choose(r).unwrap();
                self.atom(r, p, *k, vars)
            })
            .collect();
        if !vars.is_empty() && r.random_bool(0.2) {
            body.push(format!(
                "{} = {}",
                vars.choose(r).unwrap(),
                self.universe.choose(r).unwrap()
            ));
        }
        // Head variables must occur in the body.
        let bound: Vec<&str> = vars
            .iter()
            .copied()
            .filter(|v| body.iter().any(|b| b.contains(v)))
            .collect();
        let h = self.atom(r, &head, arity, &bound);
        if body.is_empty() {
            format!("{h}.")
        } else {
            format!("{h} :- {}.", body.join(", "))
        }
    }

    pub fn declarations(&self) -> String {
        let mut out = String::new();
        for (a, k, c) in &self.assumptions {
            let (sa, sc) = if *k == 0 {
                (a.clone(), c.clone())
            } else {
                (format!("{a}(X)"), format!("{c}(X)"))
            };
            let _ = writeln!(out, "#assumption {sa}.\n#contrary {sa}, {sc}.");
        }
        let _ = writeln!(out, "#constant {}.", self.universe.join(", "));
        out
    }

    pub fn ground_atoms(&self, preds: &[(String, usize)]) -> Vec<String> {
        let mut out = Vec::new();
        for (p, k) in preds {
            match k {
                0 => out.push(p.clone()),
                1 => out.extend(self.universe.iter().map(|c| format!("{p}({c})"))),
                _ => {
                    for x in &self.universe {
                        for y in &self.universe {
                            out.push(format!("{p}({x}, {y})"));
                        }
                    }
                }
            }
        }
        out
    }
}

/// A random framework in `.aba` syntax.
pub fn framework_text(r: &mut ChaCha8Rng, shape: &Shape) -> (Signature, String) {
    let sig = Signature::random(r, shape);
    let mut text = String::new();
    for _ in 0..r.random_range(1..=shape.max_rules) {
        let _ = writeln!(text, "{}", sig.rule(r));
    }
    text.push_str(&sig.declarations());
    (sig, text)
}

pub fn framework(seed: u64, shape: &Shape) -> AbaFramework {
    let mut r = rng(seed);
    let (_, text) = framework_text(&mut r, shape);
    parse_framework(&text)
        .unwrap_or_else(|e| panic!("generated framework does not parse: {e}\n{text}"))
}

/// A random framework together with disjoint positive and negative examples.
pub fn framework_with_examples(
    seed: u64,
    shape: &Shape,
) -> (AbaFramework, BTreeSet<Atom>, BTreeSet<Atom>) {
    let mut r = rng(seed);
    let (sig, text) = framework_text(&mut r, shape);
    let fw = parse_framework(&text)
        .unwrap_or_else(|e| panic!("generated framework does not parse: {e}\n{text}"));
    let mut candidates = sig.ground_atoms(&sig.plain);
    candidates.shuffle(&mut r);
    let n = r.random_range(0..=shape.max_examples.min(candidates.len()));
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for c in candidates.into_iter().take(n) {
        let atom = parse_atom(&c);
        if r.random_bool(0.5) {
            pos.insert(atom);
        } else {
            neg.insert(atom);
        }
    }
    (fw, pos, neg)
}

/// A random learning problem: unary learnable predicates, fresh or taken
/// from the background, with at most two examples.
pub fn problem_text(seed: u64) -> String {
    let mut r = rng(seed);
    let shape = Shape {
        max_rules: 6,
        max_assumptions: 2,
        ..Shape::default()
    };
    let sig = Signature::random(&mut r, &shape);
    let mut text = String::new();
    for _ in 0..r.random_range(1..=shape.max_rules) {
        let _ = writeln!(text, "{}", sig.rule(&mut r));
    }
    // The learnable predicates: `t0` is new, `t1` may be used by the background.
    let t1_in_body = r.random_bool(0.5);
    if t1_in_body {
        let p = sig
            .plain
            .iter()
            .find(|(_, k)| *k == 1)
            .map_or("q", |(p, _)| p.as_str());
        let _ = writeln!(text, "{p}(X) :- t1(X).");
    }
    text.push_str(&sig.declarations());
    let learnables = [("t0", 1usize), ("t1", 1usize)];
    let mut candidates = sig.ground_atoms(
        &learnables
            .iter()
            .map(|(p, k)| (p.to_string(), *k))
            .collect::<Vec<_>>(),
    );
    candidates.shuffle(&mut r);
    let n = r.random_range(1..=2usize);
    for (i, c) in candidates.into_iter().take(n).enumerate() {
        let kind = if i == 0 || r.random_bool(0.5) {
            "positive"
        } else {
            "negative"
        };
        let _ = writeln!(text, "#{kind} {c}.");
    }
    text.push_str("#learnable t0/1, t1/1.\n");
    text
}

pub fn problem(seed: u64) -> LearningProblem {
    let text = problem_text(seed);
    parse_problem(&text).unwrap_or_else(|e| panic!("generated problem does not parse: {e}\n{text}"))
}

pub fn parse_atom(text: &str) -> Atom {
    match text.split_once('(') {
        None => Atom::new(text, vec![]),
        Some((p, rest)) => {
            let args: Vec<&str> = rest
                .trim_end_matches(')')
                .split(',')
                .map(str::trim)
                .collect();
            Atom::parse_args(p, &args)
        }
    }
}

// ---------------------------------------------------------------------------
// Reference grounding and argument semantics.

/// Every ground instance of `rule` over `universe` whose equalities hold.
pub fn ground_instances(rule: &NormalizedRule, universe: &[String]) -> Vec<(Atom, Vec<Atom>)> {
    let vars = rule.vars();
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if !vars.is_empty() && universe.is_empty() {
        return out;
    }
    loop {
        let s: Substitution = vars
            .iter()
            .zip(&idx)
            .map(|(v, &i)| (v.clone(), Term::constant(&universe[i])))
            .collect();
        let holds = rule
            .equalities
            .iter()
            .all(|e| e.left.apply(&s) == e.right.apply(&s));
        if holds {
            out.push((
                rule.head.apply(&s),
                rule.body.iter().map(|a| a.apply(&s)).collect(),
            ));
        }
        let mut k = 0;
        loop {
            if k == idx.len() {
                return out;
            }
            idx[k] += 1;
            if idx[k] < universe.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// A ground framework with assumptions numbered for bitmask supports.
pub struct Ground {
    pub rules: Vec<(Atom, Vec<Atom>)>,
    pub assumptions: Vec<Atom>,
}

pub fn ground_framework(fw: &AbaFramework) -> Ground {
    let universe: Vec<String> = fw.universe.iter().map(|c| c.to_string()).collect();
    let mut rules = Vec::new();
    for r in fw.rules.iter().chain(&fw.dom_rules()) {
        rules.extend(ground_instances(r, &universe));
    }
    let mut assumptions = BTreeSet::new();
    for a in &fw.assumptions {
        let rule = NormalizedRule::new(a.clone(), vec![], vec![]);
        for (inst, _) in ground_instances(&rule, &universe) {
            assumptions.insert(inst);
        }
    }
    Ground {
        rules,
        assumptions: assumptions.into_iter().collect(),
    }
}

/// Every support set of every derivable sentence, without minimisation.
pub fn all_supports(g: &Ground) -> BTreeMap<Atom, BTreeSet<u64>> {
    assert!(
        g.assumptions.len() <= 20,
        "too many ground assumptions for exhaustive supports"
    );
    let mut table: BTreeMap<Atom, BTreeSet<u64>> = BTreeMap::new();
    for (i, a) in g.assumptions.iter().enumerate() {
        table.entry(a.clone()).or_default().insert(1 << i);
    }
    loop {
        let mut changed = false;
        for (h, body) in &g.rules {
            let mut combos: BTreeSet<u64> = [0].into_iter().collect();
            for b in body {
                let Some(sups) = table.get(b) else {
                    combos.clear();
                    break;
                };
                combos = combos
                    .iter()
                    .flat_map(|c| sups.iter().map(move |s| c | s))
                    .collect();
            }
            let slot = table.entry(h.clone()).or_default();
            for c in combos {
                changed |= slot.insert(c);
            }
        }
        if !changed {
            return table;
        }
    }
}

pub fn mask_of(g: &Ground, support: &BTreeSet<Atom>) -> u64 {
    support
        .iter()
        .map(|a| {
            1u64 << g
                .assumptions
                .iter()
                .position(|b| b == a)
                .expect("support is an assumption")
        })
        .sum()
}

// ---------------------------------------------------------------------------
// Reference answer-set semantics for propositional programs.

pub fn prop(i: usize) -> Atom {
    Atom::new(&format!("x{i}"), vec![])
}

/// A random propositional program over at most `max_atoms` atoms, with
/// normal rules, constraints, choice rules and an optional objective.
pub fn ground_program(seed: u64, max_atoms: usize) -> (usize, AspProgram) {
    let mut r = rng(seed);
    let n = r.random_range(1..=max_atoms);
    let mut p = AspProgram::new(BTreeSet::new());
    p.synthesize_dom = false;
    let pick = |r: &mut ChaCha8Rng, k: usize| -> Vec<Atom> {
        (0..k).map(|_| prop(r.random_range(0..n))).collect()
    };
    for _ in 0..r.random_range(1..=2 * n) {
        let kind = r.random_range(0..10);
        let pos_len = r.random_range(0..=2);
        let neg_len = r.random_range(0..=2);
        let positive = pick(&mut r, pos_len);
        let rule = match kind {
            0 => AspRule::constraint(positive, pick(&mut r, neg_len)),
            1 | 2 => AspRule::choice(prop(r.random_range(0..n)), positive),
            _ => AspRule::normal(prop(r.random_range(0..n)), positive, pick(&mut r, neg_len)),
        };
        p.push(rule);
    }
    if r.random_bool(0.6) {
        for i in 0..n {
            if r.random_bool(0.5) {
                p.minimize.push(prop(i));
            }
        }
    }
    (n, p)
}

/// Answer sets by enumerating every interpretation and checking it against
/// the least model of its reduct.
pub fn brute_force_answer_sets(n: usize, p: &AspProgram) -> Vec<(BTreeSet<Atom>, usize)> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let m: BTreeSet<Atom> = (0..n).filter(|i| mask & (1 << i) != 0).map(prop).collect();
        let body_holds = |r: &AspRule| {
            r.positive.iter().all(|a| m.contains(a)) && r.negative.iter().all(|a| !m.contains(a))
        };
        if p.rules
            .iter()
            .any(|r| r.kind == RuleKind::Constraint && body_holds(r))
        {
            continue;
        }
        // Reduct: normal rules whose negative body is false in m, and choice
        // rules whose head is in m, both without negation.
        let reduct: Vec<(&Atom, &Vec<Atom>)> = p
            .rules
            .iter()
            .filter(|r| match r.kind {
                RuleKind::Normal => r.negative.iter().all(|a| !m.contains(a)),
                RuleKind::Choice => m.contains(r.head.as_ref().unwrap()),
                RuleKind::Constraint => false,
            })
            .map(|r| (r.head.as_ref().unwrap(), &r.positive))
            .collect();
        let mut least: BTreeSet<Atom> = BTreeSet::new();
        loop {
            let before = least.len();
            for (h, body) in &reduct {
                if body.iter().all(|a| least.contains(a)) {
                    least.insert((*h).clone());
                }
            }
            if least.len() == before {
                break;
            }
        }
        if least == m {
            let cost = m.iter().filter(|a| p.minimize.contains(a)).count();
            out.push((m, cost));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Random single-fold steps.

/// A framework containing a target rule and a folder rule whose body and
/// equalities are taken from the target, so that folding applies.
pub fn fold_instance(seed: u64) -> (AbaFramework, NormalizedRule, NormalizedRule) {
    let mut r = rng(seed);
    let shape = Shape {
        max_rules: 5,
        ..Shape::default()
    };
    let sig = Signature::random(&mut r, &shape);
    let preds = sig.all_preds();
    let (head, arity) = sig.plain.choose(&mut r).unwrap().clone();
    let vars = &VARS[..r.random_range(1..=2)];
    let mut body: Vec<String> = (0..r.random_range(1..=3))
        .map(|_| {
            let (p, k) = preds.choose(&mut r).unwrap();
            sig.atom(&mut r, p, *k, vars)
        })
        .collect();
    body.sort();
    body.dedup();
    let mut eqs = Vec::new();
    if r.random_bool(0.5) {
        eqs.push(format!(
            "{} = {}",
            vars[0],
            sig.universe.choose(&mut r).unwrap()
        ));
    }
    let bound: Vec<&str> = vars
        .iter()
        .copied()
        .filter(|v| body.iter().chain(&eqs).any(|b| b.contains(v)))
        .collect();
    let target_head = sig.atom(&mut r, &head, arity, &bound);
    let target = format!(
        "{target_head} :- {}.",
        eqs.iter()
            .chain(&body)
            .cloned()
            .collect::<Vec<_>>()
            .join(", ")
    );
    // Folder: a non-empty subset of the body plus some of the equalities.
    let mut b1: Vec<String> = body
        .iter()
        .filter(|_| r.random_bool(0.6))
        .cloned()
        .collect();
    if b1.is_empty() {
        b1.push(body[0].clone());
    }
    let e1: Vec<String> = eqs.iter().filter(|_| r.random_bool(0.7)).cloned().collect();
    let fvars: Vec<&str> = vars
        .iter()
        .copied()
        .filter(|v| b1.iter().chain(&e1).any(|a| a.contains(v)))
        .collect();
    let k_args = if fvars.is_empty() || r.random_bool(0.2) {
        String::from("k")
    } else {
        format!("k({})", fvars.join(", "))
    };
    let folder = format!(
        "{k_args} :- {}.",
        e1.iter().chain(&b1).cloned().collect::<Vec<_>>().join(", ")
    );
    let mut text = String::new();
    for _ in 0..r.random_range(0..=shape.max_rules) {
        let _ = writeln!(text, "{}", sig.rule(&mut r));
    }
    let _ = writeln!(text, "{target}\n{folder}");
    text.push_str(&sig.declarations());
    let fw = parse_framework(&text)
        .unwrap_or_else(|e| panic!("generated fold instance does not parse: {e}\n{text}"));
    let n = fw.rules.len();
    let t = fw.rules[n - 2].clone();
    let f = fw.rules[n - 1].clone();
    (fw, t, f)
}

/// Folds the target of `fold_instance(seed)` with its folder and checks that
/// every minimal (claim, support) pair of the original framework is still
/// derivable from exactly the same support. Returns the number of pairs
/// checked, or `None` when no fold applies.
pub fn fold_preserves_arguments(seed: u64) -> Option<Result<usize, String>> {
    let (fw, target, folder) = fold_instance(seed);
    let results = abalearn::transform::fold_with(&target, &folder);
    if results.is_empty() {
        return None;
    }
    let before = abalearn::oracle::supports(&fw).expect("supports");
    let mut checked = 0;
    for folded in results {
        let mut after = fw.clone();
        let i = after
            .rules
            .iter()
            .position(|r| r == &target)
            .expect("target present");
        after.rules[i] = folded.clone();
        let g = ground_framework(&after);
        let table = all_supports(&g);
        for (claim, slot) in &before {
            for support in slot.keys() {
                checked += 1;
                let ok = table
                    .get(claim)
                    .is_some_and(|s| s.contains(&mask_of(&g, support)));
                if !ok {
                    return Some(Err(format!(
                        "seed {seed}: {claim} with support {support:?} lost after folding `{target}` into `{folded}` with `{folder}`"
                    )));
                }
            }
        }
    }
    Some(Ok(checked))
}

/// Enumerates every fold of a random foldable rule against a random
/// rulebase and checks each result against the step bound.
pub fn fold_within_bound(seed: u64) -> Result<(), String> {
    use abalearn::transform::{FoldEnumerator, FoldOutcome, FoldPolicy, Rulebase};
    let mut r = rng(seed);
    let (sig, text) = framework_text(&mut r, &Shape::default());
    let fw = parse_framework(&text).map_err(|e| e.to_string())?;
    let atoms = sig.ground_atoms(&sig.plain);
    let target = NormalizedRule::fact(&parse_atom(atoms.choose(&mut r).unwrap()));
    let rulebase = Rulebase::for_target(&fw, &[], &target);
    let policy = FoldPolicy {
        allow_exhausted: true,
        ..FoldPolicy::default()
    };
    let mut e = FoldEnumerator::new(target.clone(), rulebase, fw.universe.len(), policy);
    let bound = e.bound();
    let mut exhausted = 0;
    for outcome in e.by_ref() {
        match outcome {
            FoldOutcome::Folded { rule, trace } => {
                if trace.steps.len() > bound || !trace.is_bounded(&target) {
                    return Err(format!("seed {seed}: `{rule}` exceeds the bound {bound}"));
                }
                if !rule.is_intensional() {
                    return Err(format!("seed {seed}: `{rule}` is not intensional"));
                }
            }
            FoldOutcome::Exhausted(_) => exhausted += 1,
        }
    }
    // A rule with nothing to fold comes back unchanged, with no fallback.
    let expected = usize::from(abalearn::transform::foldable(&target));
    if exhausted != expected {
        return Err(format!(
            "seed {seed}: expected {expected} final fallback, got {exhausted}"
        ));
    }
    if e.max_depth > bound {
        return Err(format!(
            "seed {seed}: depth {} exceeds the bound {bound}",
            e.max_depth
        ));
    }
    Ok(())
}
