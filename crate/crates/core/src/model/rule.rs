use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::{ordered_vars, sym, Atom, Equality, Substitution, Symbol, Term};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyLiteral {
    Atom(Atom),
    Eq(Equality),
}

/// A rule as written by a user, possibly with constants anywhere.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawRule {
    pub head: Atom,
    pub body: Vec<BodyLiteral>,
}

impl RawRule {
    pub fn fact(head: Atom) -> Self {
        RawRule { head, body: vec![] }
    }

    /// Factors every constant argument of the head and of the body atoms into a
    /// fresh variable constrained by an equality.
    pub fn normalize(&self, assumption_preds: &BTreeSet<Symbol>) -> Result<NormalizedRule> {
        if assumption_preds.contains(&self.head.pred) {
            return Err(Error::FlatnessViolation(self.head.to_string()));
        }
        let mut used: BTreeSet<Symbol> = self.head.vars().cloned().collect();
        let mut positions = self.head.constants().count();
        for lit in &self.body {
            match lit {
                BodyLiteral::Atom(a) => {
                    used.extend(a.vars().cloned());
                    positions += a.constants().count();
                }
                BodyLiteral::Eq(e) => used.extend(e.vars().cloned()),
            }
        }
        let mut fresh = FreshVars::new(used, positions == 1);
        let mut equalities = Vec::new();
        let mut lift = |atom: &Atom, equalities: &mut Vec<Equality>| {
            let args = atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(_) => t.clone(),
                    Term::Const(_) => {
                        let v = Term::Var(fresh.next());
                        equalities.push(Equality::new(v.clone(), t.clone()));
                        v
                    }
                })
                .collect();
            Atom::with_symbol(atom.pred.clone(), args)
        };
        let head = lift(&self.head, &mut equalities);
        let mut body = Vec::new();
        for lit in &self.body {
            match lit {
                BodyLiteral::Atom(a) => body.push(lift(a, &mut equalities)),
                BodyLiteral::Eq(e) => equalities.push(e.clone()),
            }
        }
        Ok(NormalizedRule::new(head, equalities, body))
    }
}

/// Generates `X`, or `X1`, `X2`, ... avoiding names already in use.
pub(crate) struct FreshVars {
    used: BTreeSet<Symbol>,
    single: bool,
    counter: usize,
}

impl FreshVars {
    pub(crate) fn new(used: BTreeSet<Symbol>, single: bool) -> Self {
        FreshVars {
            used,
            single,
            counter: 0,
        }
    }

    pub(crate) fn next(&mut self) -> Symbol {
        if self.single {
            self.single = false;
            let x = sym("X");
            if !self.used.contains(&x) {
                self.used.insert(x.clone());
                return x;
            }
        }
        loop {
            self.counter += 1;
            let name = sym(&format!("X{}", self.counter));
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}

/// `head ← equalities, body` with every constant confined to the equalities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalizedRule {
    pub head: Atom,
    pub equalities: Vec<Equality>,
    pub body: Vec<Atom>,
    pub label: Option<Symbol>,
}

impl NormalizedRule {
    /// Equalities are stored deduplicated in canonical order; body atoms keep
    /// their given order.
    pub fn new(head: Atom, mut equalities: Vec<Equality>, body: Vec<Atom>) -> Self {
        equalities.retain(|e| e.left != e.right || !e.left.is_var());
        equalities.sort();
        equalities.dedup();
        NormalizedRule {
            head,
            equalities,
            body,
            label: None,
        }
    }

    pub fn labelled(mut self, label: &str) -> Self {
        self.label = Some(sym(label));
        self
    }

    /// `p(X) ← X = t` for a ground atom `p(t)`.
    pub fn fact(atom: &Atom) -> Self {
        RawRule::fact(atom.clone())
            .normalize(&BTreeSet::new())
            .expect("no assumptions to violate")
    }

    /// All variables, head first, in order of first occurrence.
    pub fn vars(&self) -> Vec<Symbol> {
        let mut out = ordered_vars(std::iter::once(&self.head));
        let mut seen: BTreeSet<Symbol> = out.iter().cloned().collect();
        for v in self.equalities.iter().flat_map(Equality::vars) {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        for v in ordered_vars(&self.body) {
            if seen.insert(v.clone()) {
                out.push(v);
            }
        }
        out
    }

    pub fn body_vars(&self) -> BTreeSet<Symbol> {
        self.equalities
            .iter()
            .flat_map(Equality::vars)
            .chain(self.body.iter().flat_map(Atom::vars))
            .cloned()
            .collect()
    }

    pub fn unbound_head_vars(&self) -> Vec<Symbol> {
        let body = self.body_vars();
        let mut out: Vec<Symbol> = self
            .head
            .vars()
            .filter(|v| !body.contains(*v))
            .cloned()
            .collect();
        out.dedup();
        out
    }

    pub fn constants(&self) -> BTreeSet<Symbol> {
        let mut out: BTreeSet<Symbol> = self.head.constants().cloned().collect();
        for e in &self.equalities {
            out.extend(e.constant().cloned());
            if let Term::Const(c) = &e.left {
                out.insert(c.clone());
            }
        }
        for a in &self.body {
            out.extend(a.constants().cloned());
        }
        out
    }

    /// True when the rule mentions no constant at all.
    pub fn is_intensional(&self) -> bool {
        self.constants().is_empty()
    }

    /// True when the body contains an equality with a constant.
    pub fn has_constant_equality(&self) -> bool {
        self.equalities.iter().any(|e| e.constant().is_some())
    }

    /// The ground atom this rule asserts, if it has the shape `p(X) ← X = t`.
    pub fn as_ground_fact(&self) -> Option<Atom> {
        if !self.body.is_empty() {
            return None;
        }
        let mut subst = Substitution::new();
        for e in &self.equalities {
            match (&e.left, &e.right) {
                (Term::Var(v), Term::Const(_)) if !subst.contains_key(v) => {
                    subst.insert(v.clone(), e.right.clone());
                }
                _ => return None,
            }
        }
        let ground = self.head.apply(&subst);
        let head_vars: BTreeSet<&Symbol> = self.head.vars().collect();
        if !ground.is_ground() || head_vars.len() != subst.len() {
            return None;
        }
        Some(ground)
    }

    pub fn apply(&self, subst: &Substitution) -> NormalizedRule {
        NormalizedRule {
            head: self.head.apply(subst),
            equalities: {
                let mut eqs: Vec<Equality> =
                    self.equalities.iter().map(|e| e.apply(subst)).collect();
                eqs.sort();
                eqs.dedup();
                eqs
            },
            body: self.body.iter().map(|a| a.apply(subst)).collect(),
            label: self.label.clone(),
        }
    }

    /// Renames every variable with the given suffix-free generator so that no
    /// variable of the result appears in `avoid`.
    pub fn rename_apart(&self, avoid: &BTreeSet<Symbol>, prefix: &str) -> NormalizedRule {
        let mut subst = Substitution::new();
        let mut n = 0;
        for v in self.vars() {
            loop {
                n += 1;
                let name = sym(&format!("{prefix}{n}"));
                if !avoid.contains(&name) {
                    subst.insert(v.clone(), Term::Var(name));
                    break;
                }
            }
        }
        self.apply(&subst)
    }

    pub fn literals(&self) -> Vec<BodyLiteral> {
        self.equalities
            .iter()
            .cloned()
            .map(BodyLiteral::Eq)
            .chain(self.body.iter().cloned().map(BodyLiteral::Atom))
            .collect()
    }

    /// A rendering that is identical for rules equal up to variable renaming
    /// whenever variables first appear in the same positions.
    pub fn canonical_key(&self) -> String {
        let mut subst = Substitution::new();
        for (i, v) in self.vars().iter().enumerate() {
            subst.insert(v.clone(), Term::Var(sym(&format!("V{i}"))));
        }
        let renamed = self.apply(&subst);
        let mut body: Vec<String> = renamed.body.iter().map(ToString::to_string).collect();
        body.sort();
        format!(
            "{} :- {} | {}",
            renamed.head,
            renamed
                .equalities
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
            body.join(",")
        )
    }
}

impl fmt::Display for NormalizedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        let mut first = true;
        for e in &self.equalities {
            f.write_str(if first { " :- " } else { ", " })?;
            first = false;
            write!(f, "{e}")?;
        }
        for a in &self.body {
            f.write_str(if first { " :- " } else { ", " })?;
            first = false;
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Bijective variable correspondence used for variant checks.
#[derive(Clone, Debug, Default)]
pub(crate) struct Bijection {
    pub(crate) forward: HashMap<Symbol, Symbol>,
    backward: HashMap<Symbol, Symbol>,
}

impl Bijection {
    fn term(&mut self, a: &Term, b: &Term) -> bool {
        match (a, b) {
            (Term::Const(x), Term::Const(y)) => x == y,
            (Term::Var(x), Term::Var(y)) => match (self.forward.get(x), self.backward.get(y)) {
                (Some(fx), Some(by)) => fx == y && by == x,
                (None, None) => {
                    self.forward.insert(x.clone(), y.clone());
                    self.backward.insert(y.clone(), x.clone());
                    true
                }
                _ => false,
            },
            _ => false,
        }
    }

    pub(crate) fn atom(&mut self, a: &Atom, b: &Atom) -> bool {
        a.pred == b.pred
            && a.args.len() == b.args.len()
            && a.args.iter().zip(&b.args).all(|(x, y)| self.term(x, y))
    }

    fn literal(&self, a: &BodyLiteral, b: &BodyLiteral) -> Option<Bijection> {
        match (a, b) {
            (BodyLiteral::Atom(x), BodyLiteral::Atom(y)) => {
                let mut next = self.clone();
                next.atom(x, y).then_some(next)
            }
            (BodyLiteral::Eq(x), BodyLiteral::Eq(y)) => {
                let mut straight = self.clone();
                if straight.term(&x.left, &y.left) && straight.term(&x.right, &y.right) {
                    return Some(straight);
                }
                let mut crossed = self.clone();
                (crossed.term(&x.left, &y.right) && crossed.term(&x.right, &y.left))
                    .then_some(crossed)
            }
            _ => None,
        }
    }
}

/// Every bijective renaming under which `pattern` equals `target` as multisets.
pub(crate) fn match_literal_sets(
    pattern: &[BodyLiteral],
    target: &[BodyLiteral],
    start: Bijection,
) -> Vec<Bijection> {
    fn go(
        pattern: &[BodyLiteral],
        target: &[BodyLiteral],
        used: &mut Vec<bool>,
        bij: Bijection,
        out: &mut Vec<Bijection>,
    ) {
        let Some((first, rest)) = pattern.split_first() else {
            out.push(bij);
            return;
        };
        for (i, t) in target.iter().enumerate() {
            if used[i] {
                continue;
            }
            if let Some(next) = bij.literal(first, t) {
                used[i] = true;
                go(rest, target, used, next, out);
                used[i] = false;
            }
        }
    }
    if pattern.len() != target.len() {
        return vec![];
    }
    let mut out = Vec::new();
    go(
        pattern,
        target,
        &mut vec![false; target.len()],
        start,
        &mut out,
    );
    out
}

/// True when the rules coincide up to a consistent renaming of variables and
/// reordering of body literals.
pub fn is_variant(a: &NormalizedRule, b: &NormalizedRule) -> bool {
    if a.equalities.len() != b.equalities.len() || a.body.len() != b.body.len() {
        return false;
    }
    let mut bij = Bijection::default();
    if !bij.atom(&a.head, &b.head) {
        return false;
    }
    !match_literal_sets(&a.literals(), &b.literals(), bij).is_empty()
}
