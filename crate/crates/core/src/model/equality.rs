use std::collections::BTreeSet;

use super::{Equality, Term};

/// Congruence classes induced by a set of equalities between variables and constants.
#[derive(Clone, Debug, Default)]
pub struct EqualityClasses {
    classes: Vec<BTreeSet<Term>>,
}

impl EqualityClasses {
    pub fn new<'a>(equalities: impl IntoIterator<Item = &'a Equality>) -> Self {
        let mut classes = EqualityClasses::default();
        for eq in equalities {
            classes.merge(&eq.left, &eq.right);
        }
        classes
    }

    fn index_of(&self, term: &Term) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(term))
    }

    pub fn merge(&mut self, a: &Term, b: &Term) {
        let ia = self.index_of(a);
        let ib = self.index_of(b);
        match (ia, ib) {
            (Some(i), Some(j)) if i == j => {}
            (Some(i), Some(j)) => {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let moved = self.classes.swap_remove(hi);
                self.classes[lo].extend(moved);
            }
            (Some(i), None) => {
                self.classes[i].insert(b.clone());
            }
            (None, Some(j)) => {
                self.classes[j].insert(a.clone());
            }
            (None, None) => {
                self.classes
                    .push([a.clone(), b.clone()].into_iter().collect());
            }
        }
    }

    pub fn entails(&self, eq: &Equality) -> bool {
        if eq.left == eq.right {
            return true;
        }
        match self.index_of(&eq.left) {
            Some(i) => self.classes[i].contains(&eq.right),
            None => false,
        }
    }

    /// False when two distinct constants were merged.
    pub fn is_consistent(&self) -> bool {
        self.classes
            .iter()
            .all(|c| c.iter().filter(|t| !t.is_var()).count() <= 1)
    }

    /// The constant a term is bound to, if any.
    pub fn constant_of<'a>(&'a self, term: &'a Term) -> Option<&'a Term> {
        if !term.is_var() {
            return Some(term);
        }
        let i = self.index_of(term)?;
        self.classes[i].iter().find(|t| !t.is_var())
    }

    pub fn classes(&self) -> impl Iterator<Item = &BTreeSet<Term>> {
        self.classes.iter()
    }

    /// Equalities which, conjoined with `consumed`, are equivalent to `self`.
    ///
    /// Every element of `consumed` must be entailed by `self`.
    pub fn residual(&self, consumed: &[Equality]) -> Vec<Equality> {
        let inner = EqualityClasses::new(consumed);
        let mut out = Vec::new();
        for class in &self.classes {
            let mut groups: Vec<BTreeSet<Term>> = Vec::new();
            for term in class {
                let key = inner.index_of(term);
                let slot = key.and_then(|k| {
                    groups
                        .iter()
                        .position(|g| g.iter().any(|t| inner.index_of(t) == Some(k)))
                });
                match slot {
                    Some(s) => {
                        groups[s].insert(term.clone());
                    }
                    None => groups.push([term.clone()].into_iter().collect()),
                }
            }
            if groups.len() < 2 {
                continue;
            }
            let main = groups
                .iter()
                .position(|g| g.iter().any(|t| !t.is_var()))
                .unwrap_or(0);
            let anchor = representative(&groups[main]);
            for (i, g) in groups.iter().enumerate() {
                if i != main {
                    out.push(Equality::new(representative(g), anchor.clone()));
                }
            }
        }
        out.sort();
        out
    }
}

/// Constant of the group if present, otherwise its greatest variable.
fn representative(group: &BTreeSet<Term>) -> Term {
    group
        .iter()
        .find(|t| !t.is_var())
        .or_else(|| group.iter().next_back())
        .cloned()
        .expect("non-empty group")
}

/// Rewrites a set of body equalities into an equivalent set in which every
/// equality of `goal` occurs syntactically. Returns `None` when the goal is not
/// entailed, in which case no equivalent body can contain it. Body atoms are
/// unaffected by the rewrite.
pub fn equality_rewrite(body: &[Equality], goal: &[Equality]) -> Option<Vec<Equality>> {
    let classes = EqualityClasses::new(body);
    if !goal.iter().all(|g| classes.entails(g)) {
        return None;
    }
    let mut out: Vec<Equality> = Vec::new();
    for g in goal {
        if g.left != g.right && !out.contains(g) {
            out.push(g.clone());
        }
    }
    out.extend(classes.residual(goal));
    Some(out)
}
