//! Domain model: terms, atoms, normalised rules, frameworks and learning problems.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

mod equality;
mod framework;
mod rule;

pub use equality::{equality_rewrite, EqualityClasses};
pub use framework::{AbaFramework, ContraryMap, LearningProblem, Violation, DOM};
pub(crate) use rule::match_literal_sets;
pub use rule::{is_variant, BodyLiteral, NormalizedRule, RawRule};

/// Interned-by-sharing identifier used for predicates, constants and variables.
pub type Symbol = Arc<str>;

pub fn sym(s: &str) -> Symbol {
    Arc::from(s)
}

/// Prefix reserved for predicates synthesised by the engine.
pub const RESERVED_PREFIX: &str = "__";

pub type Substitution = HashMap<Symbol, Term>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Symbol),
    Const(Symbol),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(sym(name))
    }

    pub fn constant(name: &str) -> Self {
        Term::Const(sym(name))
    }

    /// Classifies an identifier by the case of its first character.
    pub fn from_name(name: &str) -> Self {
        if is_variable_name(name) {
            Term::var(name)
        } else {
            Term::constant(name)
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn name(&self) -> &Symbol {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }

    pub fn as_var(&self) -> Option<&Symbol> {
        match self {
            Term::Var(s) => Some(s),
            Term::Const(_) => None,
        }
    }

    pub fn as_const(&self) -> Option<&Symbol> {
        match self {
            Term::Const(s) => Some(s),
            Term::Var(_) => None,
        }
    }

    pub fn apply(&self, subst: &Substitution) -> Term {
        match self {
            Term::Var(v) => subst.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn is_variable_name(name: &str) -> bool {
    name.chars()
        .next()
        .is_some_and(|c| c.is_ascii_uppercase() || c == '_')
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Symbol,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom {
            pred: sym(pred),
            args,
        }
    }

    pub fn with_symbol(pred: Symbol, args: Vec<Term>) -> Self {
        Atom { pred, args }
    }

    /// Builds an atom from identifiers, classifying each argument by case.
    pub fn parse_args(pred: &str, args: &[&str]) -> Self {
        Atom::new(pred, args.iter().map(|a| Term::from_name(a)).collect())
    }

    pub fn ground(pred: &str, args: &[&str]) -> Self {
        Atom::new(pred, args.iter().map(|a| Term::constant(a)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_var)
    }

    pub fn constants(&self) -> impl Iterator<Item = &Symbol> {
        self.args.iter().filter_map(Term::as_const)
    }

    pub fn apply(&self, subst: &Substitution) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|t| t.apply(subst)).collect(),
        }
    }

    /// One-way matching of `self` (a pattern) onto `target`, extending `subst`.
    pub fn match_onto(&self, target: &Atom, subst: &mut Substitution) -> bool {
        if self.pred != target.pred || self.args.len() != target.args.len() {
            return false;
        }
        for (p, t) in self.args.iter().zip(&target.args) {
            match p {
                Term::Const(_) => {
                    if p != t {
                        return false;
                    }
                }
                Term::Var(v) => match subst.get(v) {
                    Some(bound) if bound != t => return false,
                    Some(_) => {}
                    None => {
                        subst.insert(v.clone(), t.clone());
                    }
                },
            }
        }
        true
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pred)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// `left = right`, oriented so that a variable is on the left whenever one exists.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Equality {
    pub left: Term,
    pub right: Term,
}

impl Equality {
    pub fn new(a: Term, b: Term) -> Self {
        let (left, right) = match (&a, &b) {
            (Term::Const(_), Term::Var(_)) => (b, a),
            (Term::Var(x), Term::Var(y)) if y < x => (b, a),
            (Term::Const(x), Term::Const(y)) if y < x => (b, a),
            _ => (a, b),
        };
        Equality { left, right }
    }

    pub fn bind(var: &str, constant: &str) -> Self {
        Equality::new(Term::var(var), Term::constant(constant))
    }

    pub fn vars(&self) -> impl Iterator<Item = &Symbol> {
        [&self.left, &self.right]
            .into_iter()
            .filter_map(Term::as_var)
    }

    pub fn constant(&self) -> Option<&Symbol> {
        self.right.as_const().or_else(|| self.left.as_const())
    }

    pub fn apply(&self, subst: &Substitution) -> Equality {
        Equality::new(self.left.apply(subst), self.right.apply(subst))
    }
}

impl fmt::Display for Equality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.left, self.right)
    }
}

/// Variables of a sequence of atoms in order of first occurrence.
pub fn ordered_vars<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<Symbol> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for atom in atoms {
        for v in atom.vars() {
            if seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
    }
    out
}
