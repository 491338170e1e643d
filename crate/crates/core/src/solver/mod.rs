//! Grounding and solving for normal programs with constraints, choice rules
//! and a single weight-1 minimize objective.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::Result;
use crate::model::{Atom, Equality, Symbol};

mod aspcore2;
mod external;
mod ground;
mod search;

pub use aspcore2::{emit_aspcore2, parse_aspcore2};
pub use external::{parse_solver_output, ExternalSolver, SolverOutput};
pub(crate) use ground::safe_vars;
pub use ground::{ground, GroundProgram, GroundRule, GroundRuleAtoms};
pub use search::{answer_sets, check_stable_model, optimal_answer_sets, Search};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Normal,
    Constraint,
    Choice,
}

/// A non-ground rule. Equalities are resolved during grounding.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AspRule {
    pub kind: RuleKind,
    pub head: Option<Atom>,
    pub positive: Vec<Atom>,
    pub negative: Vec<Atom>,
    pub equalities: Vec<Equality>,
}

impl AspRule {
    pub fn normal(head: Atom, positive: Vec<Atom>, negative: Vec<Atom>) -> Self {
        AspRule {
            kind: RuleKind::Normal,
            head: Some(head),
            positive,
            negative,
            equalities: vec![],
        }
    }

    pub fn fact(head: Atom) -> Self {
        AspRule::normal(head, vec![], vec![])
    }

    pub fn constraint(positive: Vec<Atom>, negative: Vec<Atom>) -> Self {
        AspRule {
            kind: RuleKind::Constraint,
            head: None,
            positive,
            negative,
            equalities: vec![],
        }
    }

    /// `{head} :- guard.`
    pub fn choice(head: Atom, guard: Vec<Atom>) -> Self {
        AspRule {
            kind: RuleKind::Choice,
            head: Some(head),
            positive: guard,
            negative: vec![],
            equalities: vec![],
        }
    }

    pub fn with_equalities(mut self, equalities: Vec<Equality>) -> Self {
        self.equalities = equalities;
        self
    }
}

impl fmt::Display for AspRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        aspcore2::write_rule(f, self)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AspProgram {
    pub rules: Vec<AspRule>,
    /// Atom schemata counted with weight 1 by the objective.
    pub minimize: Vec<Atom>,
    pub universe: BTreeSet<Symbol>,
    /// When set, grounding adds `dom(c)` for every constant of the universe.
    pub synthesize_dom: bool,
}

impl AspProgram {
    pub fn new(universe: BTreeSet<Symbol>) -> Self {
        AspProgram {
            rules: vec![],
            minimize: vec![],
            universe,
            synthesize_dom: true,
        }
    }

    pub fn push(&mut self, rule: AspRule) {
        self.rules.push(rule);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnswerSet {
    pub atoms: BTreeSet<Atom>,
    pub cost: usize,
}

impl AnswerSet {
    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }
}

impl fmt::Display for AnswerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// True iff the program has an answer set; the objective is ignored.
pub fn is_satisfiable(program: &AspProgram) -> Result<bool> {
    let g = ground(program)?;
    Ok(Search::new(&g).ignore_objective().first().is_some())
}

/// Something able to compute optimal answer sets of a program.
pub trait AspBackend: Send + Sync {
    fn is_satisfiable(&self, program: &AspProgram) -> Result<bool>;

    /// Up to `limit` cost-optimal answer sets in a deterministic order.
    fn optimal(&self, program: &AspProgram, limit: usize) -> Result<Vec<AnswerSet>>;
}

/// The built-in solver.
#[derive(Clone, Copy, Debug, Default)]
pub struct Internal;

impl AspBackend for Internal {
    fn is_satisfiable(&self, program: &AspProgram) -> Result<bool> {
        is_satisfiable(program)
    }

    fn optimal(&self, program: &AspProgram, limit: usize) -> Result<Vec<AnswerSet>> {
        let g = ground(program)?;
        Ok(optimal_answer_sets(&g, limit))
    }
}
