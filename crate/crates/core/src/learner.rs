//! The learning algorithm: rote learning of a minimal fact set through ASP,
//! then generalisation of each fact by subsumption, folding and assumption
//! introduction, with depth-first backtracking over every choice point.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::encoding::{decode_facts, encode_entailment, encode_learning, EncodingOptions};
use crate::error::{Error, Result};
use crate::model::{is_variant, sym, AbaFramework, Atom, LearningProblem, NormalizedRule, Symbol};
use crate::oracle::{structural_report, Oracle};
use crate::solver::{AspBackend, Internal};
use crate::transform::{
    contrary_name, introduce_assumption, relative_assumptions, AssumptionSource, FoldEnumerator,
    FoldOutcome, FoldPolicy, Rulebase,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Fails rather than return a non-intensional rule.
    B,
    /// Falls back to the unfolded fact once folding is exhausted.
    BE,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::B => "b",
            Mode::BE => "be",
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LearnOptions {
    pub mode: Mode,
    pub encoding: EncodingOptions,
    /// Optimal answer sets tried per choice point.
    pub answer_set_cap: usize,
    pub fold: FoldPolicy,
    /// New assumption predicates allowed in one run.
    pub max_new_assumptions: usize,
    /// Solver calls allowed before the search gives up (mode B) or stops
    /// generalising (mode BE).
    pub max_solver_calls: usize,
    /// Check the loop invariant and the final result with the oracle.
    pub check_invariants: bool,
    pub oracle: Oracle,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            mode: Mode::B,
            encoding: EncodingOptions::default(),
            answer_set_cap: 64,
            fold: FoldPolicy::default(),
            max_new_assumptions: 6,
            max_solver_calls: 20_000,
            check_invariants: cfg!(debug_assertions),
            oracle: Oracle::default(),
        }
    }
}

impl LearnOptions {
    pub fn with_mode(mode: Mode) -> Self {
        LearnOptions {
            mode,
            ..LearnOptions::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Success,
    /// Every choice failed, or the search budget ran out.
    Failure,
    /// The examples cannot be covered by any set of learnable facts.
    NoSolution,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Success => "success",
            Status::Failure => "failure",
            Status::NoSolution => "no-solution",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub solver_calls: usize,
    pub folds: usize,
    pub backtracks: usize,
    pub subsumed: usize,
    pub fold_bound_max: usize,
    pub fold_depth_max: usize,
    #[serde(skip)]
    pub wall: Duration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransformKind {
    #[serde(rename = "R1")]
    RoteLearning,
    #[serde(rename = "R2")]
    Folding,
    #[serde(rename = "R3")]
    AssumptionIntroduction,
    #[serde(rename = "R4")]
    FactSubsumption,
}

impl fmt::Display for TransformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformKind::RoteLearning => "R1 rote learning",
            TransformKind::Folding => "R2 folding",
            TransformKind::AssumptionIntroduction => "R3 assumption introduction",
            TransformKind::FactSubsumption => "R4 fact subsumption",
        })
    }
}

/// One transformation on the successful derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub kind: TransformKind,
    pub input: String,
    pub output: String,
    pub note: String,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.input)?;
        if !self.output.is_empty() {
            write!(f, "  =>  {}", self.output)?;
        }
        if !self.note.is_empty() {
            write!(f, "  [{}]", self.note)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub status: Status,
    pub mode: Mode,
    /// The learned framework on success.
    pub framework: Option<AbaFramework>,
    /// Rules of the result that are not background rules.
    pub learned_rules: Vec<NormalizedRule>,
    pub new_assumptions: Vec<Atom>,
    pub intensional: bool,
    pub stats: Stats,
    pub trace: Vec<TraceEvent>,
}

impl LearnOutcome {
    pub fn is_success(&self) -> bool {
        self.status == Status::Success
    }
}

#[derive(Clone, Debug)]
struct State {
    fw: AbaFramework,
    pending: VecDeque<NormalizedRule>,
    fresh: usize,
}

impl State {
    /// The current rules together with the pending facts.
    fn with_pending(&self) -> AbaFramework {
        let mut fw = self.fw.clone();
        fw.rules.extend(self.pending.iter().cloned());
        fw
    }
}

struct Learner<'a> {
    problem: &'a LearningProblem,
    opts: LearnOptions,
    backend: &'a dyn AspBackend,
    stats: Stats,
    trace: Vec<TraceEvent>,
    reserved: BTreeSet<Symbol>,
    finished: Option<State>,
}

enum Flow {
    Done(State),
    Failed,
}

impl<'a> Learner<'a> {
    fn out_of_budget(&self) -> bool {
        self.stats.solver_calls >= self.opts.max_solver_calls
    }

    fn entails(&mut self, fw: &AbaFramework) -> Result<bool> {
        self.stats.solver_calls += 1;
        self.backend.is_satisfiable(&encode_entailment(
            fw,
            &self.problem.positives,
            &self.problem.negatives,
        ))
    }

    fn log(
        &mut self,
        kind: TransformKind,
        input: impl ToString,
        output: impl ToString,
        note: impl ToString,
    ) {
        self.trace.push(TraceEvent {
            kind,
            input: input.to_string(),
            output: output.to_string(),
            note: note.to_string(),
        });
    }

    fn check_invariant(&self, state: &State) {
        if !self.opts.check_invariants {
            return;
        }
        match self.opts.oracle.bravely_entails(
            &state.with_pending(),
            &self.problem.positives,
            &self.problem.negatives,
        ) {
            Ok(holds) => assert!(
                holds,
                "loop invariant violated: current rules do not entail the examples"
            ),
            Err(Error::AssumptionBoundExceeded { .. }) => {}
            Err(e) => panic!("oracle failed: {e}"),
        }
    }

    fn fresh_name(&self, state: &mut State) -> String {
        loop {
            state.fresh += 1;
            let name = format!("alpha_{}", state.fresh);
            let taken = |n: &str| self.reserved.contains(n) || state.fw.predicates().contains(n);
            if !taken(&name) && !taken(&contrary_name(&name)) {
                return name;
            }
        }
    }

    fn role(&mut self) -> Result<Status> {
        let p = self.problem;
        let program = encode_learning(
            &p.background,
            &p.positives,
            &p.negatives,
            &p.learnables,
            &self.opts.encoding,
        )?;
        self.stats.solver_calls += 1;
        let answers = self.backend.optimal(&program, self.opts.answer_set_cap)?;
        if answers.is_empty() {
            return Ok(Status::NoSolution);
        }
        for (k, s) in answers.iter().enumerate() {
            if k > 0 {
                self.stats.backtracks += 1;
            }
            let mark = self.trace.len();
            let facts = decode_facts(s, &p.learnables);
            for f in &facts {
                self.log(
                    TransformKind::RoteLearning,
                    f.as_ground_fact().expect("decoded fact"),
                    f,
                    "",
                );
            }
            let state = State {
                fw: p.background.clone(),
                pending: facts.into(),
                fresh: 0,
            };
            if let Flow::Done(done) = self.gen(state)? {
                self.finished = Some(done);
                return Ok(Status::Success);
            }
            self.trace.truncate(mark);
            if self.out_of_budget() {
                break;
            }
        }
        Ok(Status::Failure)
    }

    fn gen(&mut self, mut state: State) -> Result<Flow> {
        self.check_invariant(&state);
        let Some(rho) = state.pending.pop_front() else {
            return Ok(Flow::Done(state));
        };
        if self.out_of_budget() && self.opts.mode == Mode::B {
            return Ok(Flow::Failed);
        }
        let rt = state.with_pending();
        if self.entails(&rt)? {
            self.stats.subsumed += 1;
            self.log(TransformKind::FactSubsumption, &rho, "", "removed");
            return self.gen(state);
        }
        let rulebase = Rulebase::for_target(&state.fw, state.pending.make_contiguous(), &rho);
        let policy = FoldPolicy {
            allow_exhausted: self.opts.mode == Mode::BE,
            ..self.opts.fold
        };
        let universe = state.fw.universe.len();
        let mut folds = FoldEnumerator::new(rho.clone(), rulebase, universe, policy);
        self.stats.fold_bound_max = self.stats.fold_bound_max.max(folds.bound());
        let mut first = true;
        loop {
            // Past the budget, mode BE keeps the fact as it is.
            let outcome = if self.out_of_budget() {
                if self.opts.mode == Mode::B {
                    return Ok(Flow::Failed);
                }
                FoldOutcome::Exhausted(rho.clone())
            } else {
                match folds.next() {
                    Some(o) => o,
                    None => return Ok(Flow::Failed),
                }
            };
            self.stats.fold_depth_max = self.stats.fold_depth_max.max(folds.max_depth);
            if !first {
                self.stats.backtracks += 1;
            }
            first = false;
            let mark = self.trace.len();
            let exhausted = matches!(outcome, FoldOutcome::Exhausted(_));
            if let FoldOutcome::Folded { trace, .. } = &outcome {
                self.stats.folds += trace.steps.len();
                for s in &trace.steps {
                    self.log(
                        TransformKind::Folding,
                        &s.before,
                        &s.after,
                        format!("using {}", s.folder),
                    );
                }
            }
            let rho_f = outcome.rule().clone();
            if let Flow::Done(done) = self.after_fold(&state, &rt, &rho_f)? {
                return Ok(Flow::Done(done));
            }
            self.trace.truncate(mark);
            if exhausted {
                return Ok(Flow::Failed);
            }
        }
    }

    fn after_fold(
        &mut self,
        state: &State,
        rt: &AbaFramework,
        rho_f: &NormalizedRule,
    ) -> Result<Flow> {
        let mut with_f = rt.clone();
        with_f.rules.push(rho_f.clone());
        if self.entails(&with_f)? {
            let mut next = state.clone();
            next.fw.rules.push(rho_f.clone());
            return self.gen(next);
        }
        let vars = body_vars(rho_f);
        let relative = relative_assumptions(rho_f, &rt.rules, rt);
        if !relative.is_empty() {
            for alpha in relative {
                if self.out_of_budget() {
                    break;
                }
                let intro = introduce_assumption(
                    rho_f,
                    rt,
                    &alpha.vars().cloned().collect::<Vec<_>>(),
                    AssumptionSource::Existing(&alpha),
                )?;
                if !self.entails(&intro.framework)? {
                    self.stats.backtracks += 1;
                    continue;
                }
                let mark = self.trace.len();
                self.log(
                    TransformKind::AssumptionIntroduction,
                    rho_f,
                    &intro.rule,
                    format!("reused {alpha}"),
                );
                let mut next = state.clone();
                next.fw.rules.push(intro.rule.clone());
                if let Flow::Done(done) = self.gen(next)? {
                    return Ok(Flow::Done(done));
                }
                self.trace.truncate(mark);
                self.stats.backtracks += 1;
            }
            return Ok(Flow::Failed);
        }
        let introduced = state.fw.assumptions.len() - self.problem.background.assumptions.len();
        if introduced >= self.opts.max_new_assumptions {
            return Ok(Flow::Failed);
        }
        let mut next = state.clone();
        let name = self.fresh_name(&mut next);
        let intro = introduce_assumption(rho_f, rt, &vars, AssumptionSource::Fresh(&name))?;
        let contrary: BTreeSet<Symbol> = [intro.contrary.pred.clone()].into_iter().collect();
        let program = encode_learning(
            &intro.framework,
            &self.problem.positives,
            &self.problem.negatives,
            &contrary,
            &self.opts.encoding,
        )?;
        self.stats.solver_calls += 1;
        let answers = self.backend.optimal(&program, self.opts.answer_set_cap)?;
        next.fw.rules.push(intro.rule.clone());
        next.fw.assumptions.push(intro.assumption.clone());
        next.fw
            .contraries
            .insert(intro.assumption.clone(), intro.contrary.clone());
        for (k, s) in answers.iter().enumerate() {
            if k > 0 {
                self.stats.backtracks += 1;
            }
            let mark = self.trace.len();
            self.log(
                TransformKind::AssumptionIntroduction,
                rho_f,
                &intro.rule,
                format!(
                    "new assumption {} with contrary {}",
                    intro.assumption, intro.contrary
                ),
            );
            let facts = decode_facts(s, &contrary);
            for f in &facts {
                self.log(
                    TransformKind::RoteLearning,
                    f.as_ground_fact().expect("decoded fact"),
                    f,
                    "",
                );
            }
            let mut branch = next.clone();
            branch.pending.extend(facts);
            if let Flow::Done(done) = self.gen(branch)? {
                return Ok(Flow::Done(done));
            }
            self.trace.truncate(mark);
            if self.out_of_budget() {
                break;
            }
        }
        Ok(Flow::Failed)
    }
}

/// Variables of a rule body in order of first occurrence.
fn body_vars(rule: &NormalizedRule) -> Vec<Symbol> {
    let mut out: Vec<Symbol> = Vec::new();
    let names = rule
        .body
        .iter()
        .flat_map(Atom::vars)
        .chain(rule.equalities.iter().flat_map(|e| e.vars()));
    for v in names {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// Learns with the built-in solver.
pub fn learn(problem: &LearningProblem, opts: &LearnOptions) -> Result<LearnOutcome> {
    learn_with(problem, opts, &Internal)
}

/// Learns with the given solver backend.
pub fn learn_with(
    problem: &LearningProblem,
    opts: &LearnOptions,
    backend: &dyn AspBackend,
) -> Result<LearnOutcome> {
    let start = Instant::now();
    let reserved: BTreeSet<Symbol> = problem
        .background
        .predicates()
        .into_iter()
        .chain(problem.learnables.iter().cloned())
        .chain(
            problem
                .positives
                .iter()
                .chain(&problem.negatives)
                .map(|e| e.pred.clone()),
        )
        .chain([sym("alpha")])
        .collect();
    let mut learner = Learner {
        problem,
        opts: *opts,
        backend,
        stats: Stats::default(),
        trace: vec![],
        reserved,
        finished: None,
    };
    let status = learner.role()?;
    let mut stats = learner.stats;
    stats.wall = start.elapsed();
    let mut outcome = LearnOutcome {
        status,
        mode: opts.mode,
        framework: None,
        learned_rules: vec![],
        new_assumptions: vec![],
        intensional: false,
        stats,
        trace: learner.trace,
    };
    if let Some(state) = learner.finished {
        let bk = &problem.background;
        outcome.new_assumptions = state.fw.assumptions[bk.assumptions.len()..].to_vec();
        let fw = state.fw.without_redundant_bogus();
        outcome.learned_rules = fw
            .rules
            .iter()
            .filter(|r| !bk.rules.iter().any(|o| is_variant(o, r)))
            .cloned()
            .collect();
        outcome.intensional = outcome
            .learned_rules
            .iter()
            .all(NormalizedRule::is_intensional);
        if opts.check_invariants {
            match opts.oracle.solution_report(&fw, problem) {
                Ok(failed) => assert!(
                    failed.is_empty(),
                    "learned framework is not a solution: {failed:?}"
                ),
                Err(Error::AssumptionBoundExceeded { .. }) => {
                    let failed = structural_report(&fw, problem);
                    assert!(
                        failed.is_empty(),
                        "learned framework is not a solution: {failed:?}"
                    );
                }
                Err(e) => panic!("oracle failed: {e}"),
            }
            assert!(
                fw.validate().is_empty(),
                "learned framework is invalid: {:?}",
                fw.validate()
            );
        }
        outcome.framework = Some(fw);
    }
    Ok(outcome)
}
