use ::abalearn::encoding::{encode_learning, translate_framework, EncodingOptions};
use ::abalearn::learner::{learn_with, LearnOptions, Mode};
use ::abalearn::model::{AbaFramework, DOM};
use ::abalearn::oracle::Oracle;
use ::abalearn::solver::{answer_sets, emit_aspcore2, ground, AspBackend, ExternalSolver, Internal};
use ::abalearn::syntax::{parse_framework, parse_problem, print_framework};
use ::abalearn::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::ExternalSolver(_) | Error::Io(_) | Error::AssumptionBoundExceeded { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn mode(name: &str) -> PyResult<Mode> {
    match name {
        "b" => Ok(Mode::B),
        "be" => Ok(Mode::BE),
        other => Err(PyValueError::new_err(format!("unknown mode `{other}`, expected `b` or `be`"))),
    }
}

#[pyclass(frozen, get_all)]
struct LearnResult {
    status: String,
    mode: String,
    intensional: bool,
    /// The learned framework in `.aba` syntax, or None.
    framework: Option<String>,
    learned_rules: Vec<String>,
    new_assumptions: Vec<String>,
    trace: Vec<String>,
    solver_calls: usize,
    backtracks: usize,
    wall_ms: u128,
}

#[pymethods]
impl LearnResult {
    fn __repr__(&self) -> String {
        format!(
            "LearnResult(status={:?}, intensional={}, learned_rules={})",
            self.status,
            if self.intensional { "True" } else { "False" },
            self.learned_rules.len()
        )
    }

    fn __bool__(&self) -> bool {
        self.status == "success"
    }
}

/// Learns a framework for a problem given in `.aba` syntax.
#[pyfunction]
#[pyo3(signature = (problem, mode = "b", solver = None, oracle_bound = 24))]
fn learn(py: Python<'_>, problem: &str, mode: &str, solver: Option<&str>, oracle_bound: usize) -> PyResult<LearnResult> {
    let p = parse_problem(problem).map_err(py_err)?;
    let opts = LearnOptions {
        oracle: Oracle { bound: oracle_bound },
        ..LearnOptions::with_mode(self::mode(mode)?)
    };
    let backend: Box<dyn AspBackend> = match solver {
        None => Box::new(Internal),
        Some(cmd) => Box::new(ExternalSolver::from_spec(cmd).map_err(py_err)?),
    };
    let out = py
        .detach(|| learn_with(&p, &opts, backend.as_ref()))
        .map_err(py_err)?;
    Ok(LearnResult {
        status: out.status.to_string(),
        mode: out.mode.to_string(),
        intensional: out.intensional,
        framework: out.framework.as_ref().map(print_framework),
        learned_rules: out.learned_rules.iter().map(|r| format!("{r}.")).collect(),
        new_assumptions: out.new_assumptions.iter().map(ToString::to_string).collect(),
        trace: out.trace.iter().map(ToString::to_string).collect(),
        solver_calls: out.stats.solver_calls,
        backtracks: out.stats.backtracks,
        wall_ms: out.stats.wall.as_millis(),
    })
}

/// Solution conditions that `framework` violates for `problem`; empty when
/// it is a solution.
#[pyfunction]
#[pyo3(signature = (framework, problem, oracle_bound = 24))]
fn verify(framework: &str, problem: &str, oracle_bound: usize) -> PyResult<Vec<String>> {
    let fw = parse_framework(framework).map_err(py_err)?;
    let p = parse_problem(problem).map_err(py_err)?;
    Oracle { bound: oracle_bound }.solution_report(&fw, &p).map_err(py_err)
}

/// Stable extensions of a framework, each a sorted list of atoms.
#[pyfunction]
#[pyo3(signature = (framework, limit = 100))]
fn solve(framework: &str, limit: usize) -> PyResult<Vec<Vec<String>>> {
    let fw = parse_framework(framework).map_err(py_err)?;
    let g = ground(&translate_framework(&fw)).map_err(py_err)?;
    Ok(answer_sets(&g, limit)
        .into_iter()
        .map(|s| {
            s.atoms
                .iter()
                .filter(|a| a.pred.as_ref() != DOM && !AbaFramework::is_bogus(a))
                .map(ToString::to_string)
                .collect()
        })
        .collect())
}

/// The ASP-Core-2 learning program for a problem.
#[pyfunction]
fn encode(problem: &str) -> PyResult<String> {
    let p = parse_problem(problem).map_err(py_err)?;
    let program = encode_learning(&p.background, &p.positives, &p.negatives, &p.learnables, &EncodingOptions::default())
        .map_err(py_err)?;
    Ok(emit_aspcore2(&program))
}

#[pymodule]
fn abalearn(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<LearnResult>()?;
    m.add_function(wrap_pyfunction!(learn, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(encode, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
