mod common;

use abalearn::encoding::{encode_entailment, encode_learning, EncodingOptions};
use abalearn::solver::{
    answer_sets, emit_aspcore2, ground, optimal_answer_sets, parse_aspcore2, AspBackend,
    ExternalSolver, Internal,
};
use abalearn::syntax::parse_problem;
use proptest::prelude::*;

#[test]
fn answer_sets_match_reduct_enumeration() {
    for seed in 0..300 {
        common::criteria::solver_agrees(seed).unwrap();
    }
}

#[test]
fn even_loop_has_two_answer_sets() {
    let p = parse_aspcore2("p :- not q.\nq :- not p.\n").unwrap();
    let sets = answer_sets(&ground(&p).unwrap(), 10);
    assert_eq!(sets.len(), 2);
}

#[test]
fn odd_loop_has_none() {
    let p = parse_aspcore2("p :- not p.\n").unwrap();
    assert!(answer_sets(&ground(&p).unwrap(), 10).is_empty());
}

#[test]
fn minimize_selects_smallest_choice() {
    let p = parse_aspcore2("{ q(a) }.\n{ q(b) }.\nok :- q(a).\nok :- q(b).\n:- not ok.\n#minimize { 1,q(X) : q(X) }.\n").unwrap();
    let best = optimal_answer_sets(&ground(&p).unwrap(), 10);
    assert_eq!(best.len(), 2);
    assert!(best.iter().all(|s| s.cost == 1));
}

fn external() -> ExternalSolver {
    ExternalSolver::from_spec(&format!("{} asp", env!("CARGO_BIN_EXE_abalearn"))).unwrap()
}

#[test]
fn external_backend_agrees_on_bundled_problems() {
    let ext = external();
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../problems/bench");
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let p = parse_problem(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let program = encode_learning(
            &p.background,
            &p.positives,
            &p.negatives,
            &p.learnables,
            &EncodingOptions::default(),
        )
        .unwrap();
        let mut a = Internal.optimal(&program, 1000).unwrap();
        let b = ext.optimal(&program, 1000).unwrap();
        a.sort();
        assert_eq!(a, b, "{}", path.display());
        let e = encode_entailment(&p.background, &p.positives, &p.negatives);
        assert_eq!(
            Internal.is_satisfiable(&e).unwrap(),
            ext.is_satisfiable(&e).unwrap()
        );
    }
}

#[test]
fn missing_external_solver_is_an_error() {
    let ext = ExternalSolver::from_spec("/nonexistent/solver").unwrap();
    let p = parse_aspcore2("p.\n").unwrap();
    assert!(ext.is_satisfiable(&p).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn aspcore2_round_trip(seed in any::<u64>()) {
        let (_, p) = common::ground_program(seed, 8);
        let text = emit_aspcore2(&p);
        let back = parse_aspcore2(&text).unwrap();
        let a = answer_sets(&ground(&p).unwrap(), usize::MAX);
        let b = answer_sets(&ground(&back).unwrap(), usize::MAX);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn encodings_round_trip_through_text(seed in any::<u64>()) {
        let p = common::problem(seed);
        let program = encode_learning(&p.background, &p.positives, &p.negatives, &p.learnables, &EncodingOptions::default()).unwrap();
        let back = parse_aspcore2(&emit_aspcore2(&program)).unwrap();
        prop_assert_eq!(Internal.optimal(&program, 16).unwrap(), Internal.optimal(&back, 16).unwrap());
    }
}
