mod common;

use abalearn::error::Error;
use abalearn::learner::{learn, LearnOptions, Mode};
use abalearn::model::Violation;
use abalearn::syntax::{parse_framework, parse_problem, print_framework, print_problem};
use common::criteria;
use proptest::prelude::*;

#[test]
fn nixon_problem_sizes() {
    let p = parse_problem(criteria::NIXON).unwrap();
    assert_eq!(p.background.rule_count_with_implicit(), 25);
    assert_eq!(p.background.rules.len(), 15);
    assert_eq!(p.positives.len(), 3);
    assert_eq!(p.negatives.len(), 2);
    let t: Vec<&str> = p.learnables.iter().map(|s| &**s).collect();
    assert_eq!(t, ["abnormal_quaker", "pacifist"]);
}

#[test]
fn empty_and_comment_only_files_are_rejected() {
    assert!(matches!(parse_problem(""), Err(Error::EmptyProblem)));
    assert!(matches!(
        parse_problem("% only a comment\n\n"),
        Err(Error::EmptyProblem)
    ));
}

#[test]
fn learnable_assumption_is_rejected() {
    let text = criteria::NIXON.replace(
        "#learnable pacifist/1, abnormal_quaker/1.",
        "#learnable votes_dem/1.",
    );
    match parse_problem(&text) {
        Err(Error::Invalid(v)) => assert!(v
            .iter()
            .any(|x| matches!(x, Violation::LearnableAssumption(_)))),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn assumption_heads_violate_flatness() {
    let err = parse_problem("#assumption a(X).\n#contrary a(X), b(X).\na(X) :- c(X).\nc(k).\n")
        .unwrap_err();
    assert!(
        matches!(err, Error::Invalid(_) | Error::FlatnessViolation(_)),
        "{err}"
    );
}

#[test]
fn unsafe_head_variable_is_rejected() {
    match parse_problem("p(X, Y) :- q(X).\nq(a).\n") {
        Err(Error::Invalid(v)) => assert!(v.iter().any(
            |x| matches!(x, Violation::HeadVariableUnbound { variable, .. } if variable == "Y")
        )),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn syntax_errors_carry_positions() {
    match parse_problem("p(a).\nq(X) :- p(X), .\n") {
        Err(Error::Syntax { line, column, .. }) => {
            assert_eq!(line, 2);
            assert!(column > 1);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn bench_problems_round_trip() {
    for (name, text) in criteria::bench_problems() {
        let p = parse_problem(&text).unwrap();
        assert_eq!(parse_problem(&print_problem(&p)).unwrap(), p, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn problems_round_trip(seed in any::<u64>()) {
        let p = common::problem(seed);
        let printed = print_problem(&p);
        prop_assert_eq!(parse_problem(&printed).unwrap(), p, "{}", printed);
    }

    #[test]
    fn frameworks_round_trip(seed in any::<u64>()) {
        let fw = common::framework(seed, &common::Shape::default());
        prop_assert_eq!(parse_framework(&print_framework(&fw)).unwrap(), fw);
    }

    #[test]
    fn learner_output_round_trips(seed in any::<u64>()) {
        let p = common::problem(seed);
        for mode in [Mode::B, Mode::BE] {
            let out = learn(&p, &LearnOptions::with_mode(mode)).unwrap();
            if let Some(fw) = out.framework {
                let printed = print_framework(&fw);
                prop_assert_eq!(parse_framework(&printed).unwrap(), fw, "{}", printed);
            }
        }
    }
}

#[test]
fn nixon_learner_output_round_trips() {
    let p = parse_problem(criteria::NIXON).unwrap();
    let fw = learn(&p, &LearnOptions::with_mode(Mode::B))
        .unwrap()
        .framework
        .unwrap();
    assert_eq!(parse_framework(&print_framework(&fw)).unwrap(), fw);
}
