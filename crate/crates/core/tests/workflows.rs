use approx::assert_abs_diff_eq;

use pctc_core::algorithms::dimacs::parse_dimacs;
use pctc_core::algorithms::factor::{factor, FactorInstance};
use pctc_core::algorithms::npconp::{np_conp_solve, problem_from_json};
use pctc_core::algorithms::sat::sat_solve;
use pctc_core::algorithms::{Answer, EvalOptions, Path};
use pctc_core::engine::{b92_circuit, induced_map};
use pctc_core::ensembles::compare_semantics;
use pctc_core::gadget::postselect;
use pctc_core::io::{
    circuit_from_json, ensemble_from_json, measurement_from_json, state_from_json, state_set_from_json,
};
use pctc_core::{distinguish, PctcError};

#[test]
fn circuit_json_round_trip_keeps_the_map() {
    let text = serde_json::to_string(&b92_circuit()).unwrap();
    let back = circuit_from_json(&text).unwrap();
    let a = induced_map(&b92_circuit()).unwrap();
    let b = induced_map(&back).unwrap();
    assert!(a.operator().max_abs_diff(b.operator()) <= 1e-11);
}

#[test]
fn b92_from_json_input() {
    let map = induced_map(&b92_circuit()).unwrap();
    let plus = state_from_json(r#"{"amplitudes": [0.7071067811865476, 0.7071067811865476]}"#).unwrap();
    let out = map.apply_pure(&plus).unwrap();
    assert_abs_diff_eq!(out.probabilities()[0], 1.0, epsilon = 1e-12);
}

#[test]
fn non_unitary_circuit_is_rejected() {
    let text = r#"{"layout": [["SYS", 1], ["CTC", 1]], "unitary": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,2]]}"#;
    let err = circuit_from_json(text).unwrap_err();
    assert_eq!(err.code(), "invalid_value");
}

#[test]
fn state_set_is_padded_and_distinguished() {
    let set = state_set_from_json(
        r#"[{"amplitudes": [1, 0, 0]}, {"amplitudes": [0, 1, 0]}, {"amplitudes": [0.5773502691896258, 0.5773502691896258, 0.5773502691896258]}]"#,
    )
    .unwrap();
    assert_eq!(set.dim(), 4);
    for (i, s) in set.states().iter().enumerate() {
        let r = distinguish::distinguish(&set, distinguish::Route::Cascade, s).unwrap();
        assert_abs_diff_eq!(r.distribution.prob(i), 1.0, epsilon = 1e-10);
    }
}

#[test]
fn ensemble_json_three_state_example() {
    let e = ensemble_from_json(
        r#"[{"p": 0.3333333333333333, "state": {"amplitudes": [1, 0, 0, 0]}, "label": 0},
            {"p": 0.3333333333333333, "state": {"amplitudes": [0, 1, 0, 0]}, "label": 1},
            {"p": 0.3333333333333334, "state": {"amplitudes": [0.5773502691896258, 0.5773502691896258, 0.5773502691896258, 0]}, "label": 2}]"#,
    )
    .unwrap();
    let set = distinguish::StateSet::new(e.entries().iter().map(|x| x.state.clone()).collect()).unwrap();
    let report = compare_semantics(&distinguish::build_c(&set).unwrap(), &e).unwrap();
    assert_abs_diff_eq!(report.q.prob(2), 0.25, epsilon = 1e-10);
    assert_abs_diff_eq!(report.total_variation, 1.0 / 12.0, epsilon = 1e-10);
    assert!(report.purification_consistent());
}

#[test]
fn measurement_json_postselection() {
    // computational-basis measurement of one qubit, keeping outcome 1
    let (meas, accept) = measurement_from_json(
        r#"{"operators": [{"matrix": [[1, 0], [0, 0]]}, {"matrix": [[0, 0], [0, 1]]}], "accept": [1]}"#,
    )
    .unwrap();
    let plus = state_from_json(r#"{"amplitudes": [0.7071067811865476, 0.7071067811865476]}"#).unwrap();
    let r = postselect(&meas, &accept, &plus).unwrap();
    assert_eq!(r.outcomes.len(), 1);
    assert_abs_diff_eq!(r.outcomes[0].probability, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(r.outcomes[0].state.probabilities()[1], 1.0, epsilon = 1e-12);
}

#[test]
fn dimacs_to_sat_answer() {
    let f = parse_dimacs("c x1 and not x2\np cnf 2 2\n1 0\n-2 0\n").unwrap();
    let r = sat_solve(&f, 2, &EvalOptions::default()).unwrap();
    assert_abs_diff_eq!(r.p_no, 0.25, epsilon = 1e-12);
    assert_eq!(r.answer_of(0b110), (Answer::Yes, Some(0b10)));
    assert_abs_diff_eq!(r.decoded.prob(0b110), 0.75, epsilon = 1e-12);
}

#[test]
fn np_conp_from_json() {
    let p = problem_from_json(r#"{"n_bits": 3, "no_witnesses": ["101", 6]}"#).unwrap();
    for path in [Path::Structured, Path::Dense] {
        let r = np_conp_solve(&p, &EvalOptions::default().with_path(path)).unwrap();
        assert_eq!(r.answer, Some(Answer::No));
        assert_eq!(r.witnesses(), vec![(Answer::No, 5), (Answer::No, 6)]);
    }
}

#[test]
fn factoring_reports_structured_errors() {
    assert_eq!(FactorInstance::new(31).unwrap_err(), PctcError::PrimeInput(31));
    let r = factor(&FactorInstance::new(21).unwrap(), &EvalOptions::default()).unwrap();
    assert_eq!(r.factors(), vec![1, 3, 7]);
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["distribution"]["00011"], serde_json::json!(0.333333333333));
}
