//! The quick-scale suite passes, is reproducible for a fixed seed, and
//! rejects unknown criterion ids.

use mcf_core::verify::{run_all, run_criterion, Scale};

#[test]
fn quick_suite_passes_and_is_reproducible() {
    let a = run_all(Scale::Quick, 7);
    for rep in &a {
        println!("{}", rep.line());
        assert!(rep.passed, "{}", rep.line());
    }
    let b = run_all(Scale::Quick, 7);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.checks, y.checks, "criterion {} not reproducible", x.id);
    }
}

#[test]
fn seeded_criteria_pass_for_other_seeds() {
    for seed in [1, 99] {
        for id in [3, 5, 7] {
            let rep = run_criterion(id, Scale::Quick, seed).unwrap();
            assert!(rep.passed, "{}", rep.line());
        }
    }
}

#[test]
fn unknown_criterion_is_an_error() {
    assert!(run_criterion(0, Scale::Quick, 0).is_err());
    assert!(run_criterion(9, Scale::Quick, 0).is_err());
}
