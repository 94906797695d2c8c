//! Acceptance suite: one test per shipped criterion, full problem sizes.
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines.

use eulab_core::acceptance as acc;

fn check(result: acc::CriterionResult) {
    println!("{}", result.line());
    assert!(result.pass, "{}", result.line());
}

#[test]
fn criterion_01_example_flow_regression() {
    check(acc::criterion_1());
}

#[test]
fn criterion_02_eigenfields_and_dual_form() {
    check(acc::criterion_2());
}

#[test]
fn criterion_03_bernoulli_identity() {
    check(acc::criterion_3());
}

#[test]
fn criterion_04_return_map_equivalence() {
    check(acc::criterion_4());
}

#[test]
fn criterion_05_resonance_location() {
    check(acc::criterion_5());
}

#[test]
fn criterion_06_resonant_pipeline() {
    check(acc::criterion_6());
}

#[test]
fn criterion_07_knotted_measure() {
    check(acc::criterion_7());
}

#[test]
fn criterion_08_suspension_recovery() {
    check(acc::criterion_8());
}

#[test]
fn criterion_09_transport_invariance() {
    check(acc::criterion_9());
}

#[test]
fn criterion_10_property_suites() {
    check(acc::criterion_10());
}
