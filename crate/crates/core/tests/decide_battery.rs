mod common;

use proptest::prelude::*;
use sobmuck_core::decide::{decide, decide_with, replay, DecideOptions};
use sobmuck_core::{Factor, Measure, MeasureView, Outcome};

use common::battery::battery;

#[test]
fn battery_outcomes_and_replay() {
    let b = battery();
    assert_eq!(b.len(), 12);
    for inst in &b {
        let v = decide(&inst.mu0, &inst.mu1, inst.p).unwrap();
        assert_eq!(v.outcome, inst.expected, "{}: {:?}", inst.name, v);
        assert_eq!(v.theorem.is_none(), v.outcome == Outcome::Unknown, "{}", inst.name);
        if v.outcome == Outcome::Unknown {
            assert!(v.gap.is_some(), "{}", inst.name);
        }
        assert!(replay(&inst.mu0, &inst.mu1, inst.p, &v).unwrap(), "{} does not replay", inst.name);
    }
}

#[test]
fn decisions_are_deterministic() {
    for inst in battery() {
        let a = decide(&inst.mu0, &inst.mu1, inst.p).unwrap();
        let b = decide(&inst.mu0, &inst.mu1, inst.p).unwrap();
        assert_eq!(a, b, "{}", inst.name);
    }
}

// The split point of interior pieces is a numerical choice only.
#[test]
fn outcome_does_not_depend_on_split_point() {
    for inst in battery() {
        let base = decide(&inst.mu0, &inst.mu1, inst.p).unwrap().outcome;
        for x0_frac in [0.25, 0.4, 0.7] {
            let o = DecideOptions { x0_frac, ..Default::default() };
            let v = decide_with(&inst.mu0, &inst.mu1, inst.p, &o).unwrap();
            assert_eq!(v.outcome, base, "{} at x0_frac={x0_frac}", inst.name);
        }
    }
}

#[test]
fn tampered_certificate_is_rejected() {
    let inst = battery().into_iter().find(|i| i.name == "lebesgue").unwrap();
    let v = decide(&inst.mu0, &inst.mu1, inst.p).unwrap();
    let other = Measure::from_factors(0.0, 1.0, vec![Factor::power(1.0, 3.0)]).unwrap().with_atom(1.0, 1.0).unwrap();
    assert!(!replay(&inst.mu0, &other, inst.p, &v).unwrap_or(false));
}

#[test]
fn bad_exponent_is_an_error() {
    let m = Measure::lebesgue(0.0, 1.0).unwrap();
    assert!(decide(&m, &m, 1.0).is_err());
    assert!(decide(&m, &m, f64::INFINITY).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    // Scaling mu0 and mu1 by one constant rescales every norm by the same factor.
    #[test]
    fn common_scale_preserves_outcome(idx in 0usize..12, c in 0.05f64..20.0) {
        let inst = &battery()[idx];
        let a = decide(&inst.mu0, &inst.mu1, inst.p).unwrap();
        let b = decide(&inst.mu0.scaled(c), &inst.mu1.scaled(c), inst.p).unwrap();
        prop_assert_eq!(a.outcome, b.outcome, "{}", inst.name);
    }

    // A larger mu0 only strengthens the norm, so Bounded cannot turn into Unbounded.
    #[test]
    fn extra_mu0_atom_never_makes_bounded_unbounded(idx in 0usize..12, t in 0.0f64..1.0, m in 0.1f64..3.0) {
        let inst = &battery()[idx];
        let (a, b) = inst.mu0.support();
        let x = a + (t * 64.0).round() / 64.0 * (b - a);
        let Ok(mu0) = inst.mu0.clone().with_atom(x, m) else { return Ok(()) };
        let before = decide(&inst.mu0, &inst.mu1, inst.p).unwrap().outcome;
        let after = decide(&mu0, &inst.mu1, inst.p).unwrap().outcome;
        if before == Outcome::Bounded {
            prop_assert_ne!(after, Outcome::Unbounded, "{} + {}delta_{}", inst.name, m, x);
        }
    }
}
