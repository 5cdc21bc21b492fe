use balance_bounds::convergence::{
    bound_from_eta, bound_from_zeta, certify, round_report, table_rows, RoundDirection, TableConvention,
};
use balance_bounds::lp_model::LpFamily;
use balance_bounds::lp_solver::SolverOptions;
use balance_bounds::ONE_MINUS_INV_E;
use proptest::prelude::*;

#[test]
fn reports_bracket_the_value() {
    let opts = SolverOptions::default();
    for n in [4, 10, 30] {
        let aug = certify(LpFamily::Aug, n, &opts).unwrap();
        let (lo, hi) = (aug.lower.unwrap(), aug.upper);
        assert!(lo <= aug.value && aug.value <= hi);
        assert!(((hi - lo) - 2.0 * ONE_MINUS_INV_E / n as f64).abs() < 1e-15);
        for fam in [LpFamily::AugUbF0, LpFamily::AugUbF1] {
            let r = certify(fam, n, &opts).unwrap();
            assert!(r.lower.is_none());
            assert!(((r.upper - r.value) - r.tau / n as f64).abs() < 1e-15);
        }
    }
    assert!(certify(LpFamily::DiscreteP, 10, &opts).is_err());
}

#[test]
fn bounds_sandwich_across_refinement() {
    let opts = SolverOptions::default();
    for n in [10, 50] {
        let a = certify(LpFamily::Aug, n, &opts).unwrap();
        let b = certify(LpFamily::Aug, 2 * n, &opts).unwrap();
        let slack = ONE_MINUS_INV_E / n as f64;
        assert!(a.lower.unwrap() <= b.lower.unwrap() + slack);
        assert!(b.upper <= a.upper + slack);
    }
}

#[test]
fn nearest_table_rows() {
    let rows = table_rows(&[10, 100], &SolverOptions::default(), TableConvention::Nearest).unwrap();
    assert_eq!(rows[0].cells, ["0.5713", "0.5080", "0.6346", "0.5736", "0.6736"].map(String::from));
    assert_eq!(rows[1].cells, ["0.5795", "0.5731", "0.5859", "0.5823", "0.5923"].map(String::from));
}

#[test]
fn headline_interval_from_reported_eta() {
    let (lo, hi) = bound_from_eta(1000, 0.5803, ONE_MINUS_INV_E).unwrap();
    assert!(lo >= 0.5796 && hi <= 0.5810);
    assert_eq!(round_report(lo, RoundDirection::Down), "0.5796");
    assert_eq!(round_report(hi, RoundDirection::Up), "0.5810");
    assert_eq!(round_report(bound_from_zeta(1000, 0.5831, 1.0).unwrap(), RoundDirection::Up), "0.5841");
}

proptest! {
    #[test]
    fn rounding_brackets_value(v in 0.0..1.0f64) {
        let down: f64 = round_report(v, RoundDirection::Down).parse().unwrap();
        let up: f64 = round_report(v, RoundDirection::Up).parse().unwrap();
        let near: f64 = round_report(v, RoundDirection::Nearest).parse().unwrap();
        prop_assert!(down <= v + 1e-10 && v <= up + 1e-10);
        prop_assert!(up - down <= 1e-4 + 1e-12);
        prop_assert!((near - v).abs() <= 0.5e-4 + 1e-12);
    }

    #[test]
    fn bad_tau_is_rejected(tau in prop_oneof![-1.0..-1e-9, 1.0 + 1e-9..3.0]) {
        prop_assert!(bound_from_eta(10, 0.5, tau).is_err());
        prop_assert!(bound_from_zeta(10, 0.5, tau).is_err());
    }
}
