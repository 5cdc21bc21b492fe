use balance_bounds::gain_function::{
    analytic_f4_value, check_space, sample_analytic_f4, FunctionSpace, GridFunction,
};
use proptest::prelude::*;

const SPACES: [FunctionSpace; 4] = [FunctionSpace::F0, FunctionSpace::F1, FunctionSpace::F3, FunctionSpace::F4];

fn member(f: &GridFunction, space: FunctionSpace, tol: f64) -> bool {
    check_space(f, space, tol).is_empty()
}

#[test]
fn sampled_analytic_optimum_is_in_f4_up_to_1000() {
    for n in 1..=1000 {
        let f = sample_analytic_f4(n).unwrap();
        for space in SPACES {
            assert!(member(&f, space, 1e-9), "n={n} fails {space}");
        }
    }
}

#[test]
fn analytic_value_is_monotone_on_fine_grid() {
    let vals: Vec<f64> = (0..=10_000).map(|k| analytic_f4_value(2.0 * k as f64 / 1e4).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]));
}

// Arbitrary grid functions biased towards the interesting spaces: a sorted
// sample, optionally lifted onto the envelope and pinned at 1 - 1/e.
fn grid_function() -> impl Strategy<Value = GridFunction> {
    (1usize..60, any::<u64>(), 0u8..4).prop_map(|(n, seed, mode)| {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let cap = balance_bounds::ONE_MINUS_INV_E;
        let mut v: Vec<f64> = (0..=n).map(|_| rng.gen::<f64>()).collect();
        if mode > 0 {
            v.sort_by(f64::total_cmp);
        }
        if mode > 1 {
            for (t, x) in v.iter_mut().enumerate() {
                *x = (*x * cap).max(1.0 - (-(t as f64) / n as f64).exp());
            }
        }
        if mode > 2 {
            v[n] = cap;
        }
        let tail = v[n];
        GridFunction::new(v, tail).unwrap()
    })
}

proptest! {
    #[test]
    fn envelope_is_in_f3(n in 1usize..3000) {
        prop_assert!(member(&GridFunction::envelope(n).unwrap(), FunctionSpace::F3, 0.0));
    }

    #[test]
    fn spaces_are_nested(f in grid_function()) {
        let tol = 1e-9;
        if member(&f, FunctionSpace::F4, tol) { prop_assert!(member(&f, FunctionSpace::F3, tol)); }
        if member(&f, FunctionSpace::F3, tol) { prop_assert!(member(&f, FunctionSpace::F1, tol)); }
        if member(&f, FunctionSpace::F1, tol) { prop_assert!(member(&f, FunctionSpace::F0, tol)); }
    }

    #[test]
    fn values_stay_in_unit_interval(f in grid_function()) {
        prop_assert_eq!(f.values().len(), f.n() + 1);
        prop_assert!(f.values().iter().all(|x| (0.0..=1.0).contains(x)));
        prop_assert!((0.0..=1.0).contains(&f.tail()));
    }

    #[test]
    fn out_of_range_values_are_rejected(n in 1usize..20, bad in prop_oneof![-1.0..-1e-9, 1.0 + 1e-9..2.0]) {
        let mut v = vec![0.5; n + 1];
        v[n / 2] = bad;
        prop_assert!(GridFunction::new(v, 0.5).is_err());
    }
}
