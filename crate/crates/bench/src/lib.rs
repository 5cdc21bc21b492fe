//! Shared fixtures for the solver benchmarks.

use balance_bounds::gain_function::sample_analytic_f4;
use balance_bounds::lp_model::build_aug_lp;
use balance_bounds::LpInstance;

/// AUG-LP at resolution `n` together with a feasible assignment
/// (the sampled analytic optimum with `y = 0`).
pub fn aug_with_point(n: usize) -> (LpInstance, Vec<f64>) {
    let lp = build_aug_lp(n).expect("n >= 1");
    let f = sample_analytic_f4(n).expect("n >= 1");
    let mut v = vec![0.0];
    v.extend_from_slice(f.values());
    (lp, v)
}
