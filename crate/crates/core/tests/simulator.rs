use balance_bounds::adversary::AdversaryStrategy;
use balance_bounds::gain_function::sample_analytic_f4;
use balance_bounds::simulator::{
    build_adversarial_instance, estimate_kappa, run_instance_batch, run_stochastic_balance, Arrival, SimInstance,
    TypeIIMode,
};
use balance_bounds::verify::random_f0_member;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance() -> impl Strategy<Value = SimInstance> {
    (
        prop::collection::vec(0.1..3.0f64, 1..6),
        prop::sample::select(vec![0.05, 0.1, 0.25, 1.0]),
        prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 0..40),
    )
        .prop_map(|(weights, p, masks)| {
            let mut inst = SimInstance::with_nodes(&weights, p).unwrap();
            inst.arrivals = masks
                .into_iter()
                .map(|m| Arrival::to((0..weights.len()).filter(|&u| m[u]).collect()))
                .collect();
            inst
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dual_gain_matches_primal_gain(inst in instance(), seed in any::<u64>(), fseed in any::<u64>()) {
        let f = random_f0_member(8, &mut ChaCha8Rng::seed_from_u64(fseed));
        let out = run_stochastic_balance(&inst, &f, seed);
        let dual: f64 = out.alpha.iter().sum::<f64>() + out.arrivals.iter().map(|r| r.beta).sum::<f64>();
        let primal: f64 = out.arrivals.iter().filter_map(|r| r.assigned).map(|u| inst.p * inst.offline[u].weight).sum();
        prop_assert!((dual - primal).abs() <= 1e-12 * (1.0 + primal));
    }

    #[test]
    fn loads_respect_thresholds(inst in instance(), seed in any::<u64>()) {
        let f = sample_analytic_f4(20).unwrap();
        let out = run_stochastic_balance(&inst, &f, seed);
        for u in 0..inst.offline.len() {
            if out.matched[u] {
                prop_assert!(out.loads[u] >= out.thresholds[u]);
                // The last assignment happened while the node was available.
                prop_assert!(out.loads[u] - inst.p < out.thresholds[u]);
            } else {
                prop_assert!(out.loads[u] < out.thresholds[u]);
            }
        }
        // Arrivals only go to listed neighbors.
        for (a, r) in inst.arrivals.iter().zip(&out.arrivals) {
            if let Some(u) = r.assigned {
                prop_assert!(a.neighbors.contains(&u));
            }
        }
    }
}

#[test]
fn batch_is_independent_of_thread_count() {
    let f = sample_analytic_f4(50).unwrap();
    let s = AdversaryStrategy::new(0.3, 1.0, 0.5).unwrap();
    let inst = build_adversarial_instance(1.0, &s, 0.02, TypeIIMode::Oracle, &f).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| run_instance_batch(&inst, &f, 3000, 11).unwrap());
    let b = four.install(|| run_instance_batch(&inst, &f, 3000, 11).unwrap());
    assert_eq!(a, b);
}

#[test]
fn stderr_is_sample_stdev_over_root_trials() {
    let f = sample_analytic_f4(20).unwrap();
    let s = AdversaryStrategy::new(0.0, 1.0, 0.5).unwrap();
    let inst = build_adversarial_instance(1.0, &s, 0.05, TypeIIMode::Oracle, &f).unwrap();
    let trials = 500;
    let r = run_instance_batch(&inst, &f, trials, 3).unwrap();
    let vals: Vec<f64> = (0..trials as u64)
        .map(|i| balance_bounds::simulator::run_trial(&inst, &f, 3, i).target_payoff(&inst).unwrap())
        .collect();
    let mean = vals.iter().sum::<f64>() / trials as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
    assert!((r.mean - mean).abs() < 1e-12);
    assert!((r.stderr - (var / trials as f64).sqrt()).abs() < 1e-12);
}

#[test]
fn estimate_kappa_validates_inputs() {
    let f = sample_analytic_f4(10).unwrap();
    let s = AdversaryStrategy::new(0.0, 1.0, 1.0).unwrap();
    assert!(estimate_kappa(&s, &f, 0.1, 0, 1).is_err());
    assert!(estimate_kappa(&s, &f, 0.0, 10, 1).is_err());
    assert!(estimate_kappa(&s, &f, 1.5, 10, 1).is_err());
}
