use balance_bounds::adversary::{l_of_f, AdversaryStrategy};
use balance_bounds::gain_function::{sample_analytic_f4, FunctionSpace};
use balance_bounds::lp_model::build_aug_ub_lp;
use balance_bounds::lp_solver::{check_feasible, most_violated, solve_full, solve_lazy, SolverOptions};
use balance_bounds::simulator::estimate_kappa;
use balance_bounds_bench::aug_with_point;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn pricing(c: &mut Criterion) {
    let mut g = c.benchmark_group("most_violated");
    for n in [100, 300, 1000] {
        let (lp, v) = aug_with_point(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| most_violated(&lp, black_box(&v))));
    }
    g.finish();

    let (lp, v) = aug_with_point(300);
    c.bench_function("check_feasible/300", |b| b.iter(|| check_feasible(&lp, black_box(&v), 1e-9)));
}

fn solves(c: &mut Criterion) {
    let opts = SolverOptions::default();
    let mut g = c.benchmark_group("solve");
    g.sample_size(10);
    for n in [25, 50, 100] {
        let (lp, _) = aug_with_point(n);
        g.bench_with_input(BenchmarkId::new("lazy_aug", n), &n, |b, _| b.iter(|| solve_lazy(&lp, &opts)));
        let ub = build_aug_ub_lp(n, FunctionSpace::F0).unwrap();
        g.bench_with_input(BenchmarkId::new("lazy_ub_f0", n), &n, |b, _| b.iter(|| solve_lazy(&ub, &opts)));
    }
    for n in [25, 50] {
        let (lp, _) = aug_with_point(n);
        g.bench_with_input(BenchmarkId::new("full_aug", n), &n, |b, _| b.iter(|| solve_full(&lp, &opts)));
    }
    g.finish();
}

fn payoff_and_simulation(c: &mut Criterion) {
    let f = sample_analytic_f4(1000).unwrap();
    c.bench_function("l_of_f/1000", |b| b.iter(|| l_of_f(black_box(&f))));

    let f = sample_analytic_f4(100).unwrap();
    let s = AdversaryStrategy::new(0.2, 1.0, 0.5).unwrap();
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("estimate_kappa/p=0.01/10k", |b| b.iter(|| estimate_kappa(&s, &f, 0.01, 10_000, 1)));
    g.finish();
}

criterion_group!(benches, pricing, solves, payoff_and_simulation);
criterion_main!(benches);
