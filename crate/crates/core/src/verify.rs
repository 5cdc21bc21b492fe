//! Property suites over the whole pipeline, shared by the CLI and the tests.
//!
//! Every check returns a [`Check`] with a pass flag and a one-line detail;
//! suites bundle checks with default parameters.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{
    kappa_formula, kappa_sequence, kappa_sequence_terms, l_of_f, l_of_f_full_grid, AdversaryStrategy, Binding,
    FullGrid, TypeSequence,
};
use crate::convergence::{double_solution, halve_solution, random_feasible_point};
use crate::error::{domain, Error, Result};
use crate::gain_function::{analytic_f4_value, sample_analytic_f4, GridFunction};
use crate::lp_model::{build_aug_lp, build_aug_ub_lp, build_discrete_p_lp, LpInstance};
use crate::lp_solver::{check_feasible, solve_lazy, SolverOptions};
use crate::simulator::{
    estimate_kappa, estimate_kappa_with_mode, run_trial, Arrival, OfflineNode,
    SimInstance, TypeIIMode,
};
use crate::FunctionSpace;
use crate::ONE_MINUS_INV_E;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Cauchy,
    Adversary,
    Simulation,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "lemmas" => Suite::Lemmas,
            "cauchy" => Suite::Cauchy,
            "adversary" => Suite::Adversary,
            "simulation" => Suite::Simulation,
            "all" => Suite::All,
            other => return domain(format!("unknown suite '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Overrides the grid sizes of the LP-based checks.
    pub n: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n: None,
            trials: 100_000,
            seed: 2024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let ns = |default: &[usize]| cfg.n.map_or_else(|| default.to_vec(), |n| vec![n]);
    let mut checks = Vec::new();
    if matches!(suite, Suite::Lemmas | Suite::All) {
        for n in ns(&[5, 10, 20]) {
            checks.push(doubling_preserves_feasibility(n, 200, cfg.seed)?);
            checks.push(halving_preserves_feasibility(n, 200, cfg.seed)?);
        }
    }
    if matches!(suite, Suite::Cauchy | Suite::All) {
        for n in ns(&[10, 25, 50]) {
            checks.push(cauchy_step(n)?);
        }
        for n in ns(&[10, 100]) {
            checks.push(f1_equivalence(n)?);
        }
        for p in [0.1, 0.01] {
            checks.push(discrete_p_bridge(p)?);
        }
    }
    if matches!(suite, Suite::Adversary | Suite::All) {
        checks.push(analytic_optimum(1000)?);
        checks.push(swap_monotonicity(100, cfg.seed)?);
        checks.push(psi_collapse(cfg.n.unwrap_or(50), 20, cfg.seed)?);
        checks.push(accounting_floor(100, cfg.seed)?);
        for n in ns(&[20, 50]) {
            checks.push(full_grid_agreement(n, 20, cfg.seed)?);
        }
        for p in [0.01, 0.001] {
            checks.push(sequence_formula_agreement(p, 20, cfg.seed)?);
        }
    }
    if matches!(suite, Suite::Simulation | Suite::All) {
        checks.push(pure_type_one(1e-3, cfg.trials, cfg.seed)?);
        checks.push(kappa_agreement(10, 1e-3, cfg.trials, cfg.seed)?);
        checks.push(simulated_floor(20, cfg.trials.min(20_000), cfg.seed)?);
        checks.push(gadget_oracle_agreement(10, 1000, cfg.trials.min(2_000), cfg.seed)?);
        checks.push(trial_invariants(200, cfg.seed)?);
    }
    Ok(SuiteReport { suite, checks })
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A random member of F3 on the `n`-grid: sorted uniforms scaled to
/// `1 - 1/e`, lifted onto the envelope.
pub fn random_f3_member(n: usize, rng: &mut impl Rng) -> GridFunction {
    let mut s: Vec<f64> = (0..n).map(|_| rng.gen()).collect();
    s.sort_by(f64::total_cmp);
    let mut values: Vec<f64> = (0..n)
        .map(|t| (1.0 - (-(t as f64) / n as f64).exp()).max(ONE_MINUS_INV_E * s[t]))
        .collect();
    values.push(ONE_MINUS_INV_E);
    GridFunction::new(values, ONE_MINUS_INV_E).expect("constructed within [0, 1]")
}

/// A random non-decreasing grid function with values in `[0, 1]`.
pub fn random_f0_member(n: usize, rng: &mut impl Rng) -> GridFunction {
    let mut s: Vec<f64> = (0..=n + 1).map(|_| rng.gen()).collect();
    s.sort_by(f64::total_cmp);
    let tail = s.pop().expect("n + 2 samples");
    GridFunction::new(s, tail).expect("sorted uniforms are in [0, 1]")
}

fn stacked(y: f64, x: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(y);
    v.extend_from_slice(x);
    v
}

/// Random feasible points of AUG-LP(n) mapped to AUG-LP(2n) stay feasible.
pub fn doubling_preserves_feasibility(n: usize, points: usize, seed: u64) -> Result<Check> {
    let target = build_aug_lp(2 * n)?;
    let mut rng = rng_for(seed, 10 + n as u64);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..points {
        let (y, x) = random_feasible_point(n, &mut rng);
        let (y2, x2) = double_solution(y, &x, n)?;
        let rep = check_feasible(&target, &stacked(y2, &x2), 1e-12);
        worst = worst.max(rep.max_residual);
        failures += usize::from(!rep.feasible);
    }
    Ok(Check::new(
        format!("doubling map n={n}->{}", 2 * n),
        failures == 0,
        format!("{points} points, {failures} failures, max residual {worst:.3e}"),
    ))
}

/// Random feasible points of AUG-LP(2n) mapped to AUG-LP(n) stay feasible.
pub fn halving_preserves_feasibility(n: usize, points: usize, seed: u64) -> Result<Check> {
    let target = build_aug_lp(n)?;
    let mut rng = rng_for(seed, 20 + n as u64);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..points {
        let (y, x) = random_feasible_point(2 * n, &mut rng);
        let (y2, x2) = halve_solution(y, &x, n)?;
        let rep = check_feasible(&target, &stacked(y2, &x2), 1e-12);
        worst = worst.max(rep.max_residual);
        failures += usize::from(!rep.feasible);
    }
    Ok(Check::new(
        format!("halving map n={}->{n}", 2 * n),
        failures == 0,
        format!("{points} points, {failures} failures, max residual {worst:.3e}"),
    ))
}

/// Optimal value of a grid LP, or a solver error.
pub fn optimum(lp: &LpInstance) -> Result<f64> {
    let sol = solve_lazy(lp, &SolverOptions::default());
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: format!("{:?}", sol.status),
        });
    }
    Ok(sol.objective_value)
}

/// `|η(2n) − η(n)| <= (1 − 1/e) / (2n)`.
pub fn cauchy_step(n: usize) -> Result<Check> {
    let a = optimum(&build_aug_lp(n)?)?;
    let b = optimum(&build_aug_lp(2 * n)?)?;
    let gap = (b - a).abs();
    let limit = ONE_MINUS_INV_E / (2 * n) as f64;
    Ok(Check::new(
        format!("cauchy n={n}"),
        gap <= limit,
        format!("eta({n})={a:.10} eta({})={b:.10} gap {gap:.3e} <= {limit:.3e}", 2 * n),
    ))
}

/// AUG-UB-LP over F1 has the same optimum as AUG-LP.
pub fn f1_equivalence(n: usize) -> Result<Check> {
    let a = optimum(&build_aug_lp(n)?)?;
    let b = optimum(&build_aug_ub_lp(n, FunctionSpace::F1)?)?;
    let gap = (a - b).abs();
    Ok(Check::new(
        format!("F1 equivalence n={n}"),
        gap <= 1e-9,
        format!("aug {a:.12} ub-f1 {b:.12} gap {gap:.3e}"),
    ))
}

/// `|τ(p) − η(1/p)| <= p`.
pub fn discrete_p_bridge(p: f64) -> Result<Check> {
    let lp = build_discrete_p_lp(p)?;
    let tau = optimum(&lp)?;
    let eta = optimum(&build_aug_lp(lp.grid())?)?;
    let gap = (tau - eta).abs();
    Ok(Check::new(
        format!("discrete-p bridge p={p}"),
        gap <= p,
        format!("tau(p)={tau:.10} eta(1/p)={eta:.10} gap {gap:.3e}"),
    ))
}

/// Slack within which a row counts as active at the analytic optimum; the
/// grid sums deviate from the continuum at order `1/n²`.
pub const ANALYTIC_ACTIVE_TOL: f64 = 1e-6;

/// `L[f*]` on the grid is within `2e-3` of `(1 + e^{-2})/2` and the pure
/// Type II row `W2(0, 0) = 1 − f(0)` is active while W1 is not.
pub fn analytic_optimum(n: usize) -> Result<Check> {
    let f = sample_analytic_f4(n)?;
    let (value, binding) = l_of_f(&f)?;
    let target = (1.0 + (-2.0f64).exp()) / 2.0;
    let w00 = 1.0 - f.values()[0];
    let w1 = crate::adversary::w1_discrete(&f);
    let slack00 = w00 - value;
    let ok = (value - target).abs() <= 2e-3 && slack00 <= ANALYTIC_ACTIVE_TOL && w1 - value > ANALYTIC_ACTIVE_TOL;
    let arg = match binding {
        Binding::W1 => "W1".to_string(),
        Binding::W2 { i, j } => format!("W2({i},{j})"),
    };
    Ok(Check::new(
        format!("analytic optimum n={n}"),
        ok,
        format!(
            "L={value:.10} target {target:.10}; grid argmin {arg}; W2(0,0) slack {slack00:.2e}; W1 slack {:.2e}",
            w1 - value
        ),
    ))
}

/// Swapping an adjacent (Type II, Type I) pair to (Type I, Type II) never
/// increases the payoff, for random non-decreasing `f`.
pub fn swap_monotonicity(triples: usize, seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 30);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..triples {
        let n = rng.gen_range(5..=60);
        let f = random_f0_member(n, &mut rng);
        let p = *[0.01, 0.05, 0.1, 0.2].choose(&mut rng).expect("non-empty");
        let ell = rng.gen_range(0.0..1.5);
        let len = rng.gen_range(2..=40);
        let mut q: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
        let pos = rng.gen_range(0..len - 1);
        q[pos] = false;
        q[pos + 1] = true;
        let before = kappa_sequence(&TypeSequence::new(ell, p, q.clone())?, &f);
        q.swap(pos, pos + 1);
        let after = kappa_sequence(&TypeSequence::new(ell, p, q)?, &f);
        let margin = before - after;
        worst = worst.min(margin);
        failures += usize::from(margin < -1e-12);
    }
    Ok(Check::new(
        "swap monotonicity",
        failures == 0,
        format!("{triples} triples, {failures} violations, smallest margin {worst:.3e}"),
    ))
}

/// For random F3 members, the full payoff ratio at fixed `(ℓ, ψ̃)` is
/// minimized at `ψ = 1`.
pub fn psi_collapse(n: usize, members: usize, seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 40);
    let mut failures = 0;
    let mut cells = 0;
    for _ in 0..members {
        let f = random_f3_member(n, &mut rng);
        let grid = FullGrid::new(&f, 3.0)?;
        for a in 0..=grid.max_a() {
            for j in 0..=n {
                cells += 1;
                if grid.best_psi(a, j, 1e-12).0 != n {
                    failures += 1;
                }
            }
        }
    }
    Ok(Check::new(
        format!("psi collapse n={n}"),
        failures == 0,
        format!("{members} members, {cells} (ell, psi_tilde) cells, {failures} with argmin below psi=1"),
    ))
}

/// Every arrival in the accounting form earns at least
/// `p · min(e^{-ℓ}, 1 − f(ℓ))` at its current target load.
pub fn accounting_floor(sequences: usize, seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 50);
    let mut failures = 0;
    let mut arrivals = 0;
    for _ in 0..sequences {
        let f = random_f0_member(rng.gen_range(5..=50), &mut rng);
        let p = rng.gen_range(0.001..0.2);
        let q: Vec<bool> = (0..rng.gen_range(1..=60)).map(|_| rng.gen()).collect();
        let seq = TypeSequence::new(rng.gen_range(0.0..2.0), p, q)?;
        for term in kappa_sequence_terms(&seq, &f) {
            arrivals += 1;
            let floor = p * (-term.load).exp().min(1.0 - f.eval(term.load));
            if term.contribution < floor - 1e-15 {
                failures += 1;
            }
        }
    }
    Ok(Check::new(
        "per-arrival floor (accounting)",
        failures == 0,
        format!("{arrivals} arrivals, {failures} below the floor"),
    ))
}

/// `|L[f] − L_full[f]| <= 3/n` for random F3 members.
pub fn full_grid_agreement(n: usize, members: usize, seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 60 + n as u64);
    let mut worst: f64 = 0.0;
    for _ in 0..members {
        let f = random_f3_member(n, &mut rng);
        let (simple, _) = l_of_f(&f)?;
        let full = l_of_f_full_grid(&f, 3.0)?;
        worst = worst.max((simple - full).abs());
    }
    let limit = 3.0 / n as f64;
    Ok(Check::new(
        format!("simplified vs full payoff n={n}"),
        worst <= limit,
        format!("{members} members, max gap {worst:.3e} <= {limit:.3e}"),
    ))
}

/// The sequence accounting converges to the three-term formula:
/// `|κ_seq − κ| <= 2p` for random strategies on the `p`-grid.
pub fn sequence_formula_agreement(p: f64, strategies: usize, seed: u64) -> Result<Check> {
    let n = (1.0 / p).round() as usize;
    let f = sample_analytic_f4(n)?;
    let mut rng = rng_for(seed, 70);
    let mut worst: f64 = 0.0;
    for _ in 0..strategies {
        let strat = random_grid_strategy(n, &mut rng)?;
        let seq = TypeSequence::from_strategy(&strat, p)?;
        let formula = kappa_formula(&strat, |z| analytic_f4_value(z).expect("z >= 0"), 2000);
        worst = worst.max((kappa_sequence(&seq, &f) - formula).abs());
    }
    Ok(Check::new(
        format!("sequence vs formula p={p}"),
        worst <= 2.0 * p,
        format!("{strategies} strategies, max gap {worst:.3e} <= {:.3e}", 2.0 * p),
    ))
}

/// A strategy with `ℓ`, `ψ`, `ψ̃` on the `1/n` grid: `ℓ ∈ [0, 1]`,
/// `ψ ∈ [0.1, 1]`, `ψ̃ ∈ [0, ψ]`.
pub fn random_grid_strategy(n: usize, rng: &mut impl Rng) -> Result<AdversaryStrategy> {
    let nf = n as f64;
    let ell = rng.gen_range(0..=n) as f64 / nf;
    let k = rng.gen_range((n / 10).max(1)..=n);
    let j = rng.gen_range(0..=k);
    AdversaryStrategy::new(ell, k as f64 / nf, j as f64 / nf)
}

/// Pure Type I arrivals of total load 1: mean payoff `1 − 1/e`.
pub fn pure_type_one(p: f64, trials: usize, seed: u64) -> Result<Check> {
    let n = (1.0 / p).round() as usize;
    let f = sample_analytic_f4(n)?;
    let strat = AdversaryStrategy::new(0.0, 1.0, 1.0)?;
    let r = estimate_kappa(&strat, &f, p, trials, seed)?;
    let dev = (r.mean - ONE_MINUS_INV_E).abs();
    Ok(Check::new(
        "simulated pure Type I",
        dev <= 3.0 * r.stderr,
        format!(
            "mean {:.6} stderr {:.2e} target {ONE_MINUS_INV_E:.6} ({:.2} stderr)",
            r.mean,
            r.stderr,
            dev / r.stderr
        ),
    ))
}

/// Simulated `κ/w*` with `f*` agrees with the three-term formula within 3
/// standard errors for random strategies.
pub fn kappa_agreement(strategies: usize, p: f64, trials: usize, seed: u64) -> Result<Check> {
    let n = (1.0 / p).round() as usize;
    let f = sample_analytic_f4(n)?;
    let mut rng = rng_for(seed, 80);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for s in 0..strategies {
        let strat = random_grid_strategy(n, &mut rng)?;
        let r = estimate_kappa(&strat, &f, p, trials, seed.wrapping_add(s as u64))?;
        let formula = kappa_formula(&strat, |z| analytic_f4_value(z).expect("z >= 0"), 4000);
        let z = if r.stderr > 0.0 {
            (r.mean - formula).abs() / r.stderr
        } else if (r.mean - formula).abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        failures += usize::from(z > 3.0);
    }
    Ok(Check::new(
        format!("simulated kappa vs formula p={p}"),
        failures == 0,
        format!("{strategies} strategies x {trials} trials, {failures} beyond 3 stderr, worst {worst:.2} stderr"),
    ))
}

/// One counted arrival at target load `ℓ*` with random competitors:
/// the mean of `Δα_target + β_v` is at least `p · min(e^{-ℓ*}, 1 − f(ℓ*))`.
pub fn simulated_floor(configs: usize, trials: usize, seed: u64) -> Result<Check> {
    let n = 100;
    let p = 0.01;
    let f = sample_analytic_f4(n)?;
    let mut rng = rng_for(seed, 90);
    let mut failures = 0;
    let mut worst = f64::INFINITY;
    for c in 0..configs {
        let ell = rng.gen_range(0..=150) as f64 / n as f64;
        let mut offline = vec![OfflineNode {
            id: 0,
            weight: 1.0,
            initial_load: ell,
        }];
        for id in 1..=rng.gen_range(0..=3) {
            offline.push(OfflineNode {
                id,
                weight: rng.gen_range(0.2..2.0),
                initial_load: rng.gen_range(0.0..2.0),
            });
        }
        let neighbors = (0..offline.len()).collect();
        let inst = SimInstance::new(offline, vec![Arrival::to(neighbors)], p, Some(0))?;
        let gains: Vec<f64> = (0..trials)
            .map(|i| {
                let out = run_trial(&inst, &f, seed.wrapping_add(c as u64), i as u64);
                let rec = out.arrivals[0];
                let da = if rec.assigned == Some(0) { rec.alpha_gain } else { 0.0 };
                da + rec.beta
            })
            .collect();
        let (mean, stderr) = crate::simulator::mean_stderr(&gains);
        let floor = p * (-ell).exp().min(1.0 - f.eval(ell));
        let margin = mean - floor + 3.0 * stderr;
        worst = worst.min(margin);
        failures += usize::from(margin < 0.0);
    }
    Ok(Check::new(
        "per-arrival floor (simulated)",
        failures == 0,
        format!("{configs} configurations x {trials} trials, {failures} below floor - 3 stderr, smallest margin {worst:.3e}"),
    ))
}

/// Gadget and oracle realizations of Type II agree within 3 joint standard
/// errors.
pub fn gadget_oracle_agreement(strategies: usize, m: usize, trials: usize, seed: u64) -> Result<Check> {
    let n = 20;
    let p = 1.0 / n as f64;
    let f = sample_analytic_f4(n)?;
    let mut rng = rng_for(seed, 100);
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for s in 0..strategies {
        let strat = random_grid_strategy(n, &mut rng)?;
        let sd = seed.wrapping_add(1000 + s as u64);
        let oracle = estimate_kappa_with_mode(&strat, &f, p, trials, sd, TypeIIMode::Oracle)?;
        let gadget = estimate_kappa_with_mode(&strat, &f, p, trials, sd ^ 0x5555, TypeIIMode::Gadget { m, ell_tilde: 0.5 })?;
        let joint = (oracle.stderr.powi(2) + gadget.stderr.powi(2)).sqrt();
        let diff = (oracle.mean - gadget.mean).abs();
        let z = if joint > 0.0 {
            diff / joint
        } else if diff <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        failures += usize::from(z > 3.0);
    }
    Ok(Check::new(
        format!("gadget (M={m}) vs oracle"),
        failures == 0,
        format!("{strategies} strategies x {trials} trials, {failures} beyond 3 joint stderr, worst {worst:.2}"),
    ))
}

/// Per-trial invariants on random instances: the dual gain equals the primal
/// gain `p · Σ w_u` over assignments, matched nodes end at or above their
/// threshold, and no node was assigned past it.
pub fn trial_invariants(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = rng_for(seed, 110);
    let mut failures = 0;
    for k in 0..instances {
        let nodes = rng.gen_range(1..=6);
        let p = [0.05, 0.1, 0.25][rng.gen_range(0..3)];
        let weights: Vec<f64> = (0..nodes).map(|_| rng.gen_range(0.1..3.0)).collect();
        let mut inst = SimInstance::with_nodes(&weights, p)?;
        inst.arrivals = (0..rng.gen_range(0..40))
            .map(|_| {
                let mut nb: Vec<usize> = (0..nodes).filter(|_| rng.gen_bool(0.5)).collect();
                nb.shuffle(&mut rng);
                Arrival::to(nb)
            })
            .collect();
        let f = random_f0_member(10, &mut rng);
        let out = run_trial(&inst, &f, seed, k as u64);
        let dual: f64 = out.alpha.iter().sum::<f64>() + out.arrivals.iter().map(|r| r.beta).sum::<f64>();
        let primal: f64 = out
            .arrivals
            .iter()
            .filter_map(|r| r.assigned)
            .map(|u| p * inst.offline[u].weight)
            .sum();
        let conserved = (dual - primal).abs() <= 1e-12 * (1.0 + primal);
        let caps = (0..nodes).all(|u| {
            let matched_ok = !out.matched[u] || out.loads[u] >= out.thresholds[u];
            let never_over = out.loads[u] < out.thresholds[u] + p - 1e-12 || out.loads[u] == 0.0;
            matched_ok && never_over
        });
        failures += usize::from(!(conserved && caps));
    }
    Ok(Check::new(
        "trial invariants",
        failures == 0,
        format!("{instances} random instances, {failures} violating conservation or load caps"),
    ))
}
