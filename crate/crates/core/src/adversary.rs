//! The adversary's payoff functional `L[f]` and its building blocks.
//!
//! All integrals are right-endpoint Riemann sums on the `n`-grid, so the
//! values computed here coincide with the slacks of the W1/W2 rows built in
//! [`crate::lp_model`] (both go through [`PayoffSums`]).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gain_function::{check_space, FunctionSpace, GridFunction, DEFAULT_MEMBERSHIP_TOL};
use crate::ONE_MINUS_INV_E;

/// `e^{-1} (1 - 1/e)`: the constant term of the W1 payoff.
pub fn w1_constant() -> f64 {
    (-1.0f64).exp() * ONE_MINUS_INV_E
}

/// Prefix sums over one grid assignment `x_0..x_n`, shared by the LP rows and
/// the adversary payoffs.
#[derive(Debug, Clone)]
pub struct PayoffSums<'a> {
    n: usize,
    x: &'a [f64],
    /// `weighted[i] = (1/n) Σ_{t=1}^{i} x_t e^{-t/n}`
    weighted: Vec<f64>,
    /// `plain[k] = (1/n) Σ_{t=1}^{k} e^{-t/n}`
    plain: Vec<f64>,
}

impl<'a> PayoffSums<'a> {
    /// `exps` must hold `e^{-t/n}` for at least `t = 0..=n`.
    pub fn new(x: &'a [f64], exps: &[f64]) -> Self {
        let n = x.len() - 1;
        debug_assert!(exps.len() > n);
        let nf = n as f64;
        let mut weighted = Vec::with_capacity(n + 1);
        let mut plain = Vec::with_capacity(n + 1);
        let (mut w, mut p) = (0.0, 0.0);
        weighted.push(0.0);
        plain.push(0.0);
        for t in 1..=n {
            w += x[t] * exps[t] / nf;
            p += exps[t] / nf;
            weighted.push(w);
            plain.push(p);
        }
        Self {
            n,
            x,
            weighted,
            plain,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(1/n) Σ_{t=1}^{n} x_t e^{-t/n} + constant`.
    #[inline]
    pub fn w1(&self, constant: f64) -> f64 {
        self.weighted[self.n] + constant
    }

    /// The pre-load / Type I / Type II payoff with `ℓ = i/n`, `ψ̃ = j/n`, `ψ = 1`.
    #[inline]
    pub fn w2(&self, i: usize, j: usize) -> f64 {
        let k = i + j;
        self.weighted[i]
            + (self.plain[k] - self.plain[i])
            + (1.0 - j as f64 / self.n as f64) * (1.0 - self.x[k])
    }

    /// Minimum of W2 over the whole admissible family, with the lexicographically
    /// smallest `(i, j)` among ties.
    pub fn min_w2(&self) -> (f64, usize, usize) {
        let n = self.n;
        let per_row: Vec<(f64, usize)> = (0..=n)
            .into_par_iter()
            .map(|i| {
                let mut best = (f64::INFINITY, 0);
                for j in 0..=(n - i) {
                    let v = self.w2(i, j);
                    if v < best.0 {
                        best = (v, j);
                    }
                }
                best
            })
            .collect();
        let mut best = (f64::INFINITY, 0, 0);
        for (i, (v, j)) in per_row.into_iter().enumerate() {
            if v < best.0 {
                best = (v, i, j);
            }
        }
        best
    }
}

/// W1 for a grid function (constant `e^{-1}(1 - 1/e)`).
pub fn w1_discrete(f: &GridFunction) -> f64 {
    let exps = crate::exp_table(f.n(), f.n());
    PayoffSums::new(f.values(), &exps).w1(w1_constant())
}

/// W2 at `(i, j)`.
pub fn w2_discrete(f: &GridFunction, i: usize, j: usize) -> Result<f64> {
    let n = f.n();
    if i > n || j > n - i {
        return domain(format!("(i, j) = ({i}, {j}) outside the family for n = {n}"));
    }
    let exps = crate::exp_table(n, n);
    Ok(PayoffSums::new(f.values(), &exps).w2(i, j))
}

/// Which payoff branch attains `L[f]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Binding {
    W1,
    W2 { i: usize, j: usize },
}

/// `L[f] = min(W1, min_{i,j} W2(i, j))` for `f ∈ F3`.
///
/// Ties go to W1 first, then to the lexicographically smallest `(i, j)`.
pub fn l_of_f(f: &GridFunction) -> Result<(f64, Binding)> {
    let violations = check_space(f, FunctionSpace::F3, DEFAULT_MEMBERSHIP_TOL);
    if !violations.is_empty() {
        return Err(Error::NotInSpace {
            space: FunctionSpace::F3,
            violations: violations.len(),
        });
    }
    let exps = crate::exp_table(f.n(), f.n());
    let sums = PayoffSums::new(f.values(), &exps);
    let w1 = sums.w1(w1_constant());
    let (w2, i, j) = sums.min_w2();
    Ok(if w1 <= w2 {
        (w1, Binding::W1)
    } else {
        (w2, Binding::W2 { i, j })
    })
}

/// Evaluates the unsimplified ratio `κ(ℓ, ψ, ψ̃) / (w* ψ)` on the grid
/// `ℓ = a/n`, `ψ = k/n`, `ψ̃ = j/n`, with right-endpoint sums throughout.
#[derive(Debug, Clone)]
pub struct FullGrid<'a> {
    f: &'a GridFunction,
    max_a: usize,
    /// `(1/n) Σ_{t=1}^{a} f(t/n) e^{-t/n}` for `a = 0..=max_a`
    preload: Vec<f64>,
    /// `(1/n) Σ_{t=1}^{k} e^{-t/n}` for `k = 0..=max_a + n`
    plain: Vec<f64>,
}

impl<'a> FullGrid<'a> {
    pub fn new(f: &'a GridFunction, ell_max: f64) -> Result<Self> {
        if !(ell_max >= 0.0) {
            return domain(format!("ell_max must be non-negative, got {ell_max}"));
        }
        let n = f.n();
        let nf = n as f64;
        let max_a = (ell_max * nf - 1e-9).ceil().max(0.0) as usize;
        let exps = crate::exp_table(n, max_a + n);
        let mut preload = vec![0.0; max_a + 1];
        for a in 1..=max_a {
            preload[a] = preload[a - 1] + f.at_index(a) * exps[a] / nf;
        }
        let mut plain = vec![0.0; max_a + n + 1];
        for k in 1..=max_a + n {
            plain[k] = plain[k - 1] + exps[k] / nf;
        }
        Ok(Self {
            f,
            max_a,
            preload,
            plain,
        })
    }

    pub fn max_a(&self) -> usize {
        self.max_a
    }

    /// Ratio at `ℓ = a/n`, `ψ = k/n` (`k >= 1`), `ψ̃ = j/n` (`j <= k`).
    #[inline]
    pub fn ratio(&self, a: usize, k: usize, j: usize) -> f64 {
        let nf = self.f.n() as f64;
        let numer = self.preload[a]
            + (self.plain[a + j] - self.plain[a])
            + (k - j) as f64 / nf * (1.0 - self.f.at_index(a + j));
        numer / (k as f64 / nf)
    }

    /// For fixed `(a, j)`, the `k ∈ [max(j,1), n]` minimizing the ratio
    /// (largest `k` within `tie_tol` of the minimum), and that minimum.
    pub fn best_psi(&self, a: usize, j: usize, tie_tol: f64) -> (usize, f64) {
        let n = self.f.n();
        let lo = j.max(1);
        let min = (lo..=n)
            .map(|k| self.ratio(a, k, j))
            .fold(f64::INFINITY, f64::min);
        let k = (lo..=n)
            .rev()
            .find(|&k| self.ratio(a, k, j) <= min + tie_tol)
            .unwrap_or(n);
        (k, min)
    }
}

/// Arg-min of the full-grid scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullGridMin {
    pub value: f64,
    pub ell_index: usize,
    pub psi_index: usize,
    pub psi_tilde_index: usize,
}

/// Minimum of the unsimplified payoff ratio over the grid `ℓ ≤ ell_max`,
/// `ψ ∈ {1/n, ..., 1}`, `ψ̃ ∈ {0, ..., ψ}`. Valid for any non-decreasing `f`.
pub fn l_of_f_full_grid(f: &GridFunction, ell_max: f64) -> Result<f64> {
    Ok(l_of_f_full_grid_argmin(f, ell_max)?.value)
}

/// As [`l_of_f_full_grid`], also reporting the lexicographically first
/// minimizer `(a, k, j)`.
pub fn l_of_f_full_grid_argmin(f: &GridFunction, ell_max: f64) -> Result<FullGridMin> {
    let grid = FullGrid::new(f, ell_max)?;
    let n = f.n();
    let per_a: Vec<FullGridMin> = (0..=grid.max_a())
        .into_par_iter()
        .map(|a| {
            let mut best = FullGridMin {
                value: f64::INFINITY,
                ell_index: a,
                psi_index: 0,
                psi_tilde_index: 0,
            };
            for k in 1..=n {
                for j in 0..=k {
                    let v = grid.ratio(a, k, j);
                    if v < best.value {
                        best.value = v;
                        best.psi_index = k;
                        best.psi_tilde_index = j;
                    }
                }
            }
            best
        })
        .collect();
    let mut best = per_a[0];
    for cand in per_a.into_iter().skip(1) {
        if cand.value < best.value {
            best = cand;
        }
    }
    Ok(best)
}

/// A pure strategy `π(ℓ, ψ, ψ̃)`: pre-load `ℓ` on the target, then Type I
/// arrivals of total load `ψ̃`, then Type II arrivals of total load `ψ − ψ̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryStrategy {
    pub ell: f64,
    pub psi: f64,
    pub psi_tilde: f64,
}

impl AdversaryStrategy {
    pub fn new(ell: f64, psi: f64, psi_tilde: f64) -> Result<Self> {
        if !(ell >= 0.0 && ell.is_finite()) {
            return domain(format!("pre-load must be finite and >= 0, got {ell}"));
        }
        if !(0.0..=1.0).contains(&psi) {
            return domain(format!("psi must lie in [0, 1], got {psi}"));
        }
        if !(0.0..=psi).contains(&psi_tilde) {
            return domain(format!(
                "psi_tilde must lie in [0, psi = {psi}], got {psi_tilde}"
            ));
        }
        Ok(Self {
            ell,
            psi,
            psi_tilde,
        })
    }
}

/// Number of unit-`p` steps covering `amount`, i.e. `⌈amount / p⌉` with
/// round-off slack.
pub fn steps(amount: f64, p: f64) -> usize {
    (amount / p - 1e-9).ceil().max(0.0) as usize
}

/// A deterministic arrival pattern: `q[v] = true` for Type I, `false` for Type II.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeSequence {
    pub ell: f64,
    pub p: f64,
    pub q: Vec<bool>,
}

impl TypeSequence {
    pub fn new(ell: f64, p: f64, q: Vec<bool>) -> Result<Self> {
        if !(ell >= 0.0 && ell.is_finite()) {
            return domain(format!("pre-load must be finite and >= 0, got {ell}"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return domain(format!("p must lie in (0, 1], got {p}"));
        }
        Ok(Self { ell, p, q })
    }

    /// `⌈ψ̃/p⌉` Type I arrivals followed by `⌈(ψ − ψ̃)/p⌉` Type II arrivals.
    pub fn from_strategy(strat: &AdversaryStrategy, p: f64) -> Result<Self> {
        let ones = steps(strat.psi_tilde, p);
        let zeros = steps(strat.psi - strat.psi_tilde, p);
        let q = std::iter::repeat_n(true, ones)
            .chain(std::iter::repeat_n(false, zeros))
            .collect();
        Self::new(strat.ell, p, q)
    }
}

/// One arrival's share of `κ` in the sequence accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalTerm {
    pub type_one: bool,
    /// Target load just before the arrival.
    pub load: f64,
    pub contribution: f64,
    /// `p e^{-load}`: the Type I branch value.
    pub type_one_value: f64,
    /// `p (1 - f(load))`: the Type II branch value.
    pub type_two_value: f64,
}

/// Pre-load term `Σ e^{-z_t} f(z_t) Δz` over the `⌈ℓ/p⌉`-point right-endpoint
/// grid of `[0, ℓ]`.
pub fn preload_term(ell: f64, p: f64, f: &GridFunction) -> f64 {
    let m = steps(ell, p);
    if m == 0 {
        return 0.0;
    }
    let dz = ell / m as f64;
    (1..=m)
        .map(|t| {
            let z = t as f64 * dz;
            (-z).exp() * f.eval(z) * dz
        })
        .sum()
}

/// Per-arrival accounting of a [`TypeSequence`]: Type I at load `a` earns
/// `p e^{-a}` and advances the load by `p`; Type II earns `p (1 - f(a))`.
pub fn kappa_sequence_terms(seq: &TypeSequence, f: &GridFunction) -> Vec<ArrivalTerm> {
    let mut load = seq.ell;
    seq.q
        .iter()
        .map(|&type_one| {
            let one = seq.p * (-load).exp();
            let two = seq.p * (1.0 - f.eval(load));
            let term = ArrivalTerm {
                type_one,
                load,
                contribution: if type_one { one } else { two },
                type_one_value: one,
                type_two_value: two,
            };
            if type_one {
                load += seq.p;
            }
            term
        })
        .collect()
}

/// `κ(ℓ, q) / w*` in the sequence accounting form.
pub fn kappa_sequence(seq: &TypeSequence, f: &GridFunction) -> f64 {
    preload_term(seq.ell, seq.p, f)
        + kappa_sequence_terms(seq, f)
            .iter()
            .map(|t| t.contribution)
            .sum::<f64>()
}

/// The vanishing-`p` three-term payoff `κ(ℓ, ψ, ψ̃) / w*`:
/// `∫_0^ℓ e^{-z} f(z) dz + ∫_ℓ^{ℓ+ψ̃} e^{-z} dz + (ψ − ψ̃)(1 − f(ℓ + ψ̃))`.
///
/// The first integral uses composite Simpson with `intervals` panels, split
/// at `z = 1` where admissible functions may have a kink.
pub fn kappa_formula(
    strat: &AdversaryStrategy,
    f: impl Fn(f64) -> f64,
    intervals: usize,
) -> f64 {
    let integrand = |z: f64| (-z).exp() * f(z);
    let ell = strat.ell;
    let pre = if ell <= 1.0 {
        simpson(&integrand, 0.0, ell, intervals)
    } else {
        simpson(&integrand, 0.0, 1.0, intervals) + simpson(&integrand, 1.0, ell, intervals)
    };
    let type_one = (-ell).exp() - (-(ell + strat.psi_tilde)).exp();
    let type_two = (strat.psi - strat.psi_tilde) * (1.0 - f(ell + strat.psi_tilde));
    pre + type_one + type_two
}

fn simpson(g: &impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let m = intervals.max(2) + intervals % 2;
    let h = (b - a) / m as f64;
    let mut acc = g(a) + g(b);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(a + k as f64 * h);
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain_function::sample_analytic_f4;

    #[test]
    fn w1_of_zero_function() {
        for n in [1, 10, 100] {
            let f = GridFunction::constant(n, 0.0).unwrap();
            assert!((w1_discrete(&f) - 0.232544).abs() < 1e-6);
        }
    }

    #[test]
    fn w1_of_capped_constant_matches_direct_sum() {
        let n = 100;
        let f = GridFunction::constant(n, ONE_MINUS_INV_E).unwrap();
        let direct: f64 = (1..=n)
            .map(|t| (-(t as f64) / n as f64).exp() / n as f64)
            .sum::<f64>()
            * ONE_MINUS_INV_E
            + w1_constant();
        assert!((w1_discrete(&f) - direct).abs() < 1e-14);
        // right-endpoint sums sit slightly below the limit 1 - 1/e
        assert!(w1_discrete(&f) < ONE_MINUS_INV_E);
        assert!(ONE_MINUS_INV_E - w1_discrete(&f) < 3.0 / n as f64);
    }

    #[test]
    fn w2_corners() {
        let f = sample_analytic_f4(20).unwrap();
        let n = 20;
        assert!((w2_discrete(&f, 0, 0).unwrap() - (1.0 - f.values()[0])).abs() < 1e-15);
        let riemann: f64 = (1..=n)
            .map(|t| (-(t as f64) / n as f64).exp() / n as f64)
            .sum();
        assert!((w2_discrete(&f, 0, n).unwrap() - riemann).abs() < 1e-14);
        assert!(w2_discrete(&f, 5, 16).is_err());
        assert!(w2_discrete(&f, 21, 0).is_err());
    }

    #[test]
    fn l_of_f_requires_f3() {
        let f = GridFunction::constant(10, 0.0).unwrap();
        assert!(matches!(l_of_f(&f), Err(Error::NotInSpace { .. })));
    }

    #[test]
    fn envelope_value_is_below_eta_10() {
        let f = GridFunction::envelope(10).unwrap();
        let (v, b) = l_of_f(&f).unwrap();
        // Independent direct summation: W1 = 0.443046..., the W2 minimum is 0.4995 at (4, 6).
        assert!(v < 0.5713);
        assert_eq!(b, Binding::W1);
        assert!((v - 0.44304609760039526).abs() < 1e-12);
    }

    #[test]
    fn full_grid_of_zero_function() {
        // With f ≡ 0 every Type II arrival pays p, every Type I pays less, so
        // the adversary uses Type I only, as late as the ℓ-grid allows.
        let n = 10;
        let f = GridFunction::constant(n, 0.0).unwrap();
        let grid = FullGrid::new(&f, 3.0).unwrap();
        for k in 1..=n {
            assert!((grid.ratio(0, k, 0) - 1.0).abs() < 1e-15);
        }
        let expected: f64 = (3 * n + 1..=4 * n)
            .map(|t| (-(t as f64) / n as f64).exp() / n as f64)
            .sum();
        let got = l_of_f_full_grid_argmin(&f, 3.0).unwrap();
        assert!((got.value - expected).abs() < 1e-14);
        assert_eq!(
            (got.ell_index, got.psi_index, got.psi_tilde_index),
            (30, 10, 10)
        );
    }

    #[test]
    fn sequence_pure_type_one_and_two() {
        let f = GridFunction::constant(100, 0.0).unwrap();
        let p = 0.01;
        let ones = TypeSequence::new(0.0, p, vec![true; 100]).unwrap();
        let want: f64 = (0..100).map(|k| p * (-(k as f64) * p).exp()).sum();
        assert!((kappa_sequence(&ones, &f) - want).abs() < 1e-14);
        assert!((want - ONE_MINUS_INV_E).abs() < p);
        let zeros = TypeSequence::new(0.0, p, vec![false; 100]).unwrap();
        assert!((kappa_sequence(&zeros, &f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_example() {
        let f = sample_analytic_f4(1000).unwrap();
        let a = TypeSequence::new(0.0, 0.5, vec![false, true]).unwrap();
        let b = TypeSequence::new(0.0, 0.5, vec![true, false]).unwrap();
        assert!(kappa_sequence(&a, &f) >= kappa_sequence(&b, &f));
    }

    #[test]
    fn strategy_validation() {
        assert!(AdversaryStrategy::new(0.0, 0.5, 0.6).is_err());
        assert!(AdversaryStrategy::new(-1.0, 0.5, 0.1).is_err());
        assert!(AdversaryStrategy::new(0.0, 1.5, 0.1).is_err());
        assert!(TypeSequence::new(0.0, 0.0, vec![]).is_err());
        let s = AdversaryStrategy::new(0.5, 1.0, 0.3).unwrap();
        let q = TypeSequence::from_strategy(&s, 0.1).unwrap();
        assert_eq!(q.q.iter().filter(|b| **b).count(), 3);
        assert_eq!(q.q.len(), 10);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = simpson(&|z: f64| z * z * z, 0.0, 2.0, 4);
        assert!((v - 4.0).abs() < 1e-12);
    }
}
