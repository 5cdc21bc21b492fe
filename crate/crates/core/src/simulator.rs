//! Monte Carlo execution of Stochastic Balance with per-trial thresholds
//! `Θ_u ~ Exp(1)`, plus the adversarial Type I / Type II constructions.
//!
//! Trial `i` of a batch draws from stream `i` of a ChaCha8 generator seeded
//! with the master seed, and results are reduced in trial order, so a batch
//! is reproducible regardless of how rayon schedules it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{steps, AdversaryStrategy};
use crate::error::{domain, Result};
use crate::gain_function::GridFunction;

/// Relative tolerance under which two scores count as tied.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineNode {
    pub id: usize,
    pub weight: f64,
    /// Load carried into the instance (used by the Type II gadget copies).
    #[serde(default, skip_serializing_if = "is_zero")]
    pub initial_load: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arrival {
    pub neighbors: Vec<usize>,
    /// Score of an outside competitor that wins ties: the arrival is taken
    /// by it, with `β_v` equal to this score, unless some available neighbor
    /// scores strictly more.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub siphon: Option<f64>,
    /// Whether `β_v` of this arrival enters the target payoff.
    #[serde(default = "yes", skip_serializing_if = "is_true")]
    pub counted: bool,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

fn yes() -> bool {
    true
}

fn is_true(b: &bool) -> bool {
    *b
}

impl Arrival {
    pub fn to(neighbors: Vec<usize>) -> Self {
        Self {
            neighbors,
            siphon: None,
            counted: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSimInstance")]
pub struct SimInstance {
    pub offline: Vec<OfflineNode>,
    pub arrivals: Vec<Arrival>,
    pub p: f64,
    /// Node whose payoff `(α_target + Σ β_v) / w_target` is reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
}

#[derive(Deserialize)]
struct RawSimInstance {
    offline: Vec<OfflineNode>,
    arrivals: Vec<Arrival>,
    p: f64,
    #[serde(default)]
    target: Option<usize>,
}

impl TryFrom<RawSimInstance> for SimInstance {
    type Error = crate::Error;

    fn try_from(raw: RawSimInstance) -> Result<Self> {
        SimInstance::new(raw.offline, raw.arrivals, raw.p, raw.target)
    }
}

impl SimInstance {
    pub fn new(offline: Vec<OfflineNode>, arrivals: Vec<Arrival>, p: f64, target: Option<usize>) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return domain(format!("p must lie in (0, 1], got {p}"));
        }
        for (k, u) in offline.iter().enumerate() {
            if u.id != k {
                return domain(format!("offline node at position {k} has id {}; ids must be 0..", u.id));
            }
            if !(u.weight > 0.0 && u.weight.is_finite()) {
                return domain(format!("node {k} has non-positive weight {}", u.weight));
            }
            if !(u.initial_load >= 0.0 && u.initial_load.is_finite()) {
                return domain(format!("node {k} has invalid initial load {}", u.initial_load));
            }
        }
        for (k, a) in arrivals.iter().enumerate() {
            if let Some(&bad) = a.neighbors.iter().find(|&&u| u >= offline.len()) {
                return domain(format!("arrival {k} references unknown node {bad}"));
            }
            if a.siphon.is_some_and(|s| !(s >= 0.0 && s.is_finite())) {
                return domain(format!("arrival {k} has an invalid siphon score"));
            }
        }
        if target.is_some_and(|t| t >= offline.len()) {
            return domain("target node does not exist");
        }
        Ok(Self {
            offline,
            arrivals,
            p,
            target,
        })
    }

    /// Nodes with the given weights and no arrivals yet.
    pub fn with_nodes(weights: &[f64], p: f64) -> Result<Self> {
        let offline = weights
            .iter()
            .enumerate()
            .map(|(id, &weight)| OfflineNode {
                id,
                weight,
                initial_load: 0.0,
            })
            .collect();
        Self::new(offline, Vec::new(), p, None)
    }
}

/// What happened to one arrival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrivalRecord {
    pub assigned: Option<usize>,
    /// `w_u p f(ℓ_u)` credited to the assigned node.
    pub alpha_gain: f64,
    pub beta: f64,
    /// Taken by the outside competitor.
    pub siphoned: bool,
}

/// One trial of Stochastic Balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub thresholds: Vec<f64>,
    pub loads: Vec<f64>,
    pub alpha: Vec<f64>,
    pub arrivals: Vec<ArrivalRecord>,
    /// Nodes whose load crossed their threshold during the trial.
    pub matched: Vec<bool>,
}

impl TrialOutcome {
    pub fn matched_weight(&self, inst: &SimInstance) -> f64 {
        inst.offline
            .iter()
            .zip(&self.matched)
            .filter(|(_, &m)| m)
            .map(|(u, _)| u.weight)
            .sum()
    }

    /// `(α_target + Σ_{counted v} β_v) / w_target`.
    pub fn target_payoff(&self, inst: &SimInstance) -> Option<f64> {
        let t = inst.target?;
        let betas: f64 = self
            .arrivals
            .iter()
            .zip(&inst.arrivals)
            .filter(|(_, a)| a.counted)
            .map(|(r, _)| r.beta)
            .sum();
        Some((self.alpha[t] + betas) / inst.offline[t].weight)
    }
}

/// Runs one trial with thresholds drawn from `seed`.
pub fn run_stochastic_balance(inst: &SimInstance, f: &GridFunction, seed: u64) -> TrialOutcome {
    run_with_rng(inst, f, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Trial `index` of a batch seeded with `master_seed`; the same draw that
/// [`run_instance_batch`] uses for that trial.
pub fn run_trial(inst: &SimInstance, f: &GridFunction, master_seed: u64, index: u64) -> TrialOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    run_with_rng(inst, f, &mut rng)
}

fn run_with_rng(inst: &SimInstance, f: &GridFunction, rng: &mut impl Rng) -> TrialOutcome {
    let p = inst.p;
    let thresholds: Vec<f64> = inst
        .offline
        .iter()
        .map(|_| -(1.0 - rng.gen::<f64>()).ln())
        .collect();
    let mut loads: Vec<f64> = inst.offline.iter().map(|u| u.initial_load).collect();
    let mut alpha = vec![0.0; inst.offline.len()];
    let mut records = Vec::with_capacity(inst.arrivals.len());

    for a in &inst.arrivals {
        let mut best: Option<(usize, f64, f64)> = None;
        for &u in &a.neighbors {
            if loads[u] >= thresholds[u] {
                continue;
            }
            let fu = f.eval(loads[u]);
            let score = inst.offline[u].weight * p * (1.0 - fu);
            best = match best {
                Some((b, s, fb)) => {
                    let tie = (score - s).abs() <= TIE_TOL * s.abs().max(score.abs());
                    if (tie && u > b) || (!tie && score > s) {
                        Some((u, score, fu))
                    } else {
                        Some((b, s, fb))
                    }
                }
                None => Some((u, score, fu)),
            };
        }
        let outside_wins = match (a.siphon, best) {
            (Some(_), None) => true,
            (Some(s), Some((_, b, _))) => b <= s + TIE_TOL * s.abs().max(b.abs()),
            (None, _) => false,
        };
        let rec = if outside_wins {
            ArrivalRecord {
                assigned: None,
                alpha_gain: 0.0,
                beta: a.siphon.unwrap_or(0.0),
                siphoned: true,
            }
        } else if let Some((u, _, fu)) = best {
            let gain = inst.offline[u].weight * p;
            let da = gain * fu;
            alpha[u] += da;
            loads[u] += p;
            ArrivalRecord {
                assigned: Some(u),
                alpha_gain: da,
                beta: gain * (1.0 - fu),
                siphoned: false,
            }
        } else {
            ArrivalRecord {
                assigned: None,
                alpha_gain: 0.0,
                beta: 0.0,
                siphoned: false,
            }
        };
        records.push(rec);
    }

    let matched = inst
        .offline
        .iter()
        .enumerate()
        .map(|(u, node)| node.initial_load < thresholds[u] && loads[u] >= thresholds[u])
        .collect();
    TrialOutcome {
        thresholds,
        loads,
        alpha,
        arrivals: records,
        matched,
    }
}

/// How Type II arrivals are realized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeIIMode {
    /// An outside competitor tied with the target takes the arrival.
    Oracle,
    /// `m` fresh competitor copies with load `ell_tilde` and weight tuned to
    /// tie the target exactly.
    Gadget { m: usize, ell_tilde: f64 },
}

/// `log10` of the chance that all `m` gadget copies are unavailable,
/// `m · log10(1 - e^{-ℓ̃})`.
pub fn gadget_failure_log10(ell_tilde: f64, m: usize) -> f64 {
    m as f64 * (1.0 - (-ell_tilde).exp()).log10()
}

/// The instance the adversary builds for `strat`: `⌈ℓ/p⌉` pre-load arrivals
/// and `⌈ψ̃/p⌉` Type I arrivals adjacent only to the target (node 0), then
/// `⌈(ψ − ψ̃)/p⌉` Type II arrivals. The competitor score of a Type II
/// arrival is fixed in advance from the target's scheduled load.
pub fn build_adversarial_instance(
    w_star: f64,
    strat: &AdversaryStrategy,
    p: f64,
    mode: TypeIIMode,
    f: &GridFunction,
) -> Result<SimInstance> {
    if !(w_star > 0.0 && w_star.is_finite()) {
        return domain(format!("w* must be positive, got {w_star}"));
    }
    if !(p > 0.0 && p <= 1.0) || ((1.0 / p) - (1.0 / p).round()).abs() > 1e-9 / p {
        return domain(format!("1/p must be a positive integer, got p = {p}"));
    }
    let pre = steps(strat.ell, p);
    let type_one = steps(strat.psi_tilde, p);
    let type_two = steps(strat.psi - strat.psi_tilde, p);
    let scheduled = (pre + type_one) as f64 * p;
    let target_score = w_star * p * (1.0 - f.eval(scheduled));

    let mut offline = vec![OfflineNode {
        id: 0,
        weight: w_star,
        initial_load: 0.0,
    }];
    let mut arrivals = Vec::with_capacity(pre + type_one + type_two);
    for _ in 0..pre {
        arrivals.push(Arrival {
            neighbors: vec![0],
            siphon: None,
            counted: false,
        });
    }
    for _ in 0..type_one {
        arrivals.push(Arrival::to(vec![0]));
    }
    for _ in 0..type_two {
        match mode {
            TypeIIMode::Oracle => arrivals.push(Arrival {
                neighbors: vec![0],
                siphon: Some(target_score),
                counted: true,
            }),
            TypeIIMode::Gadget { m, ell_tilde } => {
                if m == 0 || !(ell_tilde >= 0.0) {
                    return domain("gadget mode needs m >= 1 and ell_tilde >= 0");
                }
                let copy_gap = 1.0 - f.eval(ell_tilde);
                if copy_gap <= 0.0 {
                    return domain("f(ell_tilde) must be below 1 for the gadget tie");
                }
                let weight = w_star * (1.0 - f.eval(scheduled)) / copy_gap;
                if !(weight > 0.0) {
                    return domain("the target's scheduled score is zero; no gadget weight ties it");
                }
                let mut neighbors = vec![0];
                for _ in 0..m {
                    let id = offline.len();
                    offline.push(OfflineNode {
                        id,
                        weight,
                        initial_load: ell_tilde,
                    });
                    neighbors.push(id);
                }
                arrivals.push(Arrival::to(neighbors));
            }
        }
    }
    SimInstance::new(offline, arrivals, p, Some(0))
}

/// Batch statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: usize,
    /// Mean target payoff when the instance has a target, mean matched
    /// weight otherwise.
    pub mean: f64,
    pub stderr: f64,
    pub matched_weight_mean: f64,
    pub matched_weight_stderr: f64,
    pub match_frequency: Vec<f64>,
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs `trials` independent trials of `inst`.
pub fn run_instance_batch(inst: &SimInstance, f: &GridFunction, trials: usize, seed: u64) -> Result<SimResult> {
    if trials == 0 {
        return domain("trials must be at least 1");
    }
    let per_trial: Vec<(Option<f64>, f64, Vec<bool>)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let out = run_trial(inst, f, seed, i as u64);
            (out.target_payoff(inst), out.matched_weight(inst), out.matched)
        })
        .collect();

    let weights: Vec<f64> = per_trial.iter().map(|t| t.1).collect();
    let (mw_mean, mw_err) = mean_stderr(&weights);
    let mut freq = vec![0.0; inst.offline.len()];
    for (_, _, m) in &per_trial {
        for (acc, &hit) in freq.iter_mut().zip(m) {
            if hit {
                *acc += 1.0;
            }
        }
    }
    freq.iter_mut().for_each(|c| *c /= trials as f64);
    let (mean, stderr) = if inst.target.is_some() {
        let payoffs: Vec<f64> = per_trial.iter().filter_map(|t| t.0).collect();
        mean_stderr(&payoffs)
    } else {
        (mw_mean, mw_err)
    };
    Ok(SimResult {
        trials,
        mean,
        stderr,
        matched_weight_mean: mw_mean,
        matched_weight_stderr: mw_err,
        match_frequency: freq,
    })
}

/// Monte Carlo estimate of `κ(ℓ, ψ, ψ̃) / w*` with oracle Type II arrivals.
pub fn estimate_kappa(strat: &AdversaryStrategy, f: &GridFunction, p: f64, trials: usize, seed: u64) -> Result<SimResult> {
    estimate_kappa_with_mode(strat, f, p, trials, seed, TypeIIMode::Oracle)
}

pub fn estimate_kappa_with_mode(
    strat: &AdversaryStrategy,
    f: &GridFunction,
    p: f64,
    trials: usize,
    seed: u64,
    mode: TypeIIMode,
) -> Result<SimResult> {
    let inst = build_adversarial_instance(1.0, strat, p, mode, f)?;
    run_instance_batch(&inst, f, trials, seed)
}
