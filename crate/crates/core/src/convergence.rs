//! The `n ↔ 2n` solution maps and the finite-to-limit bound certification.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{w1_constant, PayoffSums};
use crate::error::{domain, Error, Result};
use crate::lp_model::{build_aug_lp, build_aug_ub_lp, LpFamily, LpInstance};
use crate::lp_solver::{check_feasible, solve_lazy, Diagnostics, LpSolution, SolverOptions};
use crate::gain_function::FunctionSpace;
use crate::ONE_MINUS_INV_E;

/// Residual accepted when checking the input of the solution maps.
pub const MAP_INPUT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundDirection {
    Down,
    Up,
    Nearest,
}

/// Renders `value` with four decimals, rounding in the given direction.
/// Values within `1e-6` of a grid point (in units of `1e-4`) snap to it, so
/// that exact decimal inputs such as `0.5803` stay unchanged.
pub fn round_report(value: f64, direction: RoundDirection) -> String {
    let scaled = value * 1e4;
    let nearest = scaled.round();
    let r = if (scaled - nearest).abs() < 1e-6 {
        nearest
    } else {
        match direction {
            RoundDirection::Down => scaled.floor(),
            RoundDirection::Up => scaled.ceil(),
            RoundDirection::Nearest => nearest,
        }
    };
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{:.4}", r / 1e4)
}

fn check_tau(tau: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&tau) {
        return domain(format!("tau must lie in [0, 1], got {tau}"));
    }
    Ok(())
}

/// `(eta - tau/n, eta + tau/n)`.
pub fn bound_from_eta(n: usize, eta: f64, tau: f64) -> Result<(f64, f64)> {
    check_tau(tau)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    let w = tau / n as f64;
    Ok((eta - w, eta + w))
}

/// `zeta + tau/n`.
pub fn bound_from_zeta(n: usize, zeta: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    if n == 0 {
        return domain("n must be at least 1");
    }
    Ok(zeta + tau / n as f64)
}

fn require_feasible(lp: &LpInstance, y: f64, x: &[f64]) -> Result<()> {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.push(y);
    v.extend_from_slice(x);
    let rep = check_feasible(lp, &v, MAP_INPUT_TOL);
    if !rep.feasible {
        return Err(Error::InfeasiblePoint {
            row: rep.worst_row.unwrap_or(0),
            label: rep.worst_label.unwrap_or_default(),
            residual: rep.max_residual,
        });
    }
    Ok(())
}

/// Maps a feasible point of AUG-LP(n) to one of AUG-LP(2n): every grid value
/// is repeated, `x̃_{2t-1} = x̃_{2t} = x_t`, and `ỹ = y - (1 - 1/e)/(2n)`.
pub fn double_solution(y: f64, x: &[f64], n: usize) -> Result<(f64, Vec<f64>)> {
    if n == 0 || x.len() != n + 1 {
        return domain(format!("expected {} grid values for n = {n}, got {}", n + 1, x.len()));
    }
    require_feasible(&build_aug_lp(n)?, y, x)?;
    Ok(double_unchecked(y, x, n))
}

fn double_unchecked(y: f64, x: &[f64], n: usize) -> (f64, Vec<f64>) {
    let mut out = Vec::with_capacity(2 * n + 1);
    out.push(x[0]);
    for &v in &x[1..] {
        out.push(v);
        out.push(v);
    }
    (y - ONE_MINUS_INV_E / (2 * n) as f64, out)
}

/// Maps a feasible point of AUG-LP(2n) to one of AUG-LP(n): interior values
/// average adjacent pairs, `x_t = (x̃_{2t} + x̃_{2t+1})/2`, the endpoints are
/// kept, and `y = ỹ - (1 - 1/e)/(2n)`.
pub fn halve_solution(y: f64, x: &[f64], n: usize) -> Result<(f64, Vec<f64>)> {
    if n == 0 || x.len() != 2 * n + 1 {
        return domain(format!(
            "expected {} grid values for 2n = {}, got {}",
            2 * n + 1,
            2 * n,
            x.len()
        ));
    }
    require_feasible(&build_aug_lp(2 * n)?, y, x)?;
    let mut out = Vec::with_capacity(n + 1);
    out.push(x[0]);
    for t in 1..n {
        out.push((x[2 * t] + x[2 * t + 1]) / 2.0);
    }
    out.push(x[2 * n]);
    Ok((y - ONE_MINUS_INV_E / (2 * n) as f64, out))
}

/// A random feasible point of AUG-LP(n): grid values between the envelope and
/// `1 - 1/e` built from sorted uniforms (or the bare envelope with
/// probability 1/10), and `y` equal to the smallest payoff minus a uniform
/// slack in `[0, 0.1]`.
pub fn random_feasible_point(n: usize, rng: &mut impl Rng) -> (f64, Vec<f64>) {
    let exps = crate::exp_table(n, n);
    let envelope_only = rng.gen_bool(0.1);
    let mut s: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    s.sort_by(f64::total_cmp);
    let mut x: Vec<f64> = (0..n)
        .map(|t| {
            let env = 1.0 - exps[t];
            if envelope_only {
                env
            } else {
                env.max(ONE_MINUS_INV_E * s[t])
            }
        })
        .collect();
    x.push(ONE_MINUS_INV_E);
    let sums = PayoffSums::new(&x, &exps);
    let payoff = sums.w1(w1_constant()).min(sums.min_w2().0);
    let y = payoff - rng.gen_range(0.0..=0.1);
    (y, x)
}

/// The rounded strings of a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundedBounds {
    pub value: String,
    pub lower: Option<String>,
    pub upper: String,
}

/// A finite-`n` optimum and the interval it certifies for the limit.
/// Rounding is always outward: lower bounds and `η(n)` down, upper bounds
/// and `ζ(n)` up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: LpFamily,
    pub space: FunctionSpace,
    pub n: usize,
    pub value: f64,
    pub tau: f64,
    pub lower: Option<f64>,
    pub upper: f64,
    pub rounded: RoundedBounds,
    pub solver: Diagnostics,
}

impl BoundReport {
    /// Builds the report from a solved instance.
    pub fn from_solution(lp: &LpInstance, sol: &LpSolution) -> Result<Self> {
        if !sol.is_optimal() {
            return Err(Error::Solver {
                status: format!("{:?}", sol.status),
            });
        }
        let n = lp.grid();
        let tau = lp.tau();
        let value = sol.objective_value;
        let (space, lower, upper, value_dir) = match lp.family() {
            LpFamily::Aug => {
                let (lo, hi) = bound_from_eta(n, value, tau)?;
                (FunctionSpace::F3, Some(lo), hi, RoundDirection::Down)
            }
            LpFamily::AugUbF0 => (FunctionSpace::F0, None, bound_from_zeta(n, value, tau)?, RoundDirection::Up),
            LpFamily::AugUbF1 => (FunctionSpace::F1, None, bound_from_zeta(n, value, tau)?, RoundDirection::Up),
            other => return domain(format!("bounds are defined for the aug and ub families, not {other}")),
        };
        Ok(Self {
            family: lp.family(),
            space,
            n,
            value,
            tau,
            lower,
            upper,
            rounded: RoundedBounds {
                value: round_report(value, value_dir),
                lower: lower.map(|l| round_report(l, RoundDirection::Down)),
                upper: round_report(upper, RoundDirection::Up),
            },
            solver: sol.diagnostics.clone(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Solves the requested family lazily and certifies its bounds.
pub fn certify(family: LpFamily, n: usize, opts: &SolverOptions) -> Result<BoundReport> {
    let lp = match family {
        LpFamily::Aug => build_aug_lp(n)?,
        LpFamily::AugUbF0 => build_aug_ub_lp(n, FunctionSpace::F0)?,
        LpFamily::AugUbF1 => build_aug_ub_lp(n, FunctionSpace::F1)?,
        other => return domain(format!("bounds are defined for the aug and ub families, not {other}")),
    };
    BoundReport::from_solution(&lp, &solve_lazy(&lp, opts))
}

/// How the five table strings of a row are derived from `η(n)` and `ζ(n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableConvention {
    /// Outward rounding of the exact values: `η(n)` and the lower bound
    /// down; the upper bounds and `ζ(n)` up. Every string is a valid bound.
    Outward,
    /// `η(n)` and `ζ(n)` rounded to nearest, and the bound columns computed
    /// from those four-decimal values with outward rounding.
    Nearest,
}

/// One row of the six-column table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub eta: f64,
    pub zeta: f64,
    pub cells: [String; 5],
}

impl TableRow {
    pub fn new(n: usize, eta: f64, zeta: f64, convention: TableConvention) -> Result<Self> {
        let (eta_base, zeta_base, eta_str, zeta_str) = match convention {
            TableConvention::Outward => (
                eta,
                zeta,
                round_report(eta, RoundDirection::Down),
                round_report(zeta, RoundDirection::Up),
            ),
            TableConvention::Nearest => {
                let e = round_report(eta, RoundDirection::Nearest);
                let z = round_report(zeta, RoundDirection::Nearest);
                (parse4(&e), parse4(&z), e, z)
            }
        };
        let (lo, hi) = bound_from_eta(n, eta_base, ONE_MINUS_INV_E)?;
        let zeta_hi = bound_from_zeta(n, zeta_base, 1.0)?;
        Ok(Self {
            n,
            eta,
            zeta,
            cells: [
                eta_str,
                round_report(lo, RoundDirection::Down),
                round_report(hi, RoundDirection::Up),
                zeta_str,
                round_report(zeta_hi, RoundDirection::Up),
            ],
        })
    }
}

fn parse4(s: &str) -> f64 {
    s.parse().expect("round_report renders a decimal number")
}

pub const TABLE_HEADER: &str = "n,eta_n,eta_lower,eta_upper,zeta_n,zeta_upper";

/// Solves AUG-LP(n) and AUG-UB-LP(n, F0) for each `n` and returns the rows.
pub fn table_rows(n_list: &[usize], opts: &SolverOptions, convention: TableConvention) -> Result<Vec<TableRow>> {
    n_list
        .iter()
        .map(|&n| {
            let eta = solve_value(&build_aug_lp(n)?, opts)?;
            let zeta = solve_value(&build_aug_ub_lp(n, FunctionSpace::F0)?, opts)?;
            TableRow::new(n, eta, zeta, convention)
        })
        .collect()
}

fn solve_value(lp: &LpInstance, opts: &SolverOptions) -> Result<f64> {
    let sol = solve_lazy(lp, opts);
    if !sol.is_optimal() {
        return Err(Error::Solver {
            status: format!("{:?}", sol.status),
        });
    }
    Ok(sol.objective_value)
}

/// CSV with [`TABLE_HEADER`] and one line per row.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{}\n", r.n, r.cells.join(",")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain_function::GridFunction;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rounding() {
        assert_eq!(round_report(0.58034, RoundDirection::Down), "0.5803");
        assert_eq!(round_report(0.58301, RoundDirection::Up), "0.5831");
        assert_eq!(round_report(0.5803, RoundDirection::Down), "0.5803");
        assert_eq!(round_report(0.5803, RoundDirection::Up), "0.5803");
        assert_eq!(round_report(0.57127, RoundDirection::Nearest), "0.5713");
        assert_eq!(round_report(-0.01611, RoundDirection::Down), "-0.0162");
    }

    #[test]
    fn bounds() {
        let (lo, hi) = bound_from_eta(10, 0.5713, ONE_MINUS_INV_E).unwrap();
        assert_eq!(round_report(lo, RoundDirection::Down), "0.5080");
        assert_eq!(round_report(hi, RoundDirection::Up), "0.6346");
        let (lo, hi) = bound_from_eta(1000, 0.5803, ONE_MINUS_INV_E).unwrap();
        assert!(round_report(lo, RoundDirection::Down).as_str() >= "0.5796");
        assert!(round_report(hi, RoundDirection::Up).as_str() <= "0.5810");
        assert_eq!(bound_from_eta(7, 0.4, 0.0).unwrap(), (0.4, 0.4));
        assert!(bound_from_eta(7, 0.4, 1.5).is_err());
        assert_eq!(round_report(bound_from_zeta(1000, 0.5831, 1.0).unwrap(), RoundDirection::Up), "0.5841");
        assert_eq!(round_report(bound_from_zeta(10, 0.5736, 1.0).unwrap(), RoundDirection::Up), "0.6736");
        assert_eq!(round_report(bound_from_zeta(100, 0.5823, 1.0).unwrap(), RoundDirection::Up), "0.5923");
    }

    #[test]
    fn map_examples() {
        let (y, x) = double_solution(0.3, &[0.0, ONE_MINUS_INV_E], 1).unwrap();
        assert_eq!(x, vec![0.0, ONE_MINUS_INV_E, ONE_MINUS_INV_E]);
        assert!((y - (0.3 - ONE_MINUS_INV_E / 2.0)).abs() < 1e-15);
        assert!((y + 0.0161).abs() < 1e-4);

        let (y, x) = halve_solution(0.2, &[0.0, 0.5, ONE_MINUS_INV_E], 1).unwrap();
        assert_eq!(x, vec![0.0, ONE_MINUS_INV_E]);
        assert!((y + 0.1161).abs() < 1e-4);
    }

    #[test]
    fn maps_reject_infeasible_input() {
        let err = double_solution(0.9, &[0.0, ONE_MINUS_INV_E], 1).unwrap_err();
        assert!(matches!(err, Error::InfeasiblePoint { .. }));
        assert!(halve_solution(0.0, &[0.0, 0.1, ONE_MINUS_INV_E], 1).is_err());
        assert!(double_solution(0.0, &[0.0], 1).is_err());
    }

    #[test]
    fn envelope_maps() {
        let f = GridFunction::envelope(10).unwrap();
        let (y, x) = double_solution(0.0, f.values(), 10).unwrap();
        let mut v = vec![y];
        v.extend(x);
        assert!(check_feasible(&build_aug_lp(20).unwrap(), &v, 1e-12).feasible);

        let g = GridFunction::envelope(20).unwrap();
        let (y, x) = halve_solution(0.0, g.values(), 10).unwrap();
        let mut v = vec![y];
        v.extend(x);
        assert!(check_feasible(&build_aug_lp(10).unwrap(), &v, 1e-12).feasible);
    }

    #[test]
    fn random_points_are_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 5, 20] {
            let lp = build_aug_lp(n).unwrap();
            for _ in 0..20 {
                let (y, x) = random_feasible_point(n, &mut rng);
                let mut v = vec![y];
                v.extend(x);
                assert!(check_feasible(&lp, &v, 1e-12).feasible);
            }
        }
    }

    #[test]
    fn table_conventions() {
        let nearest = TableRow::new(10, 0.5712752935, 0.5735946843, TableConvention::Nearest).unwrap();
        assert_eq!(nearest.cells, ["0.5713", "0.5080", "0.6346", "0.5736", "0.6736"].map(String::from));
        let outward = TableRow::new(10, 0.5712752935, 0.5735946843, TableConvention::Outward).unwrap();
        assert_eq!(outward.cells, ["0.5712", "0.5080", "0.6345", "0.5736", "0.6736"].map(String::from));
        let csv = table_csv(&[nearest]);
        assert!(csv.starts_with(TABLE_HEADER));
        assert_eq!(csv.lines().nth(1).unwrap(), "10,0.5713,0.5080,0.6346,0.5736,0.6736");
    }
}
