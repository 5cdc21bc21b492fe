//! Discretized gain-sharing functions and the function spaces they live in.
//!
//! A [`GridFunction`] stores `x_t = f(t/n)` for `t = 0..=n` plus an explicit
//! tail value used for every `z > 1`. Membership in F0/F1/F3/F4 is checked on
//! the grid and reported as a list of [`Violation`]s.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ONE_MINUS_INV_E;

/// Default additive tolerance for membership checks.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Slack used when snapping an off-grid argument up to the next grid index,
/// so that `k * (1/n)` computed in floating point lands on `k`.
const SNAP_EPS: f64 = 1e-9;

/// A gain-sharing function sampled on the uniform grid `{0, 1/n, ..., 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction")]
pub struct GridFunction {
    n: usize,
    values: Vec<f64>,
    tail: f64,
}

#[derive(Deserialize)]
struct RawGridFunction {
    n: usize,
    values: Vec<f64>,
    tail: f64,
}

impl TryFrom<RawGridFunction> for GridFunction {
    type Error = Error;

    fn try_from(raw: RawGridFunction) -> Result<Self> {
        let f = GridFunction::new(raw.values, raw.tail)?;
        if f.n != raw.n {
            return domain(format!(
                "declared n = {} but {} values given",
                raw.n,
                f.values.len()
            ));
        }
        Ok(f)
    }
}

impl GridFunction {
    /// Builds a grid function from `n + 1` samples and a tail value.
    pub fn new(values: Vec<f64>, tail: f64) -> Result<Self> {
        if values.len() < 2 {
            return domain("a grid function needs at least two samples (n >= 1)");
        }
        if let Some((t, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return domain(format!("x_{t} = {v} is outside [0, 1]"));
        }
        if !(0.0..=1.0).contains(&tail) {
            return domain(format!("tail = {tail} is outside [0, 1]"));
        }
        Ok(Self {
            n: values.len() - 1,
            values,
            tail,
        })
    }

    /// Samples `g` at every grid point; values are clamped into `[0, 1]`.
    pub fn from_fn(n: usize, tail: f64, g: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return domain("grid resolution n must be at least 1");
        }
        let values = (0..=n)
            .map(|t| g(t as f64 / n as f64).clamp(0.0, 1.0))
            .collect();
        Self::new(values, tail)
    }

    /// The F3 lower envelope `x_t = 1 - e^{-t/n}` with tail `1 - 1/e`.
    pub fn envelope(n: usize) -> Result<Self> {
        if n == 0 {
            return domain("grid resolution n must be at least 1");
        }
        let exps = crate::exp_table(n, n);
        let mut values: Vec<f64> = exps.iter().map(|e| 1.0 - e).collect();
        values[n] = ONE_MINUS_INV_E;
        Self::new(values, ONE_MINUS_INV_E)
    }

    /// A constant function, tail included.
    pub fn constant(n: usize, c: f64) -> Result<Self> {
        if n == 0 {
            return domain("grid resolution n must be at least 1");
        }
        Self::new(vec![c; n + 1], c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// `x_t` for `t <= n`, the tail beyond.
    #[inline]
    pub fn at_index(&self, t: usize) -> f64 {
        if t <= self.n {
            self.values[t]
        } else {
            self.tail
        }
    }

    /// Evaluates `f(z)` by snapping `z` up to the next grid point; arguments
    /// strictly past 1 return the tail.
    pub fn eval(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return self.values[0];
        }
        let scaled = z * self.n as f64;
        let idx = (scaled - SNAP_EPS).ceil().max(0.0) as usize;
        self.at_index(idx)
    }

    /// CSV with columns `t,z,x_t`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,z,x_t\n");
        for (t, x) in self.values.iter().enumerate() {
            out.push_str(&format!("{t},{:.17e},{:.17e}\n", t as f64 / self.n as f64, x));
        }
        out
    }
}

/// The implemented function spaces, nested as F4 ⊂ F3 ⊂ F1 ⊂ F0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionSpace {
    F0,
    F1,
    F3,
    F4,
}

impl fmt::Display for FunctionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionSpace::F0 => "F0",
            FunctionSpace::F1 => "F1",
            FunctionSpace::F3 => "F3",
            FunctionSpace::F4 => "F4",
        };
        f.write_str(s)
    }
}

impl FromStr for FunctionSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f0" => Ok(FunctionSpace::F0),
            "f1" => Ok(FunctionSpace::F1),
            "f3" => Ok(FunctionSpace::F3),
            "f4" => Ok(FunctionSpace::F4),
            other => domain(format!("unknown function space '{other}'")),
        }
    }
}

/// Which membership constraint a [`Violation`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MembershipConstraint {
    /// `x_t <= x_{t+1}`; index `n` refers to `x_n <= tail`.
    Monotone,
    /// `x_n <= 1 - 1/e` (F1).
    EndpointCap,
    /// `x_t >= 1 - e^{-t/n}` (F3).
    Envelope,
    /// `x_n = 1 - 1/e` (F3).
    EndpointValue,
    /// `tail = 1 - 1/e` (F3).
    TailValue,
    /// `n (x_{t+1} - x_t) <= e^{-t/n} - (1 - x_t)` (F4).
    SlopeCap,
}

/// A single failed membership constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: MembershipConstraint,
    pub t: usize,
    pub residual: f64,
}

/// The analytical optimum over F4:
/// `1 - (e^{-z} + e^{z-2}) / 2` on `[0, 1]`, constant `1 - 1/e` afterwards.
pub fn analytic_f4_value(z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return domain(format!("analytic f is defined for z >= 0, got {z}"));
    }
    if z >= 1.0 {
        return Ok(ONE_MINUS_INV_E);
    }
    Ok(1.0 - ((-z).exp() + (z - 2.0).exp()) / 2.0)
}

/// Samples [`analytic_f4_value`] on the `n`-grid.
pub fn sample_analytic_f4(n: usize) -> Result<GridFunction> {
    if n == 0 {
        return domain("grid resolution n must be at least 1");
    }
    let values = (0..=n)
        .map(|t| analytic_f4_value(t as f64 / n as f64))
        .collect::<Result<Vec<_>>>()?;
    GridFunction::new(values, ONE_MINUS_INV_E)
}

/// Pointwise lower bound a space imposes on `x_t`.
pub fn lower_envelope_value(space: FunctionSpace, t: usize, n: usize) -> Result<f64> {
    if n == 0 || t > n {
        return domain(format!("grid index t = {t} out of range for n = {n}"));
    }
    Ok(match space {
        FunctionSpace::F0 | FunctionSpace::F1 => 0.0,
        FunctionSpace::F3 | FunctionSpace::F4 => 1.0 - (-(t as f64) / n as f64).exp(),
    })
}

/// Lists every membership constraint of `space` that `f` violates by more
/// than `tol`. An empty list means `f` is a member.
pub fn check_space(f: &GridFunction, space: FunctionSpace, tol: f64) -> Vec<Violation> {
    let n = f.n;
    let x = &f.values;
    let mut out = Vec::new();
    let mut push = |constraint, t, residual: f64| {
        if residual > tol {
            out.push(Violation {
                constraint,
                t,
                residual,
            });
        }
    };

    for t in 0..n {
        push(MembershipConstraint::Monotone, t, x[t] - x[t + 1]);
    }
    push(MembershipConstraint::Monotone, n, x[n] - f.tail);
    if space == FunctionSpace::F0 {
        return out;
    }

    push(MembershipConstraint::EndpointCap, n, x[n] - ONE_MINUS_INV_E);
    if space == FunctionSpace::F1 {
        return out;
    }

    let exps = crate::exp_table(n, n);
    for t in 0..=n {
        push(MembershipConstraint::Envelope, t, (1.0 - exps[t]) - x[t]);
    }
    push(
        MembershipConstraint::EndpointValue,
        n,
        (x[n] - ONE_MINUS_INV_E).abs(),
    );
    push(
        MembershipConstraint::TailValue,
        n,
        (f.tail - ONE_MINUS_INV_E).abs(),
    );
    if space == FunctionSpace::F3 {
        return out;
    }

    let nf = n as f64;
    for t in 0..n {
        let slope = nf * (x[t + 1] - x[t]);
        push(
            MembershipConstraint::SlopeCap,
            t,
            slope - (exps[t] - (1.0 - x[t])),
        );
    }
    out
}
