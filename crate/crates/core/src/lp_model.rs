//! Builders for the auxiliary LP families and their plain-text form.
//!
//! Variables are `y` followed by `x_0..x_n`; all variables are free and every
//! bound is an explicit row. Structure rows and the W1 row are stored
//! explicitly. The `Θ(n²)` W2 family is generated on demand from its `(i, j)`
//! index, with row ids following the explicit rows in lexicographic order.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversary::{w1_constant, PayoffSums};
use crate::error::{domain, Error, Result};
use crate::gain_function::FunctionSpace;
use crate::ONE_MINUS_INV_E;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpFamily {
    /// AUG-LP: F3 envelope, `x_n = 1 - 1/e`.
    Aug,
    /// AUG-UB-LP over F0: box `[0, 1]`.
    AugUbF0,
    /// AUG-UB-LP over F1: box `[0, 1 - 1/e]`.
    AugUbF1,
    /// The vanishing-`p` restatement with grid `1/p`.
    DiscreteP,
    /// Any other explicitly given LP.
    Custom,
}

impl LpFamily {
    fn keyword(self) -> &'static str {
        match self {
            LpFamily::Aug => "aug",
            LpFamily::AugUbF0 => "aug_ub_f0",
            LpFamily::AugUbF1 => "aug_ub_f1",
            LpFamily::DiscreteP => "discrete_p",
            LpFamily::Custom => "custom",
        }
    }
}

impl fmt::Display for LpFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for LpFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "aug" => LpFamily::Aug,
            "aug_ub_f0" => LpFamily::AugUbF0,
            "aug_ub_f1" => LpFamily::AugUbF1,
            "discrete_p" => LpFamily::DiscreteP,
            "custom" => LpFamily::Custom,
            other => return domain(format!("unknown LP family '{other}'")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

/// What a row encodes, for diagnostics and lazy-set selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// `x_t >= 1 - e^{-t/n}`
    Envelope(usize),
    /// `x_t >= 0`
    LowerBox(usize),
    /// `x_t <= x_{t+1}`
    Monotone(usize),
    /// `x_n = 1 - 1/e`
    EndpointFix,
    /// `x_n <= cap`
    EndpointCap,
    W1,
    W2 { i: usize, j: usize },
    Custom(usize),
}

impl RowKind {
    pub fn label(&self) -> String {
        match *self {
            RowKind::Envelope(t) => format!("env_{t}"),
            RowKind::LowerBox(t) => format!("lb_{t}"),
            RowKind::Monotone(t) => format!("mono_{t}"),
            RowKind::EndpointFix => "fix".into(),
            RowKind::EndpointCap => "cap".into(),
            RowKind::W1 => "w1".into(),
            RowKind::W2 { i, j } => format!("w2_{i}_{j}"),
            RowKind::Custom(k) => format!("c{k}"),
        }
    }
}

/// One linear constraint `Σ coeff·var  rel  rhs`, coefficients sorted by
/// variable index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(k, a)| a * x[k]).sum()
    }

    /// Positive amount by which `x` violates the row (non-positive if satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.relation {
            Relation::Le => act - self.rhs,
            Relation::Ge => self.rhs - act,
            Relation::Eq => (act - self.rhs).abs(),
        }
    }
}

/// An LP `max objective·v` subject to explicit rows plus, for the grid
/// families, the implicit W2 family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLp")]
pub struct LpInstance {
    family: LpFamily,
    grid: usize,
    var_names: Vec<String>,
    objective: Vec<(usize, f64)>,
    rows: Vec<Constraint>,
    w1_constant: Option<f64>,
    tau: f64,
    #[serde(skip)]
    exps: Vec<f64>,
}

#[derive(Deserialize)]
struct RawLp {
    family: LpFamily,
    grid: usize,
    var_names: Vec<String>,
    objective: Vec<(usize, f64)>,
    rows: Vec<Constraint>,
    #[allow(dead_code)]
    w1_constant: Option<f64>,
    tau: f64,
}

impl TryFrom<RawLp> for LpInstance {
    type Error = Error;

    fn try_from(raw: RawLp) -> Result<Self> {
        let lp = match raw.family {
            LpFamily::Custom => LpInstance::custom(raw.var_names, raw.objective, raw.rows, raw.tau)?,
            family => {
                let lp = build_family(family, raw.grid)?;
                if lp.rows != raw.rows || lp.objective != raw.objective || lp.var_names != raw.var_names {
                    return domain(format!("serialized rows do not match {family}({})", raw.grid));
                }
                lp
            }
        };
        Ok(lp)
    }
}

/// Index of variable `x_t`.
#[inline]
pub fn x_var(t: usize) -> usize {
    t + 1
}

/// Index of `y`.
pub const Y_VAR: usize = 0;

impl LpInstance {
    /// An explicit LP with no implicit rows.
    pub fn custom(
        var_names: Vec<String>,
        objective: Vec<(usize, f64)>,
        rows: Vec<Constraint>,
        tau: f64,
    ) -> Result<Self> {
        let nv = var_names.len();
        let check = |coeffs: &[(usize, f64)], what: &str| -> Result<()> {
            if let Some(&(k, _)) = coeffs.iter().find(|(k, _)| *k >= nv) {
                return domain(format!("{what} references undeclared variable {k}"));
            }
            Ok(())
        };
        check(&objective, "objective")?;
        for (r, row) in rows.iter().enumerate() {
            check(&row.coeffs, &format!("row {r}"))?;
        }
        Ok(Self {
            family: LpFamily::Custom,
            grid: 0,
            var_names,
            objective,
            rows,
            w1_constant: None,
            tau,
            exps: Vec::new(),
        })
    }

    pub fn family(&self) -> LpFamily {
        self.family
    }

    /// Grid resolution `n` (`1/p` for the discrete-`p` family, 0 for custom LPs).
    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn objective(&self) -> &[(usize, f64)] {
        &self.objective
    }

    pub fn w1_constant(&self) -> Option<f64> {
        self.w1_constant
    }

    pub fn explicit_rows(&self) -> &[Constraint] {
        &self.rows
    }

    fn has_w2(&self) -> bool {
        self.family != LpFamily::Custom
    }

    pub fn num_w2_rows(&self) -> usize {
        if self.has_w2() {
            (self.grid + 1) * (self.grid + 2) / 2
        } else {
            0
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len() + self.num_w2_rows()
    }

    /// Row id of the W2 row `(i, j)`.
    pub fn w2_id(&self, i: usize, j: usize) -> usize {
        let n = self.grid;
        debug_assert!(i <= n && j <= n - i);
        self.rows.len() + i * (n + 1) - i * i.saturating_sub(1) / 2 + j
    }

    fn w2_index(&self, id: usize) -> (usize, usize) {
        let n = self.grid;
        let mut off = id - self.rows.len();
        for i in 0..=n {
            let len = n - i + 1;
            if off < len {
                return (i, off);
            }
            off -= len;
        }
        unreachable!("row id {id} beyond the W2 family")
    }

    pub fn row_kind(&self, id: usize) -> RowKind {
        if id < self.rows.len() {
            self.rows[id].kind
        } else {
            let (i, j) = self.w2_index(id);
            RowKind::W2 { i, j }
        }
    }

    /// Materializes row `id`.
    pub fn row(&self, id: usize) -> Constraint {
        if id < self.rows.len() {
            return self.rows[id].clone();
        }
        let (i, j) = self.w2_index(id);
        self.w2_row(i, j)
    }

    fn w2_row(&self, i: usize, j: usize) -> Constraint {
        let n = self.grid;
        let nf = n as f64;
        let e = &self.exps;
        let tail = 1.0 - j as f64 / nf;
        let mut coeffs = vec![(Y_VAR, 1.0)];
        for t in 1..=i {
            let mut a = -(e[t] / nf);
            if j == 0 && t == i {
                a += tail;
            }
            coeffs.push((x_var(t), a));
        }
        if (j > 0 || i == 0) && tail != 0.0 {
            coeffs.push((x_var(i + j), tail));
        }
        let mut rhs = 0.0;
        for t in i + 1..=i + j {
            rhs += e[t] / nf;
        }
        Constraint {
            kind: RowKind::W2 { i, j },
            coeffs,
            relation: Relation::Le,
            rhs: rhs + tail,
        }
    }

    /// Rows of the initial lazy working set: every explicit row plus the W2
    /// rows with `j ∈ {0, n − i}`.
    pub fn initial_lazy_rows(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = (0..self.rows.len()).collect();
        if self.has_w2() {
            for i in 0..=self.grid {
                ids.push(self.w2_id(i, 0));
                if self.grid - i > 0 {
                    ids.push(self.w2_id(i, self.grid - i));
                }
            }
        }
        ids.sort_unstable();
        ids
    }

    /// Objective value at `v`.
    pub fn objective_value(&self, v: &[f64]) -> f64 {
        self.objective.iter().map(|&(k, a)| a * v[k]).sum()
    }

    /// A row-violation evaluator for one assignment.
    pub fn evaluator<'a>(&'a self, v: &'a [f64]) -> RowEvaluator<'a> {
        let sums = self
            .has_w2()
            .then(|| PayoffSums::new(&v[1..], &self.exps));
        RowEvaluator { lp: self, v, sums }
    }

    /// Plain-text export: header, variables, objective, one row per line with
    /// 17 significant digits. Deterministic.
    pub fn export(&self) -> String {
        let mut out = String::new();
        self.write_export(&mut out).expect("writing to a String cannot fail");
        out
    }

    pub fn write_export(&self, out: &mut impl fmt::Write) -> fmt::Result {
        writeln!(out, "# balance-bounds lp v1")?;
        writeln!(out, "family {}", self.family)?;
        writeln!(out, "grid {}", self.grid)?;
        writeln!(out, "tau {}", fmt_num(self.tau))?;
        writeln!(out, "vars {}", self.var_names.join(" "))?;
        writeln!(out, "max: {}", self.fmt_terms(&self.objective))?;
        for id in 0..self.num_rows() {
            let row = self.row(id);
            writeln!(
                out,
                "{}: {} {} {}",
                row.kind.label(),
                self.fmt_terms(&row.coeffs),
                row.relation.symbol(),
                fmt_num(row.rhs)
            )?;
        }
        Ok(())
    }

    fn fmt_terms(&self, coeffs: &[(usize, f64)]) -> String {
        let mut s = String::new();
        for (n, &(k, a)) in coeffs.iter().enumerate() {
            if n > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{} {}", fmt_num(a), self.var_names[k]);
        }
        s
    }

    /// Parses the output of [`LpInstance::export`]. Grid families are rebuilt
    /// and every parsed row is checked bit-for-bit against the rebuilt one.
    pub fn import(text: &str) -> Result<Self> {
        let mut family = None;
        let mut grid = None;
        let mut tau = None;
        let mut vars: Option<Vec<String>> = None;
        let mut objective = None;
        let mut rows: Vec<(usize, String, Constraint)> = Vec::new();

        for (ln, line) in text.lines().enumerate() {
            let line_no = ln + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("family ") {
                family = Some(rest.trim().parse::<LpFamily>().map_err(|e| err(e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("grid ") {
                grid = Some(rest.trim().parse::<usize>().map_err(|e| err(e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("tau ") {
                tau = Some(rest.trim().parse::<f64>().map_err(|e| err(e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("vars ") {
                vars = Some(rest.split_whitespace().map(String::from).collect());
            } else {
                let names = vars.as_ref().ok_or_else(|| err("'vars' must precede rows".into()))?;
                let (label, body) = line
                    .split_once(':')
                    .ok_or_else(|| err("expected 'label: terms'".into()))?;
                let tokens: Vec<&str> = body.split_whitespace().collect();
                if label == "max" {
                    objective = Some(parse_terms(&tokens, names).map_err(err)?);
                    continue;
                }
                if tokens.len() < 2 {
                    return Err(err("row needs a relation and a right-hand side".into()));
                }
                let (terms, tail) = tokens.split_at(tokens.len() - 2);
                let relation = match tail[0] {
                    "<=" => Relation::Le,
                    ">=" => Relation::Ge,
                    "=" => Relation::Eq,
                    other => return Err(err(format!("unknown relation '{other}'"))),
                };
                let rhs = tail[1].parse::<f64>().map_err(|e| err(e.to_string()))?;
                let coeffs = parse_terms(terms, names).map_err(err)?;
                rows.push((
                    line_no,
                    label.to_string(),
                    Constraint {
                        kind: RowKind::Custom(rows.len()),
                        coeffs,
                        relation,
                        rhs,
                    },
                ));
            }
        }

        let missing = |what: &str| Error::Parse {
            line: 0,
            msg: format!("missing '{what}' header"),
        };
        let family = family.ok_or_else(|| missing("family"))?;
        let grid = grid.ok_or_else(|| missing("grid"))?;
        let tau = tau.ok_or_else(|| missing("tau"))?;
        let vars = vars.ok_or_else(|| missing("vars"))?;
        let objective = objective.ok_or_else(|| missing("max"))?;

        if family == LpFamily::Custom {
            let rows = rows.into_iter().map(|(_, _, c)| c).collect();
            return LpInstance::custom(vars, objective, rows, tau);
        }

        let lp = build_family(family, grid)?;
        if lp.var_names != vars || lp.objective != objective || lp.tau.to_bits() != tau.to_bits() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("header does not match {family}({grid})"),
            });
        }
        if rows.len() != lp.num_rows() {
            return Err(Error::Parse {
                line: 0,
                msg: format!("expected {} rows, found {}", lp.num_rows(), rows.len()),
            });
        }
        for (id, (line, label, parsed)) in rows.iter().enumerate() {
            let want = lp.row(id);
            if *label != want.kind.label()
                || parsed.coeffs != want.coeffs
                || parsed.relation != want.relation
                || parsed.rhs.to_bits() != want.rhs.to_bits()
            {
                return Err(Error::Parse {
                    line: *line,
                    msg: format!("row '{label}' does not match the generated row"),
                });
            }
        }
        Ok(lp)
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v:+.16e}")
}

fn parse_terms(tokens: &[&str], names: &[String]) -> std::result::Result<Vec<(usize, f64)>, String> {
    if !tokens.len().is_multiple_of(2) {
        return Err("terms must be 'coefficient name' pairs".into());
    }
    tokens
        .chunks(2)
        .map(|pair| {
            let a = pair[0].parse::<f64>().map_err(|e| e.to_string())?;
            let k = names
                .iter()
                .position(|n| n == pair[1])
                .ok_or_else(|| format!("undeclared variable '{}'", pair[1]))?;
            Ok((k, a))
        })
        .collect()
}

/// Evaluates row violations for one fixed assignment. W1/W2 rows go through
/// the shared payoff prefix sums, so their slacks equal
/// `w1_discrete(x) - y` and `w2_discrete(x, i, j) - y` exactly.
pub struct RowEvaluator<'a> {
    lp: &'a LpInstance,
    v: &'a [f64],
    sums: Option<PayoffSums<'a>>,
}

impl<'a> RowEvaluator<'a> {
    /// Positive amount by which row `id` is violated.
    pub fn violation(&self, id: usize) -> f64 {
        let lp = self.lp;
        if id < lp.rows.len() {
            let row = &lp.rows[id];
            if row.kind == RowKind::W1 {
                if let (Some(s), Some(c)) = (&self.sums, lp.w1_constant) {
                    return self.v[Y_VAR] - s.w1(c);
                }
            }
            return row.violation(self.v);
        }
        let (i, j) = lp.w2_index(id);
        self.w2_violation(i, j)
    }

    #[inline]
    pub fn w2_violation(&self, i: usize, j: usize) -> f64 {
        let sums = self.sums.as_ref().expect("W2 rows exist only for grid families");
        self.v[Y_VAR] - sums.w2(i, j)
    }
}

fn var_names(n: usize, prefix: &str) -> Vec<String> {
    std::iter::once("y".to_string())
        .chain((0..=n).map(|t| format!("{prefix}{t}")))
        .collect()
}

fn payoff_rows(n: usize, exps: &[f64], constant: f64) -> Constraint {
    let nf = n as f64;
    let mut coeffs = vec![(Y_VAR, 1.0)];
    coeffs.extend((1..=n).map(|t| (x_var(t), -(exps[t] / nf))));
    Constraint {
        kind: RowKind::W1,
        coeffs,
        relation: Relation::Le,
        rhs: constant,
    }
}

fn build_family(family: LpFamily, n: usize) -> Result<LpInstance> {
    if n == 0 {
        return domain("grid resolution n must be at least 1");
    }
    let exps = crate::exp_table(n, n);
    let nf = n as f64;
    let mut rows = Vec::with_capacity(2 * n + 2);
    let mono = |rows: &mut Vec<Constraint>, t: usize| {
        rows.push(Constraint {
            kind: RowKind::Monotone(t),
            coeffs: vec![(x_var(t), 1.0), (x_var(t + 1), -1.0)],
            relation: Relation::Le,
            rhs: 0.0,
        })
    };

    let (constant, tau) = match family {
        LpFamily::Aug | LpFamily::DiscreteP => {
            for t in 0..n {
                rows.push(Constraint {
                    kind: RowKind::Envelope(t),
                    coeffs: vec![(x_var(t), 1.0)],
                    relation: Relation::Ge,
                    rhs: 1.0 - exps[t],
                });
                mono(&mut rows, t);
            }
            rows.push(Constraint {
                kind: RowKind::EndpointFix,
                coeffs: vec![(x_var(n), 1.0)],
                relation: Relation::Eq,
                rhs: ONE_MINUS_INV_E,
            });
            let constant = if family == LpFamily::Aug {
                w1_constant()
            } else {
                (1..=n).map(|k| (-(1.0 + k as f64 / nf)).exp() / nf).sum()
            };
            (constant, ONE_MINUS_INV_E)
        }
        LpFamily::AugUbF0 | LpFamily::AugUbF1 => {
            let cap = if family == LpFamily::AugUbF0 {
                1.0
            } else {
                ONE_MINUS_INV_E
            };
            for t in 0..n {
                rows.push(Constraint {
                    kind: RowKind::LowerBox(t),
                    coeffs: vec![(x_var(t), 1.0)],
                    relation: Relation::Ge,
                    rhs: 0.0,
                });
                mono(&mut rows, t);
            }
            rows.push(Constraint {
                kind: RowKind::EndpointCap,
                coeffs: vec![(x_var(n), 1.0)],
                relation: Relation::Le,
                rhs: cap,
            });
            (w1_constant(), cap)
        }
        LpFamily::Custom => return domain("custom LPs are built with LpInstance::custom"),
    };
    rows.push(payoff_rows(n, &exps, constant));

    Ok(LpInstance {
        family,
        grid: n,
        var_names: var_names(n, if family == LpFamily::DiscreteP { "a" } else { "x" }),
        objective: vec![(Y_VAR, 1.0)],
        rows,
        w1_constant: Some(constant),
        tau,
        exps,
    })
}

/// AUG-LP at resolution `n`.
pub fn build_aug_lp(n: usize) -> Result<LpInstance> {
    build_family(LpFamily::Aug, n)
}

/// AUG-UB-LP at resolution `n` over F0 (cap 1) or F1 (cap `1 - 1/e`).
pub fn build_aug_ub_lp(n: usize, space: FunctionSpace) -> Result<LpInstance> {
    match space {
        FunctionSpace::F0 => build_family(LpFamily::AugUbF0, n),
        FunctionSpace::F1 => build_family(LpFamily::AugUbF1, n),
        other => domain(format!(
            "the upper-bound LP is defined over F0 or F1, not {other}; use build_aug_lp"
        )),
    }
}

/// The discrete-`p` LP; `1/p` must be a positive integer.
pub fn build_discrete_p_lp(p: f64) -> Result<LpInstance> {
    if !(p > 0.0 && p <= 1.0) {
        return domain(format!("p must lie in (0, 1], got {p}"));
    }
    let inv = 1.0 / p;
    let n = inv.round();
    if (inv - n).abs() > 1e-9 * n.max(1.0) {
        return domain(format!("1/p must be an integer, got 1/p = {inv}"));
    }
    build_family(LpFamily::DiscreteP, n as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{w1_discrete, w2_discrete};
    use crate::gain_function::GridFunction;

    #[test]
    fn aug_counts() {
        let lp = build_aug_lp(10).unwrap();
        assert_eq!(lp.num_vars(), 12);
        assert_eq!(lp.num_w2_rows(), 66);
        assert_eq!(lp.num_rows(), 2 * 10 + 1 + 1 + 66);
        assert_eq!(build_aug_lp(100).unwrap().num_w2_rows(), 5151);
        assert!(build_aug_lp(0).is_err());
        assert!((lp.tau() - ONE_MINUS_INV_E).abs() < 1e-16);
    }

    #[test]
    fn aug_n1_rows() {
        let lp = build_aug_lp(1).unwrap();
        let kinds: Vec<_> = (0..lp.num_rows()).map(|id| lp.row_kind(id)).collect();
        assert_eq!(&kinds[4..], &[
            RowKind::W2 { i: 0, j: 0 },
            RowKind::W2 { i: 0, j: 1 },
            RowKind::W2 { i: 1, j: 0 },
        ]);
        // (0,1): y <= e^{-1}
        let row = lp.row(lp.w2_id(0, 1));
        assert_eq!(row.coeffs, vec![(Y_VAR, 1.0)]);
        assert!((row.rhs - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn w2_id_roundtrip() {
        let lp = build_aug_lp(7).unwrap();
        let mut expect = lp.explicit_rows().len();
        for i in 0..=7 {
            for j in 0..=(7 - i) {
                assert_eq!(lp.w2_id(i, j), expect);
                assert_eq!(lp.row_kind(expect), RowKind::W2 { i, j });
                expect += 1;
            }
        }
        assert_eq!(expect, lp.num_rows());
    }

    #[test]
    fn ub_variants() {
        let f0 = build_aug_ub_lp(10, FunctionSpace::F0).unwrap();
        let f1 = build_aug_ub_lp(10, FunctionSpace::F1).unwrap();
        assert_eq!(f0.tau(), 1.0);
        assert!((f1.tau() - ONE_MINUS_INV_E).abs() < 1e-16);
        assert!(build_aug_ub_lp(10, FunctionSpace::F3).is_err());
        assert!(build_aug_ub_lp(10, FunctionSpace::F4).is_err());
        // (1,0) row at n=1 over F0: y <= x_1 e^{-1} + 1 - x_1
        let lp = build_aug_ub_lp(1, FunctionSpace::F0).unwrap();
        let row = lp.row(lp.w2_id(1, 0));
        assert_eq!(row.coeffs.len(), 2);
        assert!((row.coeffs[1].1 - (1.0 - (-1.0f64).exp())).abs() < 1e-16);
        assert_eq!(row.rhs, 1.0);
    }

    #[test]
    fn discrete_p() {
        let lp = build_discrete_p_lp(0.1).unwrap();
        assert_eq!(lp.num_vars(), 12);
        let aug = build_aug_lp(10).unwrap();
        let diff = (lp.w1_constant().unwrap() - aug.w1_constant().unwrap()).abs();
        assert!(diff <= 0.1);
        let single = build_discrete_p_lp(1.0).unwrap();
        assert!((single.w1_constant().unwrap() - (-2.0f64).exp()).abs() < 1e-16);
        assert!(build_discrete_p_lp(0.3).is_err());
        assert!(build_discrete_p_lp(0.0).is_err());
    }

    #[test]
    fn envelope_point_feasible() {
        for n in [1, 3, 10, 40] {
            let lp = build_aug_lp(n).unwrap();
            let f = GridFunction::envelope(n).unwrap();
            let mut v = vec![0.0];
            v.extend_from_slice(f.values());
            let ev = lp.evaluator(&v);
            for id in 0..lp.num_rows() {
                assert!(ev.violation(id) <= 1e-15, "n={n} row {:?}", lp.row_kind(id));
            }
        }
    }

    #[test]
    fn row_slacks_match_payoffs_exactly() {
        let n = 12;
        let lp = build_aug_lp(n).unwrap();
        let f = crate::gain_function::sample_analytic_f4(n).unwrap();
        let y = 0.37;
        let mut v = vec![y];
        v.extend_from_slice(f.values());
        let ev = lp.evaluator(&v);
        let w1_id = lp.explicit_rows().len() - 1;
        assert_eq!(-ev.violation(w1_id), w1_discrete(&f) - y);
        for i in 0..=n {
            for j in 0..=(n - i) {
                assert_eq!(-ev.violation(lp.w2_id(i, j)), w2_discrete(&f, i, j).unwrap() - y);
                // and the materialized row agrees to round-off
                let dense = lp.row(lp.w2_id(i, j)).violation(&v);
                assert!((dense - ev.violation(lp.w2_id(i, j))).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn export_shape_and_determinism() {
        let lp = build_aug_lp(1).unwrap();
        let text = lp.export();
        assert_eq!(text, lp.export());
        let rows: Vec<_> = text
            .lines()
            .filter(|l| l.contains(':') && !l.starts_with("max:"))
            .collect();
        assert_eq!(rows.len(), 7);
        assert_eq!(text.lines().filter(|l| l.starts_with("max:")).count(), 1);
    }

    #[test]
    fn import_rejects_tampering() {
        let lp = build_aug_lp(3).unwrap();
        let text = lp.export().replace("w2_0_0: +1.0000000000000000e0 y +1.0000000000000000e0 x0 <= +1.0000000000000000e0",
            "w2_0_0: +1.0000000000000000e0 y +1.0000000000000000e0 x0 <= +2.0000000000000000e0");
        assert!(text != lp.export());
        assert!(matches!(LpInstance::import(&text), Err(Error::Parse { .. })));
    }

    #[test]
    fn custom_rejects_unknown_vars() {
        let rows = vec![Constraint {
            kind: RowKind::Custom(0),
            coeffs: vec![(3, 1.0)],
            relation: Relation::Le,
            rhs: 0.0,
        }];
        assert!(LpInstance::custom(vec!["a".into()], vec![(0, 1.0)], rows, 1.0).is_err());
    }
}
