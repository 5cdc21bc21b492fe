//! Dense simplex solves with lazy generation of the W2 rows, plus exhaustive
//! feasibility checks.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lp_model::{LpInstance, Relation, RowKind};
use crate::simplex::{Column, DualSimplex, Outcome, Tolerances};

/// Largest row count accepted by [`solve_full`].
pub const FULL_SOLVE_MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The dense method refused the instance (too many rows for `solve_full`).
    TooLarge,
    /// The simplex stopped but the exhaustive check found a row violated by
    /// more than `feas_tol`.
    ResidualTooLarge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub cut_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    pub refactor_every: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            cut_tol: 1e-10,
            optimality_tol: 1e-12,
            pivot_tol: 1e-11,
            refactor_every: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub cut_rounds: usize,
    pub active_rows: usize,
    pub active_w2_rows: usize,
    pub max_residual: f64,
    pub worst_row: Option<String>,
    /// Wall-clock time; left out of serialized output to keep it reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: SolveStatus,
    pub objective_value: f64,
    pub assignment: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Result of an exhaustive residual scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_residual: f64,
    pub worst_row: Option<usize>,
    pub worst_label: Option<String>,
}

/// Row with the largest violation at `v`, smallest id among ties.
/// A non-positive violation means `v` is feasible.
pub fn most_violated(lp: &LpInstance, v: &[f64]) -> (usize, f64) {
    assert_eq!(v.len(), lp.num_vars(), "assignment must cover every variable");
    let ev = lp.evaluator(v);
    let explicit = lp.explicit_rows().len();
    let mut best = (0usize, f64::NEG_INFINITY);
    for id in 0..explicit {
        let viol = ev.violation(id);
        if viol > best.1 {
            best = (id, viol);
        }
    }
    if lp.num_w2_rows() == 0 {
        return best;
    }
    let n = lp.grid();
    let per_i: Vec<(usize, f64)> = (0..=n)
        .into_par_iter()
        .map(|i| {
            let mut b = (0usize, f64::NEG_INFINITY);
            for j in 0..=(n - i) {
                let viol = ev.w2_violation(i, j);
                if viol > b.1 {
                    b = (j, viol);
                }
            }
            (lp.w2_id(i, b.0), b.1)
        })
        .collect();
    for cand in per_i {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    best
}

/// Exhaustive residual scan over every row, including never-generated ones.
pub fn check_feasible(lp: &LpInstance, v: &[f64], tol: f64) -> FeasibilityReport {
    if lp.num_rows() == 0 {
        return FeasibilityReport {
            feasible: true,
            max_residual: 0.0,
            worst_row: None,
            worst_label: None,
        };
    }
    let (id, viol) = most_violated(lp, v);
    let max_residual = viol.max(0.0);
    FeasibilityReport {
        feasible: max_residual <= tol,
        max_residual,
        worst_row: (viol > 0.0).then_some(id),
        worst_label: (viol > 0.0).then(|| lp.row_kind(id).label()),
    }
}

fn columns_for(lp: &LpInstance, id: usize) -> Vec<Column> {
    let row = lp.row(id);
    let key = 2 * id as u64;
    let neg = |c: &[(usize, f64)]| c.iter().map(|&(k, a)| (k, -a)).collect::<Vec<_>>();
    match row.relation {
        Relation::Le => vec![Column {
            key,
            coeffs: row.coeffs,
            rhs: row.rhs,
        }],
        Relation::Ge => vec![Column {
            key,
            coeffs: neg(&row.coeffs),
            rhs: -row.rhs,
        }],
        Relation::Eq => vec![
            Column {
                key,
                coeffs: row.coeffs.clone(),
                rhs: row.rhs,
            },
            Column {
                key: key + 1,
                coeffs: neg(&row.coeffs),
                rhs: -row.rhs,
            },
        ],
    }
}

fn objective_vector(lp: &LpInstance) -> Vec<f64> {
    let mut c = vec![0.0; lp.num_vars()];
    for &(k, a) in lp.objective() {
        c[k] += a;
    }
    c
}

struct Session<'a> {
    lp: &'a LpInstance,
    opts: SolverOptions,
    simplex: DualSimplex,
    active: Vec<bool>,
    active_rows: usize,
    active_w2: usize,
    rounds: usize,
    start: Instant,
}

impl<'a> Session<'a> {
    fn new(lp: &'a LpInstance, opts: SolverOptions, c: Vec<f64>) -> Self {
        let tol = Tolerances {
            optimality: opts.optimality_tol,
            pivot: opts.pivot_tol,
            phase_one: 1e-9,
            refactor_every: opts.refactor_every.max(1),
        };
        Self {
            lp,
            opts,
            simplex: DualSimplex::new(c, tol),
            active: vec![false; lp.num_rows()],
            active_rows: 0,
            active_w2: 0,
            rounds: 0,
            start: Instant::now(),
        }
    }

    fn activate(&mut self, id: usize) -> bool {
        if self.active[id] {
            return false;
        }
        self.active[id] = true;
        self.active_rows += 1;
        if matches!(self.lp.row_kind(id), RowKind::W2 { .. }) {
            self.active_w2 += 1;
        }
        for col in columns_for(self.lp, id) {
            self.simplex.add_column(col);
        }
        true
    }

    fn restricted_solve(&mut self) -> Outcome {
        let cap = 50 * (self.active_rows + self.lp.num_vars());
        self.simplex.solve(cap)
    }

    fn finish(&self, status: SolveStatus, assignment: Vec<f64>) -> LpSolution {
        let (objective_value, max_residual, worst_row) = if assignment.is_empty() {
            (f64::NAN, f64::NAN, None)
        } else {
            let rep = check_feasible(self.lp, &assignment, self.opts.feas_tol);
            (self.lp.objective_value(&assignment), rep.max_residual, rep.worst_label)
        };
        let status = if status == SolveStatus::Optimal && !(max_residual <= self.opts.feas_tol) {
            SolveStatus::ResidualTooLarge
        } else {
            status
        };
        LpSolution {
            status,
            objective_value,
            assignment,
            diagnostics: Diagnostics {
                iterations: self.simplex.iterations,
                cut_rounds: self.rounds,
                active_rows: self.active_rows,
                active_w2_rows: self.active_w2,
                max_residual,
                worst_row,
                seconds: self.start.elapsed().as_secs_f64(),
            },
        }
    }

    /// Tells an infeasible primal from an unbounded one after the dual
    /// turned out infeasible, by solving the pure feasibility problem.
    fn classify_dual_infeasible(&self, ids: &[usize]) -> SolveStatus {
        let mut probe = Session::new(self.lp, self.opts, vec![0.0; self.lp.num_vars()]);
        for &id in ids {
            probe.activate(id);
        }
        match probe.restricted_solve() {
            Outcome::Optimal => SolveStatus::Unbounded,
            Outcome::DualUnbounded => SolveStatus::Infeasible,
            _ => SolveStatus::IterationLimit,
        }
    }

    fn outcome_status(&self, out: Outcome, ids: &[usize]) -> Option<SolveStatus> {
        match out {
            Outcome::Optimal => None,
            Outcome::DualUnbounded => Some(SolveStatus::Infeasible),
            Outcome::IterationLimit => Some(SolveStatus::IterationLimit),
            Outcome::DualInfeasible => Some(self.classify_dual_infeasible(ids)),
        }
    }
}

/// Solves the complete LP with every row present from the start.
pub fn solve_full(lp: &LpInstance, opts: &SolverOptions) -> LpSolution {
    let mut s = Session::new(lp, *opts, objective_vector(lp));
    if lp.num_rows() > FULL_SOLVE_MAX_ROWS {
        return s.finish(SolveStatus::TooLarge, Vec::new());
    }
    let ids: Vec<usize> = (0..lp.num_rows()).collect();
    for &id in &ids {
        s.activate(id);
    }
    let out = s.restricted_solve();
    if let Some(status) = s.outcome_status(out, &ids) {
        return s.finish(status, Vec::new());
    }
    let x = s.simplex.pi().to_vec();
    s.finish(SolveStatus::Optimal, x)
}

/// Solves with lazily generated rows: starts from the structure rows, W1 and
/// the W2 rows with `j ∈ {0, n − i}`, then repeatedly adds the most violated
/// row until no row is violated by more than `cut_tol`.
pub fn solve_lazy(lp: &LpInstance, opts: &SolverOptions) -> LpSolution {
    let mut s = Session::new(lp, *opts, objective_vector(lp));
    for id in lp.initial_lazy_rows() {
        s.activate(id);
    }
    loop {
        let out = s.restricted_solve();
        if let Some(status) = s.outcome_status(out, &active_ids(&s.active)) {
            return s.finish(status, Vec::new());
        }
        let x = s.simplex.pi().to_vec();
        let (id, viol) = most_violated(lp, &x);
        if viol <= opts.cut_tol || !s.activate(id) {
            return s.finish(SolveStatus::Optimal, x);
        }
        s.rounds += 1;
    }
}

fn active_ids(active: &[bool]) -> Vec<usize> {
    active
        .iter()
        .enumerate()
        .filter_map(|(id, &a)| a.then_some(id))
        .collect()
}
