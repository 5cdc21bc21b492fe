//! Revised simplex on the dual of `max c·x  s.t.  a_r·x <= b_r` (x free).
//!
//! The dual is `min b·u  s.t.  Σ u_r a_r = c, u >= 0`. Its basis has one row
//! per primal variable, so its size does not grow with the number of
//! constraints. The simplex multipliers are the primal point and each reduced
//! cost is the slack of the corresponding primal row, which turns row
//! generation on the primal into column generation here.

/// A dual column: one primal row normalized to `coeffs·x <= rhs`.
#[derive(Debug, Clone)]
pub(crate) struct Column {
    /// Bland ordering key; artificials come before every column.
    pub key: u64,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basic {
    Artificial(usize),
    Column(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    /// Phase I could not reach zero: the dual has no feasible point.
    DualInfeasible,
    /// The dual objective decreases without bound.
    DualUnbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Tolerances {
    /// Reduced costs below `-optimality` are eligible to enter.
    pub optimality: f64,
    /// Smallest usable pivot element.
    pub pivot: f64,
    /// Residual Phase I objective still counted as zero.
    pub phase_one: f64,
    pub refactor_every: usize,
}

pub(crate) struct DualSimplex {
    m: usize,
    c: Vec<f64>,
    cols: Vec<Column>,
    /// Column indices sorted by key.
    order: Vec<usize>,
    in_basis: Vec<bool>,
    basis: Vec<Basic>,
    /// Column-major `B^{-1}`: entry `(i, j)` at `j * m + i`.
    binv: Vec<f64>,
    u_b: Vec<f64>,
    pi: Vec<f64>,
    phase_one: bool,
    tol: Tolerances,
    since_refactor: usize,
    pub iterations: usize,
}

impl DualSimplex {
    /// Starts from the all-artificial basis; `c` is the primal objective.
    pub fn new(c: Vec<f64>, tol: Tolerances) -> Self {
        let m = c.len();
        let mut binv = vec![0.0; m * m];
        let mut u_b = vec![0.0; m];
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            let s = art_sign(c[i]);
            binv[i * m + i] = s;
            u_b[i] = c[i] * s;
            basis.push(Basic::Artificial(i));
        }
        let phase_one = c.iter().any(|&v| v != 0.0);
        let mut s = Self {
            m,
            c,
            cols: Vec::new(),
            order: Vec::new(),
            in_basis: Vec::new(),
            basis,
            binv,
            u_b,
            pi: vec![0.0; m],
            phase_one,
            tol,
            since_refactor: 0,
            iterations: 0,
        };
        s.recompute_pi();
        s
    }

    pub fn add_column(&mut self, col: Column) {
        let idx = self.cols.len();
        let pos = self.order.partition_point(|&k| self.cols[k].key < col.key);
        self.cols.push(col);
        self.in_basis.push(false);
        self.order.insert(pos, idx);
    }

    /// Current multipliers: the primal point once Phase II is reached.
    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    #[cfg(test)]
    /// Dual objective `b_B·u_B`.
    pub fn dual_objective(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.u_b)
            .map(|(b, &u)| match *b {
                Basic::Column(k) => self.cols[k].rhs * u,
                Basic::Artificial(_) => 0.0,
            })
            .sum()
    }

    fn cost(&self, b: Basic) -> f64 {
        match b {
            Basic::Artificial(_) => {
                if self.phase_one {
                    1.0
                } else {
                    0.0
                }
            }
            Basic::Column(k) => {
                if self.phase_one {
                    0.0
                } else {
                    self.cols[k].rhs
                }
            }
        }
    }

    fn reduced_cost(&self, k: usize) -> f64 {
        let col = &self.cols[k];
        let base = if self.phase_one { 0.0 } else { col.rhs };
        base - col.coeffs.iter().map(|&(i, a)| a * self.pi[i]).sum::<f64>()
    }

    /// `π = B^{-T} h_B`.
    fn recompute_pi(&mut self) {
        let m = self.m;
        let h: Vec<f64> = self.basis.iter().map(|&b| self.cost(b)).collect();
        for j in 0..m {
            let col = &self.binv[j * m..(j + 1) * m];
            self.pi[j] = col.iter().zip(&h).map(|(a, b)| a * b).sum();
        }
    }

    fn ftran(&self, k: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(j, a) in &self.cols[k].coeffs {
            let col = &self.binv[j * m..(j + 1) * m];
            for (out, &b) in alpha.iter_mut().zip(col) {
                *out += a * b;
            }
        }
        alpha
    }

    fn basic_column(&self, b: Basic) -> Vec<(usize, f64)> {
        match b {
            Basic::Artificial(i) => vec![(i, art_sign(self.c[i]))],
            Basic::Column(k) => self.cols[k].coeffs.clone(),
        }
    }

    /// Rebuilds `B^{-1}` by Gauss-Jordan elimination with partial pivoting,
    /// then `u_B` and `π` from scratch.
    fn refactor(&mut self) {
        let m = self.m;
        // Row-major augmented [B | I].
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (j, &b) in self.basis.iter().enumerate() {
            for (i, v) in self.basic_column(b) {
                a[i * w + j] = v;
            }
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        for col in 0..m {
            let piv = (col..m)
                .max_by(|&r, &s| a[r * w + col].abs().total_cmp(&a[s * w + col].abs()))
                .unwrap();
            assert!(
                a[piv * w + col].abs() > 1e-14,
                "basis matrix became singular during refactorization"
            );
            if piv != col {
                for k in 0..w {
                    a.swap(piv * w + k, col * w + k);
                }
            }
            let p = a[col * w + col];
            for k in 0..w {
                a[col * w + k] /= p;
            }
            let pivot_row = a[col * w..(col + 1) * w].to_vec();
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * w + col];
                if f != 0.0 {
                    for k in 0..w {
                        a[r * w + k] -= f * pivot_row[k];
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                self.binv[j * m + i] = a[i * w + m + j];
            }
        }
        self.refresh();
        self.since_refactor = 0;
    }

    /// Recomputes `u_B` and `π` from the current `B^{-1}`, dropping the drift
    /// accumulated by incremental updates without a full refactorization.
    fn refresh(&mut self) {
        let m = self.m;
        for i in 0..m {
            self.u_b[i] = (0..m).map(|j| self.binv[j * m + i] * self.c[j]).sum();
        }
        self.recompute_pi();
    }

    /// Smallest-key column with a negative reduced cost.
    fn entering(&self) -> Option<(usize, f64)> {
        self.order.iter().find_map(|&k| {
            if self.in_basis[k] {
                return None;
            }
            let d = self.reduced_cost(k);
            (d < -self.tol.optimality).then_some((k, d))
        })
    }

    fn key_of(&self, b: Basic) -> (u8, u64) {
        match b {
            Basic::Artificial(i) => (0, i as u64),
            Basic::Column(k) => (1, self.cols[k].key),
        }
    }

    /// Bland ratio test; ties go to the smallest key.
    fn leaving(&self, alpha: &[f64]) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for r in 0..self.m {
            let a = alpha[r];
            let ratio = match self.basis[r] {
                // Artificials left at zero after Phase I must stay at zero.
                Basic::Artificial(_) if !self.phase_one => {
                    if a.abs() > self.tol.pivot {
                        0.0
                    } else {
                        continue;
                    }
                }
                _ => {
                    if a > self.tol.pivot {
                        self.u_b[r].max(0.0) / a
                    } else {
                        continue;
                    }
                }
            };
            best = match best {
                None => Some((ratio, r)),
                Some((t, s)) => {
                    let tie = (ratio - t).abs() <= 1e-12 * (1.0 + t.abs());
                    if ratio < t && !tie
                        || tie && self.key_of(self.basis[r]) < self.key_of(self.basis[s])
                    {
                        Some((ratio.min(t), r))
                    } else {
                        Some((t.min(ratio), s))
                    }
                }
            };
        }
        best.map(|(_, r)| r)
    }

    fn pivot(&mut self, q: usize, r: usize, alpha: &[f64], d_q: f64) {
        let m = self.m;
        let ar = alpha[r];
        let theta = self.u_b[r] / ar;
        for i in 0..m {
            self.u_b[i] -= theta * alpha[i];
        }
        self.u_b[r] = theta;

        // π ← π + (d_q / α_r) ρ_r with ρ_r row r of B^{-1}.
        let step = d_q / ar;
        for j in 0..m {
            self.pi[j] += step * self.binv[j * m + r];
        }

        for j in 0..m {
            let col = &mut self.binv[j * m..(j + 1) * m];
            let f = col[r] / ar;
            if f != 0.0 {
                for (v, &a) in col.iter_mut().zip(alpha) {
                    *v -= f * a;
                }
                col[r] = f;
            }
        }

        if let Basic::Column(k) = self.basis[r] {
            self.in_basis[k] = false;
        }
        self.basis[r] = Basic::Column(q);
        self.in_basis[q] = true;
        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.tol.refactor_every {
            self.refactor();
        }
    }

    fn artificial_mass(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.u_b)
            .filter(|(b, _)| matches!(b, Basic::Artificial(_)))
            .map(|(_, &u)| u.abs())
            .sum()
    }

    fn run(&mut self, budget: &mut usize) -> Outcome {
        loop {
            let Some((q, d_q)) = self.entering() else {
                return Outcome::Optimal;
            };
            if *budget == 0 {
                return Outcome::IterationLimit;
            }
            let alpha = self.ftran(q);
            let Some(r) = self.leaving(&alpha) else {
                return Outcome::DualUnbounded;
            };
            self.pivot(q, r, &alpha, d_q);
            *budget -= 1;
        }
    }

    /// Pivots zero-level artificials out wherever some column allows it.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if !matches!(self.basis[r], Basic::Artificial(_)) {
                continue;
            }
            let m = self.m;
            let rho: Vec<f64> = (0..m).map(|j| self.binv[j * m + r]).collect();
            let cand = self.order.iter().copied().find(|&k| {
                !self.in_basis[k]
                    && self.cols[k]
                        .coeffs
                        .iter()
                        .map(|&(j, a)| a * rho[j])
                        .sum::<f64>()
                        .abs()
                        > 1e-7
            });
            if let Some(q) = cand {
                let alpha = self.ftran(q);
                self.u_b[r] = 0.0;
                let d_q = self.reduced_cost(q);
                self.pivot(q, r, &alpha, d_q);
            }
        }
    }

    /// Solves over the current columns, continuing from the current basis.
    pub fn solve(&mut self, max_iterations: usize) -> Outcome {
        let mut budget = max_iterations;
        if self.phase_one {
            match self.run(&mut budget) {
                Outcome::Optimal => {}
                Outcome::DualUnbounded => unreachable!("phase I objective is bounded below"),
                other => return other,
            }
            self.refactor();
            if self.artificial_mass() > self.tol.phase_one {
                return Outcome::DualInfeasible;
            }
            self.phase_one = false;
            self.drive_out_artificials();
            self.refactor();
        }
        let out = self.run(&mut budget);
        if out == Outcome::Optimal && self.since_refactor > 0 {
            // Recomputing from B^{-1} can expose tiny negative reduced costs.
            self.refresh();
            return self.run(&mut budget);
        }
        out
    }
}

fn art_sign(c: f64) -> f64 {
    if c < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances {
            optimality: 1e-12,
            pivot: 1e-10,
            phase_one: 1e-10,
            refactor_every: 7,
        }
    }

    fn col(key: u64, coeffs: &[(usize, f64)], rhs: f64) -> Column {
        Column {
            key,
            coeffs: coeffs.to_vec(),
            rhs,
        }
    }

    #[test]
    fn small_lp() {
        // max x + y  s.t. x <= 2, y <= 3, x + y <= 4, -x <= 0, -y <= 0
        let mut s = DualSimplex::new(vec![1.0, 1.0], tol());
        s.add_column(col(0, &[(0, 1.0)], 2.0));
        s.add_column(col(2, &[(1, 1.0)], 3.0));
        s.add_column(col(4, &[(0, 1.0), (1, 1.0)], 4.0));
        s.add_column(col(6, &[(0, -1.0)], 0.0));
        s.add_column(col(8, &[(1, -1.0)], 0.0));
        assert_eq!(s.solve(1000), Outcome::Optimal);
        let obj = s.pi()[0] + s.pi()[1];
        assert!((obj - 4.0).abs() < 1e-12);
        assert!((s.dual_objective() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_after_new_column() {
        let mut s = DualSimplex::new(vec![0.0, 1.0], tol());
        // max y s.t. y <= 5, y - x <= 0, x <= 3
        s.add_column(col(0, &[(1, 1.0)], 5.0));
        s.add_column(col(2, &[(0, -1.0), (1, 1.0)], 0.0));
        s.add_column(col(4, &[(0, 1.0)], 3.0));
        assert_eq!(s.solve(100), Outcome::Optimal);
        assert!((s.pi()[1] - 3.0).abs() < 1e-12);
        s.add_column(col(6, &[(1, 1.0)], 1.5));
        assert_eq!(s.solve(100), Outcome::Optimal);
        assert!((s.pi()[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        // max x s.t. x <= 1, -x <= -2
        let mut s = DualSimplex::new(vec![1.0], tol());
        s.add_column(col(0, &[(0, 1.0)], 1.0));
        s.add_column(col(2, &[(0, -1.0)], -2.0));
        assert_eq!(s.solve(100), Outcome::DualUnbounded);
        // max x s.t. -x <= 0
        let mut s = DualSimplex::new(vec![1.0], tol());
        s.add_column(col(0, &[(0, -1.0)], 0.0));
        assert_eq!(s.solve(100), Outcome::DualInfeasible);
    }
}
