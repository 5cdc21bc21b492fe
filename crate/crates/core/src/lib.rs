//! Certified bounds on the competitiveness of Stochastic Balance for
//! vertex-weighted online matching with stochastic rewards.
//!
//! The crate builds the finite auxiliary LPs whose optima approximate the
//! best gain-sharing function, solves them with a deterministic simplex
//! wrapped in lazy constraint generation, turns finite-`n` optima into
//! certified bounds on the limit, and cross-checks the closed-form adversary
//! payoffs with a Monte Carlo simulator of the algorithm itself.
//!
//! Module map:
//!
//! * [`gain_function`]: grid functions and the function spaces F0/F1/F3/F4.
//! * [`adversary`]: the payoff functional `L[f]` and its W1/W2/κ pieces.
//! * [`lp_model`]: builders and text export/import for the three LP families.
//! * [`lp_solver`]: simplex core, lazy row generation, feasibility checks.
//! * [`convergence`]: the `n ↔ 2n` solution maps and bound certification.
//! * [`simulator`]: Monte Carlo execution of Stochastic Balance.
//! * [`verify`]: property suites shared by the CLI.

pub mod adversary;
pub mod convergence;
pub mod error;
pub mod gain_function;
pub mod lp_model;
pub mod lp_solver;
pub mod simulator;
pub mod verify;

mod simplex;

pub use adversary::{AdversaryStrategy, Binding, TypeSequence};
pub use convergence::{BoundReport, RoundDirection};
pub use error::{Error, Result};
pub use gain_function::{FunctionSpace, GridFunction, Violation};
pub use lp_model::{LpFamily, LpInstance, Relation};
pub use lp_solver::{LpSolution, SolveStatus, SolverOptions};
pub use simulator::{SimInstance, SimResult, TypeIIMode};

/// `1 - 1/e`, the cap every F1/F3 function reaches at `z = 1`.
pub const ONE_MINUS_INV_E: f64 = 1.0 - 1.0 / std::f64::consts::E;

/// `e^{-t/n}` for `t = 0..=upto`, computed once per grid so that every module
/// sees bit-identical exponentials.
pub fn exp_table(n: usize, upto: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=upto).map(|t| (-(t as f64) / nf).exp()).collect()
}
