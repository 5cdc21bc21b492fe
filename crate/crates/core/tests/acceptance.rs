//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero
//! exit if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use balance_bounds::convergence::{
    bound_from_eta, bound_from_zeta, round_report, RoundDirection, TableConvention, TableRow,
};
use balance_bounds::lp_model::{build_aug_lp, build_aug_ub_lp};
use balance_bounds::verify::{self, Check};
use balance_bounds::{FunctionSpace, ONE_MINUS_INV_E};

const SEED: u64 = 2024;

struct Outcome {
    passed: bool,
    detail: String,
}

fn combine(checks: &[Check]) -> Outcome {
    Outcome {
        passed: checks.iter().all(|c| c.passed),
        detail: checks
            .iter()
            .map(|c| format!("{}{}: {}", if c.passed { "" } else { "FAILED " }, c.name, c.detail))
            .collect::<Vec<_>>()
            .join(" | "),
    }
}

fn eta_zeta(n: usize) -> (f64, f64) {
    let eta = verify::optimum(&build_aug_lp(n).unwrap()).unwrap();
    let zeta = verify::optimum(&build_aug_ub_lp(n, FunctionSpace::F0).unwrap()).unwrap();
    (eta, zeta)
}

/// η(n) rounded down and ζ(n) rounded up, compared to the golden strings.
fn table_strings(n: usize, want_eta: &str, want_zeta: &str, budget_s: f64) -> Outcome {
    let t = Instant::now();
    let (eta, zeta) = eta_zeta(n);
    let secs = t.elapsed().as_secs_f64();
    let got_eta = round_report(eta, RoundDirection::Down);
    let got_zeta = round_report(zeta, RoundDirection::Up);
    let nearest = TableRow::new(n, eta, zeta, TableConvention::Nearest).unwrap();
    Outcome {
        passed: got_eta == want_eta && got_zeta == want_zeta && secs < budget_s,
        detail: format!(
            "eta({n})={eta:.10} -> \"{got_eta}\" (want \"{want_eta}\"), zeta({n})={zeta:.10} -> \"{got_zeta}\" (want \"{want_zeta}\"), \
             {secs:.2}s < {budget_s}s; nearest rounding gives \"{}\" / \"{}\"",
            nearest.cells[0], nearest.cells[3]
        ),
    }
}

fn criterion_3() -> Outcome {
    let n = 1000;
    let t = Instant::now();
    let (eta, zeta) = eta_zeta(n);
    let secs = t.elapsed().as_secs_f64();
    let row = TableRow::new(n, eta, zeta, TableConvention::Nearest).unwrap();
    let (lo, hi) = bound_from_eta(n, eta, ONE_MINUS_INV_E).unwrap();
    let zhi = bound_from_zeta(n, zeta, 1.0).unwrap();
    let passed = row.cells[1] == "0.5796" && row.cells[2] == "0.5810" && row.cells[4] == "0.5841" && secs < 1800.0;
    Outcome {
        passed,
        detail: format!(
            "eta(1000)={eta:.10} reported \"{}\", bounds \"{}\" / \"{}\"; zeta(1000)={zeta:.10} reported \"{}\", upper \"{}\" \
             (want 0.5796 / 0.5810 / 0.5841); from unrounded values: [{}, {}], {}; {secs:.1}s",
            row.cells[0],
            row.cells[1],
            row.cells[2],
            row.cells[3],
            row.cells[4],
            round_report(lo, RoundDirection::Down),
            round_report(hi, RoundDirection::Up),
            round_report(zhi, RoundDirection::Up),
        ),
    }
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 table, n=10", Box::new(|| table_strings(10, "0.5713", "0.5736", 5.0))),
        ("2 table, n=100", Box::new(|| table_strings(100, "0.5795", "0.5823", 60.0))),
        ("3 headline bounds, n=1000", Box::new(criterion_3)),
        ("4 analytic optimum", Box::new(|| combine(&[verify::analytic_optimum(1000).unwrap()]))),
        (
            "5 doubling/halving maps",
            Box::new(|| {
                let mut checks = Vec::new();
                for n in [5, 10, 20] {
                    checks.push(verify::doubling_preserves_feasibility(n, 200, SEED).unwrap());
                    checks.push(verify::halving_preserves_feasibility(n, 200, SEED).unwrap());
                }
                combine(&checks)
            }),
        ),
        (
            "6 cauchy steps",
            Box::new(|| combine(&[10, 25, 50].map(|n| verify::cauchy_step(n).unwrap()))),
        ),
        (
            "7 F1 equivalence",
            Box::new(|| combine(&[10, 100].map(|n| verify::f1_equivalence(n).unwrap()))),
        ),
        (
            "8 discrete-p bridge",
            Box::new(|| combine(&[0.1, 0.01].map(|p| verify::discrete_p_bridge(p).unwrap()))),
        ),
        (
            "9 simulation agreement",
            Box::new(|| {
                let t = Instant::now();
                let mut out = combine(&[
                    verify::kappa_agreement(10, 1e-3, 100_000, SEED).unwrap(),
                    verify::pure_type_one(1e-3, 100_000, SEED).unwrap(),
                ]);
                let secs = t.elapsed().as_secs_f64();
                out.passed &= secs < 300.0;
                out.detail.push_str(&format!(" | {secs:.1}s < 300s"));
                out
            }),
        ),
        (
            "10 adversary structure",
            Box::new(|| {
                combine(&[
                    verify::swap_monotonicity(100, SEED).unwrap(),
                    verify::psi_collapse(50, 20, SEED).unwrap(),
                    verify::accounting_floor(100, SEED).unwrap(),
                    verify::simulated_floor(20, 20_000, SEED).unwrap(),
                ])
            }),
        ),
    ];

    let mut failed = 0;
    for (name, run) in &criteria {
        let out = run();
        let tag = if out.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!out.passed);
        println!("[{tag}] criterion {name}: {}", out.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
