use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use balance_bounds::adversary::{kappa_formula, l_of_f, w1_discrete, AdversaryStrategy, Binding};
use balance_bounds::convergence::{certify, round_report, table_csv, table_rows, RoundDirection, TableConvention};
use balance_bounds::gain_function::{analytic_f4_value, sample_analytic_f4, GridFunction};
use balance_bounds::lp_model::{build_aug_lp, build_aug_ub_lp, build_discrete_p_lp, LpFamily, LpInstance};
use balance_bounds::lp_solver::{solve_full, solve_lazy, SolverOptions};
use balance_bounds::simulator::{estimate_kappa_with_mode, run_instance_batch, SimInstance, TypeIIMode};
use balance_bounds::verify::{run_suite, Suite, VerifyConfig};
use balance_bounds::{Error, FunctionSpace};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Certified bounds for Stochastic Balance: auxiliary LP solves, bound
/// certification, property suites and Monte Carlo cross-checks.
#[derive(Parser)]
#[command(name = "balance-bounds", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an auxiliary LP and print the solution as JSON.
    Solve {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_enum)]
        space: Option<Space>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, value_enum, default_value_t = Method::Lazy)]
        method: Method,
        /// Primal feasibility tolerance for the final certification.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve and certify the interval for the limit value (JSON report).
    Bounds {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_enum)]
        space: Option<Space>,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the eta/zeta table as CSV.
    Table {
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        n_list: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Convention::Nearest)]
        convention: Convention,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite; exits 2 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        /// Grid size for the LP-based checks (defaults vary per check).
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: Option<u64>,
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Monte Carlo estimate of the target payoff under an adversary strategy,
    /// or of a JSON instance given with --instance.
    Simulate {
        #[arg(long, required_unless_present = "instance")]
        ell: Option<f64>,
        #[arg(long, required_unless_present = "instance")]
        psi: Option<f64>,
        #[arg(long, required_unless_present = "instance")]
        psitilde: Option<f64>,
        #[arg(long, required_unless_present = "instance")]
        p: Option<f64>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long)]
        seed: u64,
        /// `f4` for the analytic optimum, or a JSON grid function file.
        #[arg(long, default_value = "f4")]
        f: String,
        #[arg(long, value_enum, default_value_t = Mode::Oracle)]
        mode: Mode,
        /// Gadget copies per Type II arrival.
        #[arg(long = "M", default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        m: u64,
        /// Initial load of each gadget copy.
        #[arg(long, default_value_t = 0.5)]
        ell_tilde: f64,
        #[arg(long, conflicts_with_all = ["ell", "psi", "psitilde", "p", "mode"])]
        instance: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the analytic optimum on a grid; with --out the grid goes to a CSV file.
    Analytic {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write an LP instance in the text exchange format.
    ExportLp {
        #[arg(long, value_enum)]
        family: ExportFamily,
        #[arg(long, value_enum)]
        space: Option<Space>,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..), conflicts_with = "p")]
        n: Option<u64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Aug,
    Ub,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFamily {
    Aug,
    Ub,
    Discretep,
}

#[derive(Clone, Copy, ValueEnum)]
enum Space {
    F0,
    F1,
    F3,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Lazy,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Nearest,
    Outward,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Lemmas,
    Cauchy,
    Adversary,
    Simulation,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Oracle,
    Gadget,
}

enum Failure {
    /// Bad input: exit 1.
    Invalid(String),
    /// A solve or a check did not produce a certified result: exit 2.
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } => Failure::Computation(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn invalid<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Invalid(msg.into()))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn grid_family(family: Family, space: Option<Space>) -> Result<LpFamily, Failure> {
    match (family, space) {
        (Family::Aug, None | Some(Space::F3)) => Ok(LpFamily::Aug),
        (Family::Aug, Some(_)) => invalid("--family aug works over f3 only"),
        (Family::Ub, Some(Space::F0)) => Ok(LpFamily::AugUbF0),
        (Family::Ub, Some(Space::F1)) => Ok(LpFamily::AugUbF1),
        (Family::Ub, _) => invalid("--family ub needs --space f0 or f1"),
    }
}

fn build(family: LpFamily, n: usize) -> Result<LpInstance, Failure> {
    Ok(match family {
        LpFamily::Aug => build_aug_lp(n)?,
        LpFamily::AugUbF0 => build_aug_ub_lp(n, FunctionSpace::F0)?,
        LpFamily::AugUbF1 => build_aug_ub_lp(n, FunctionSpace::F1)?,
        other => return invalid(format!("no grid builder for {other}")),
    })
}

fn json_line(v: &impl serde::Serialize) -> Result<String, Failure> {
    Ok(format!("{}\n", serde_json::to_string_pretty(v)?))
}

fn solve(family: Family, space: Option<Space>, n: u64, method: Method, tol: f64, out: Option<PathBuf>) -> Outcome {
    if !(tol > 0.0 && tol < 1.0) {
        return invalid(format!("--tol must lie in (0, 1), got {tol}"));
    }
    let lp = build(grid_family(family, space)?, n as usize)?;
    let defaults = SolverOptions::default();
    let opts = SolverOptions {
        feas_tol: tol,
        cut_tol: defaults.cut_tol.min(tol),
        ..defaults
    };
    let sol = match method {
        Method::Lazy => solve_lazy(&lp, &opts),
        Method::Full => solve_full(&lp, &opts),
    };
    let report = json!({
        "family": lp.family(),
        "n": n,
        "tau": lp.tau(),
        "variables": lp.var_names(),
        "solution": sol,
    });
    emit(out.as_deref(), &json_line(&report)?)?;
    if sol.is_optimal() {
        Ok(())
    } else {
        Err(Failure::Computation(format!("solver stopped with status {:?}", sol.status)))
    }
}

fn simulate_strategy(
    strat: AdversaryStrategy,
    p: f64,
    trials: usize,
    seed: u64,
    f_arg: &str,
    mode: TypeIIMode,
) -> Result<serde_json::Value, Failure> {
    if !(p > 0.0 && p <= 1.0) {
        return invalid(format!("--p must lie in (0, 1], got {p}"));
    }
    let (f, formula) = if f_arg == "f4" {
        let f = sample_analytic_f4((1.0 / p).round() as usize)?;
        let formula = kappa_formula(&strat, |z| analytic_f4_value(z).expect("z >= 0"), 4000);
        (f, formula)
    } else {
        let f = load_function(f_arg)?;
        let formula = kappa_formula(&strat, |z| f.eval(z), 4000);
        (f, formula)
    };
    let result = estimate_kappa_with_mode(&strat, &f, p, trials, seed, mode)?;
    Ok(json!({
        "strategy": strat,
        "p": p,
        "mode": mode,
        "seed": seed,
        "formula": formula,
        "result": result,
    }))
}

fn load_function(path: &str) -> Result<GridFunction, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{path}: {e}")))?;
    Ok(serde_json::from_str(&text)?)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    ell: Option<f64>,
    psi: Option<f64>,
    psitilde: Option<f64>,
    p: Option<f64>,
    trials: u64,
    seed: u64,
    f_arg: &str,
    mode: Mode,
    m: u64,
    ell_tilde: f64,
    instance: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Outcome {
    let trials = trials as usize;
    let report = if let Some(path) = instance {
        let text = fs::read_to_string(&path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
        let inst: SimInstance = serde_json::from_str(&text)?;
        let f = if f_arg == "f4" {
            sample_analytic_f4((1.0 / inst.p).round().max(1.0) as usize)?
        } else {
            load_function(f_arg)?
        };
        let result = run_instance_batch(&inst, &f, trials, seed)?;
        json!({ "seed": seed, "result": result })
    } else {
        let (Some(ell), Some(psi), Some(psitilde), Some(p)) = (ell, psi, psitilde, p) else {
            return invalid("--ell, --psi, --psitilde and --p are required without --instance");
        };
        let strat = AdversaryStrategy::new(ell, psi, psitilde)?;
        let mode = match mode {
            Mode::Oracle => TypeIIMode::Oracle,
            Mode::Gadget => {
                if !(0.0..1.0).contains(&ell_tilde) || ell_tilde <= 0.0 {
                    return invalid(format!("--ell-tilde must lie in (0, 1), got {ell_tilde}"));
                }
                TypeIIMode::Gadget {
                    m: m as usize,
                    ell_tilde,
                }
            }
        };
        simulate_strategy(strat, p, trials, seed, f_arg, mode)?
    };
    emit(out.as_deref(), &json_line(&report)?)
}

fn analytic(n: usize, out: Option<PathBuf>) -> Outcome {
    let f = sample_analytic_f4(n)?;
    let (value, binding) = l_of_f(&f)?;
    let w00 = 1.0 - f.values()[0];
    let target = (1.0 + (-2.0f64).exp()) / 2.0;
    let arg = match binding {
        Binding::W1 => "W1".to_string(),
        Binding::W2 { i, j } => format!("W2({i},{j})"),
    };
    let summary = format!(
        "# n = {n}\n# L[f*] = {value:.10} (rounded {}), grid argmin {arg}\n# W2(0,0) = 1 - f(0) = {w00:.10}, W1 = {:.10}\n# (1 + e^-2)/2 = {target:.10}\n",
        round_report(value, RoundDirection::Down),
        w1_discrete(&f),
    );
    match out {
        Some(path) => {
            fs::write(&path, f.to_csv())?;
            print!("{summary}");
        }
        None => print!("{summary}{}", f.to_csv()),
    }
    Ok(())
}

fn export_lp(family: ExportFamily, space: Option<Space>, n: Option<u64>, p: Option<f64>, out: PathBuf) -> Outcome {
    let lp = match family {
        ExportFamily::Discretep => {
            let Some(p) = p else {
                return invalid("--family discretep needs --p");
            };
            build_discrete_p_lp(p)?
        }
        ExportFamily::Aug | ExportFamily::Ub => {
            let Some(n) = n else {
                return invalid("--family aug/ub needs --n");
            };
            let fam = if matches!(family, ExportFamily::Aug) { Family::Aug } else { Family::Ub };
            build(grid_family(fam, space)?, n as usize)?
        }
    };
    emit(Some(&out), &lp.export())
}

fn verify(suite: SuiteArg, n: Option<u64>, trials: u64, seed: u64) -> Outcome {
    let suite = match suite {
        SuiteArg::Lemmas => Suite::Lemmas,
        SuiteArg::Cauchy => Suite::Cauchy,
        SuiteArg::Adversary => Suite::Adversary,
        SuiteArg::Simulation => Suite::Simulation,
        SuiteArg::All => Suite::All,
    };
    let cfg = VerifyConfig {
        n: n.map(|n| n as usize),
        trials: trials as usize,
        seed,
    };
    let report = run_suite(suite, &cfg)?;
    for check in &report.checks {
        println!("{check}");
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", report.checks.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Computation(format!("{failed} checks failed")))
    }
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve {
            family,
            space,
            n,
            method,
            tol,
            out,
        } => solve(family, space, n, method, tol, out),
        Command::Bounds { family, space, n, out } => {
            let report = certify(grid_family(family, space)?, n as usize, &SolverOptions::default())?;
            emit(out.as_deref(), &format!("{}\n", report.to_json()?))
        }
        Command::Table { n_list, convention, out } => {
            let convention = match convention {
                Convention::Nearest => TableConvention::Nearest,
                Convention::Outward => TableConvention::Outward,
            };
            let ns: Vec<usize> = n_list.iter().map(|&n| n as usize).collect();
            let rows = table_rows(&ns, &SolverOptions::default(), convention)?;
            emit(out.as_deref(), &table_csv(&rows))
        }
        Command::Verify { suite, n, trials, seed } => verify(suite, n, trials, seed),
        Command::Simulate {
            ell,
            psi,
            psitilde,
            p,
            trials,
            seed,
            f,
            mode,
            m,
            ell_tilde,
            instance,
            out,
        } => simulate(ell, psi, psitilde, p, trials, seed, &f, mode, m, ell_tilde, instance, out),
        Command::Analytic { n, out } => analytic(n as usize, out),
        Command::ExportLp {
            family,
            space,
            n,
            p,
            out,
        } => export_lp(family, space, n, p, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Computation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
