//! The subcommands, as plain functions returning a [`RunReport`].

use std::time::Instant;

use circot_core::oracle::{BREAKPOINT_GUARD, ROTATION_GUARD};
use circot_core::{
    bracket_for, candidate_thetas, evaluate_at, extract_plan, minimize_with_hook, oracle_breakpoints, oracle_rotations,
    BracketOptions, CircularHistogram, CostFunction, IterationRecord, OracleResult, SolveError, SolveOptions,
    SolveResult,
};
use thiserror::Error;

use crate::input::InputError;
use crate::report::{AssignmentRow, CheckSummary, Curve, CurveRow, ErrorReport, OracleRow, Real, RunReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("solver and oracles disagree")]
    Disagreement(Box<RunReport>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Argument(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Disagreement(_) => 3,
        }
    }

    pub fn to_report(&self) -> ErrorReport {
        let code = match self {
            CliError::Input(e) => e.code(),
            CliError::Argument(_) => "invalid_argument",
            CliError::Solver(_) => "solver",
            CliError::Disagreement(_) => "disagreement",
        };
        ErrorReport {
            error: code.to_string(),
            detail: self.to_string(),
        }
    }
}

/// Flags shared by every command that solves an instance.
#[derive(Debug, Clone, Copy)]
pub struct SolveFlags {
    pub lambda: f64,
    pub epsilon: f64,
    pub tight_bracket: bool,
    pub verbose: bool,
    pub omit_timing: bool,
}

impl Default for SolveFlags {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            epsilon: circot_core::solver::DEFAULT_EPSILON,
            tight_bracket: false,
            verbose: false,
            omit_timing: false,
        }
    }
}

impl SolveFlags {
    fn cost(&self) -> Result<CostFunction, CliError> {
        CostFunction::power(self.lambda).map_err(|e| CliError::Argument(e.to_string()))
    }

    fn options(&self) -> SolveOptions {
        SolveOptions {
            epsilon: Some(self.epsilon),
            tight_bracket: self.tight_bracket,
            ..SolveOptions::default()
        }
    }
}

fn solve(
    h0: &CircularHistogram,
    h1: &CircularHistogram,
    c: &CostFunction,
    flags: &SolveFlags,
) -> Result<(SolveResult, f64), CliError> {
    let mut hook = |r: &IterationRecord| {
        if flags.verbose {
            eprintln!(
                "iter {:>3}  lo {:+.17e}  hi {:+.17e}  theta {:+.17e}  C'- {:+.6e}  C'+ {:+.6e}",
                r.iteration, r.theta_lo, r.theta_hi, r.theta, r.left_derivative, r.right_derivative
            );
        }
    };
    let start = Instant::now();
    let result = minimize_with_hook(h0, h1, c, &flags.options(), &mut hook)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((result, ms))
}

fn base_report(result: &SolveResult, lambda: f64, wall_ms: f64, flags: &SolveFlags) -> RunReport {
    RunReport {
        theta_star: Some(Real(result.theta_star)),
        cost: Some(Real(result.cost)),
        mk_distance: Some(Real(result.cost.max(0.0).powf(1.0 / lambda))),
        exact: Some(result.exact),
        iterations: Some(result.iterations),
        epsilon_used: Some(Real(result.epsilon_used)),
        cost_evaluations: Some(result.cost_evaluations),
        flat_interval: result.flat_interval.map(|(a, b)| [Real(a), Real(b)]),
        wall_time_ms: (!flags.omit_timing).then_some(Real(wall_ms)),
        ..RunReport::default()
    }
}

pub fn cmd_distance(h0: &CircularHistogram, h1: &CircularHistogram, flags: &SolveFlags) -> Result<RunReport, CliError> {
    let c = flags.cost()?;
    let (result, ms) = solve(h0, h1, &c, flags)?;
    Ok(base_report(&result, flags.lambda, ms, flags))
}

pub fn cmd_plan(h0: &CircularHistogram, h1: &CircularHistogram, flags: &SolveFlags) -> Result<RunReport, CliError> {
    let c = flags.cost()?;
    let (result, ms) = solve(h0, h1, &c, flags)?;
    let plan = extract_plan(h0, h1, &c, result.theta_star);
    let mut report = base_report(&result, flags.lambda, ms, flags);
    report.assignments = Some(
        plan.assignments
            .iter()
            .map(|a| AssignmentRow {
                source_index: a.source_index,
                source_position: Real(a.source_position),
                target_index: a.target_index,
                target_position_lifted: Real(a.target_position_lifted),
                target_position_circle: Real(a.target_position_circle),
                mass: Real(a.mass),
            })
            .collect(),
    );
    Ok(report)
}

/// Parses `"lo:hi"`.
pub fn parse_range(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Argument(format!("range must look like lo:hi, got {s:?}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn cmd_curve(
    h0: &CircularHistogram,
    h1: &CircularHistogram,
    flags: &SolveFlags,
    samples: usize,
    range: Option<(f64, f64)>,
) -> Result<RunReport, CliError> {
    if samples < 2 {
        return Err(CliError::Argument(format!("need at least 2 samples, got {samples}")));
    }
    let c = flags.cost()?;
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let b = bracket_for(
                &c,
                BracketOptions {
                    tight: flags.tight_bracket,
                },
            )
            .map_err(SolveError::from)?;
            (b.theta_lo, b.theta_hi)
        }
    };
    let step = (hi - lo) / (samples - 1) as f64;
    let rows = (0..samples)
        .map(|k| {
            let theta = if k + 1 == samples { hi } else { lo + k as f64 * step };
            let e = evaluate_at(h0, h1, &c, theta);
            CurveRow {
                theta: Real(theta),
                cost: Real(e.value),
                left_derivative: Real(e.left_derivative),
                right_derivative: Real(e.right_derivative),
            }
        })
        .collect();
    let breakpoints = (h0.len() * h1.len() <= BREAKPOINT_GUARD)
        .then(|| candidate_thetas(h0, h1, lo, hi).into_iter().map(Real).collect());
    Ok(RunReport {
        curve: Some(Curve {
            range: [Real(lo), Real(hi)],
            rows,
            breakpoints,
        }),
        ..RunReport::default()
    })
}

/// Absolute agreement required in exact (rational) mode, scaled by the cost.
pub const CHECK_TOLERANCE: f64 = 1e-12;

fn oracle_row(r: &OracleResult) -> OracleRow {
    OracleRow {
        theta_star: Real(r.theta_star),
        cost: Real(r.cost),
        candidates_evaluated: r.candidates_evaluated,
    }
}

/// Whether a solver cost is consistent with an oracle minimum.
pub fn agrees(result: &SolveResult, oracle_cost: f64) -> bool {
    let slack = CHECK_TOLERANCE * oracle_cost.abs().max(1.0);
    if result.denominator.is_some() {
        (result.cost - oracle_cost).abs() <= slack
    } else {
        result.cost <= oracle_cost + result.epsilon_used + slack && oracle_cost <= result.cost + slack
    }
}

pub fn cmd_check(h0: &CircularHistogram, h1: &CircularHistogram, flags: &SolveFlags) -> Result<RunReport, CliError> {
    let c = flags.cost()?;
    let (result, ms) = solve(h0, h1, &c, flags)?;
    let mut skipped = Vec::new();
    let breakpoints = match oracle_breakpoints(h0, h1, &c, &result.bracket) {
        Ok(r) => Some(r),
        Err(e) => {
            skipped.push(format!("breakpoints: {e}"));
            None
        }
    };
    let rotations = match oracle_rotations(h0, h1, &c) {
        Ok(r) => Some(r),
        Err(e) => {
            skipped.push(format!("rotations: {e}"));
            None
        }
    };
    if breakpoints.is_none() && rotations.is_none() {
        return Err(CliError::Argument(format!(
            "no oracle applies (needs n0*n1 <= {BREAKPOINT_GUARD} or a common denominator <= {ROTATION_GUARD})"
        )));
    }
    let agree = breakpoints.iter().chain(rotations.iter()).all(|o| agrees(&result, o.cost));
    let mut report = base_report(&result, flags.lambda, ms, flags);
    report.check = Some(CheckSummary {
        agree,
        tolerance: Real(CHECK_TOLERANCE),
        breakpoints: breakpoints.as_ref().map(oracle_row),
        rotations: rotations.as_ref().map(oracle_row),
        skipped,
    });
    if agree {
        Ok(report)
    } else {
        Err(CliError::Disagreement(Box::new(report)))
    }
}
