//! Global minimisation of the average cost by bisection on the sign of its
//! one-sided derivatives.
//!
//! `C` is convex and piecewise affine, so a shift `theta` is optimal exactly
//! when `C'(theta - 0) <= 0 <= C'(theta + 0)`. The search keeps a bracket with
//! `C'(lo + 0) <= 0 <= C'(hi - 0)`, halves it until it is narrower than
//! `epsilon / L`, and then intersects the two supporting lines at its ends.
//! With rational masses of common denominator `M` and `epsilon = 1/(2M)` the
//! final bracket holds at most one breakpoint and the answer is exact.

use thiserror::Error;

use crate::bracket::{bracket_for, BracketError, BracketOptions, SearchBracket};
use crate::costs::{CostError, CostFunction, CountingCost, PairCost};
use crate::measures::{CircularHistogram, PeriodicCdf};
use crate::profile::{avg_cost, build_profile, common_denominator, derivatives, AvgCostEval};

pub const DEFAULT_EPSILON: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

/// Derivatives this close to zero count as zero when reporting flat minima.
const FLAT_SLOPE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Bracket(#[from] BracketError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("no convergence after {iterations} bisections; bracket [{lo}, {hi}] (is the declared Lipschitz bound right?)")]
    IterationCap { iterations: usize, lo: f64, hi: f64 },
    #[error("non-finite derivative at theta = {0}")]
    NonFinite(f64),
}

/// How the search stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The midpoint satisfied the derivative sign test.
    SignTest,
    /// The bracket became narrower than `epsilon / L`.
    Width,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Defaults to [`DEFAULT_EPSILON`]; replaced by `1/(2M)` when both
    /// histograms declare mass denominators.
    pub epsilon: Option<f64>,
    pub tight_bracket: bool,
    pub max_iterations: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            tight_bracket: false,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// State passed to the iteration hook after each midpoint evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    /// Number of bisections performed before this evaluation.
    pub iteration: usize,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub theta: f64,
    pub left_derivative: f64,
    pub right_derivative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub theta_star: f64,
    pub cost: f64,
    /// True when stopped by the sign test, or by the width test in rational
    /// mode with `epsilon < 1/M`.
    pub exact: bool,
    /// Number of bracket halvings.
    pub iterations: usize,
    /// Bound on the cost gap `C(theta*) - min C`.
    pub epsilon_used: f64,
    /// Bracket width at which the width test fires, `epsilon / L`.
    pub theta_tolerance: f64,
    pub cost_evaluations: u64,
    pub comparisons: u64,
    pub left_derivative: f64,
    pub right_derivative: f64,
    pub termination: Termination,
    pub bracket: SearchBracket,
    /// Common mass denominator when both inputs declare one.
    pub denominator: Option<u64>,
    /// Endpoints of the flat minimum segment when `C' = 0` on both sides of
    /// `theta*`.
    pub flat_interval: Option<(f64, f64)>,
}

fn evaluate<C: PairCost + ?Sized>(
    f0: &PeriodicCdf,
    f1: &PeriodicCdf,
    c: &C,
    theta: f64,
    comparisons: &mut u64,
) -> Result<(f64, f64), SolveError> {
    let profile = build_profile(f0, f1, theta);
    *comparisons += profile.comparisons as u64;
    let (l, r) = derivatives(&profile, c);
    if !l.is_finite() || !r.is_finite() {
        return Err(SolveError::NonFinite(theta));
    }
    Ok((l, r))
}

fn value<C: PairCost + ?Sized>(f0: &PeriodicCdf, f1: &PeriodicCdf, c: &C, theta: f64, comparisons: &mut u64) -> f64 {
    let profile = build_profile(f0, f1, theta);
    *comparisons += profile.comparisons as u64;
    avg_cost(&profile, c)
}

/// Minimises `C` over all shifts; see the module docs.
pub fn minimize(
    h0: &CircularHistogram,
    h1: &CircularHistogram,
    c: &CostFunction,
    options: &SolveOptions,
) -> Result<SolveResult, SolveError> {
    minimize_with_hook(h0, h1, c, options, &mut |_| {})
}

/// [`minimize`] with a callback invoked after every midpoint evaluation.
pub fn minimize_with_hook(
    h0: &CircularHistogram,
    h1: &CircularHistogram,
    c: &CostFunction,
    options: &SolveOptions,
    hook: &mut dyn FnMut(&IterationRecord),
) -> Result<SolveResult, SolveError> {
    let bracket = bracket_for(
        c,
        BracketOptions {
            tight: options.tight_bracket,
        },
    )?;
    let f0 = h0.cdf();
    let f1 = h1.cdf();
    let denominator = common_denominator(&f0, &f1);
    let epsilon = match denominator {
        Some(m) => 1.0 / (2.0 * m as f64),
        None => options.epsilon.unwrap_or(DEFAULT_EPSILON),
    };
    if let Some(e) = options.epsilon {
        if !e.is_finite() || e <= 0.0 {
            return Err(SolveError::InvalidEpsilon(e));
        }
    }
    let theta_tolerance = epsilon / bracket.lipschitz;

    let counted = CountingCost::new(c);
    let mut comparisons = 0u64;
    let (mut lo, mut hi) = (bracket.theta_lo, bracket.theta_hi);
    // C'(lo + 0) and C'(hi - 0) once an end has moved to an evaluated midpoint.
    let mut lo_slope: Option<f64> = None;
    let mut hi_slope: Option<f64> = None;
    let mut iterations = 0;

    let (theta, termination) = loop {
        let theta = 0.5 * (lo + hi);
        let (left, right) = evaluate(&f0, &f1, &counted, theta, &mut comparisons)?;
        hook(&IterationRecord {
            iteration: iterations,
            theta_lo: lo,
            theta_hi: hi,
            theta,
            left_derivative: left,
            right_derivative: right,
        });
        if left <= 0.0 && 0.0 <= right {
            break (theta, Termination::SignTest);
        }
        if hi - lo < theta_tolerance {
            let s_lo = match lo_slope {
                Some(s) => s,
                None => evaluate(&f0, &f1, &counted, lo, &mut comparisons)?.1,
            };
            let s_hi = match hi_slope {
                Some(s) => s,
                None => evaluate(&f0, &f1, &counted, hi, &mut comparisons)?.0,
            };
            let c_lo = value(&f0, &f1, &counted, lo, &mut comparisons);
            let c_hi = value(&f0, &f1, &counted, hi, &mut comparisons);
            break (intersect_supporting_lines(lo, c_lo, s_lo, hi, c_hi, s_hi), Termination::Width);
        }
        if iterations >= options.max_iterations {
            return Err(SolveError::IterationCap { iterations, lo, hi });
        }
        if right < 0.0 {
            lo = theta;
            lo_slope = Some(right);
        } else {
            hi = theta;
            hi_slope = Some(left);
        }
        iterations += 1;
    };

    let theta_star = match (denominator, termination) {
        // Breakpoints are multiples of 1/M; remove the rounding of the
        // line intersection.
        (Some(m), Termination::Width) => (theta * m as f64).round() / m as f64,
        _ => theta,
    };
    let exact = match termination {
        Termination::SignTest => true,
        Termination::Width => denominator.is_some_and(|m| epsilon < 1.0 / m as f64),
    };

    let profile = build_profile(&f0, &f1, theta_star);
    comparisons += profile.comparisons as u64;
    let cost = avg_cost(&profile, &counted);
    let (left_derivative, right_derivative) = derivatives(&profile, &counted);
    let cost_evaluations = counted.evaluations();

    let flat_interval = if left_derivative.abs() <= FLAT_SLOPE && right_derivative.abs() <= FLAT_SLOPE {
        Some(flat_segment(&f0, &f1, c, theta_star, denominator))
    } else {
        None
    };

    Ok(SolveResult {
        theta_star,
        cost,
        exact,
        iterations,
        epsilon_used: epsilon,
        theta_tolerance,
        cost_evaluations,
        comparisons,
        left_derivative,
        right_derivative,
        termination,
        bracket,
        denominator,
        flat_interval,
    })
}

/// Solves `c_lo + s_lo (t - lo) = c_hi + s_hi (t - hi)`; the midpoint when
/// the slopes agree.
fn intersect_supporting_lines(lo: f64, c_lo: f64, s_lo: f64, hi: f64, c_hi: f64, s_hi: f64) -> f64 {
    if s_lo == s_hi {
        return 0.5 * (lo + hi);
    }
    let t = (c_hi - c_lo + s_lo * lo - s_hi * hi) / (s_lo - s_hi);
    if t.is_finite() {
        t.clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    }
}

/// Walks breakpoint to breakpoint from `theta` while `C'` stays zero.
fn flat_segment(f0: &PeriodicCdf, f1: &PeriodicCdf, c: &CostFunction, theta: f64, denominator: Option<u64>) -> (f64, f64) {
    let snap = |t: f64| match denominator {
        Some(m) => (t * m as f64).round() / m as f64,
        None => t,
    };
    let limit = 4 * (f0.len() + f1.len()) + 8;
    let walk = |up: bool| {
        let mut t = theta;
        for _ in 0..limit {
            let p = build_profile(f0, f1, t);
            let next = if up { snap(t + p.gap_above()) } else { snap(t - p.gap_below()) };
            if !next.is_finite() || next == t {
                break;
            }
            t = next;
            let (l, r) = derivatives(&build_profile(f0, f1, t), c);
            let beyond = if up { r } else { l };
            if beyond.abs() > FLAT_SLOPE {
                break;
            }
        }
        t
    };
    let lower = walk(false);
    let upper = walk(true);
    (lower, upper)
}

/// `MK_lambda(h0, h1) = (min cost under |x - y|^lambda)^(1/lambda)`.
pub fn mk_distance(
    h0: &CircularHistogram,
    h1: &CircularHistogram,
    lambda: f64,
    epsilon: Option<f64>,
) -> Result<f64, SolveError> {
    let c = CostFunction::power(lambda)?;
    let result = minimize(
        h0,
        h1,
        &c,
        &SolveOptions {
            epsilon,
            ..SolveOptions::default()
        },
    )?;
    Ok(result.cost.max(0.0).powf(1.0 / lambda))
}

/// `C` and both derivatives at `theta`, for callers holding histograms.
pub fn evaluate_at(h0: &CircularHistogram, h1: &CircularHistogram, c: &CostFunction, theta: f64) -> AvgCostEval {
    crate::profile::avg_cost_derivatives(&h0.cdf(), &h1.cdf(), c, theta)
}
