//! Brute-force reference solvers.
//!
//! Neither oracle uses the level merge or the bisection of the solver:
//! [`oracle_breakpoints`] evaluates `C` by sorting all quantile breakpoints
//! and inverting the distribution functions at segment midpoints, and
//! [`oracle_rotations`] matches unit atoms in sorted order for every cyclic
//! offset.

use thiserror::Error;

use crate::bracket::SearchBracket;
use crate::costs::CostFunction;
use crate::measures::{CircularHistogram, PeriodicCdf};

/// Largest `n0 * n1` accepted by [`oracle_breakpoints`].
pub const BREAKPOINT_GUARD: usize = 10_000;
/// Largest common denominator accepted by [`oracle_rotations`].
pub const ROTATION_GUARD: u64 = 2_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("instance too large for the oracle: {0}")]
    TooLarge(String),
    #[error("both histograms need a declared mass denominator")]
    NoDenominator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub theta_star: f64,
    pub cost: f64,
    pub candidates_evaluated: usize,
}

/// `C(theta)` by quantile quadrature over the sorted breakpoints.
pub fn reference_cost(f0: &PeriodicCdf, f1: &PeriodicCdf, c: &CostFunction, theta: f64) -> f64 {
    let mut cuts: Vec<f64> = Vec::with_capacity(f0.len() + f1.len() + 2);
    cuts.push(0.0);
    cuts.extend_from_slice(f0.cumulative());
    for &b in f1.cumulative() {
        // The lift of F1(y_j) - theta that lies in (0, 1].
        let v = b - theta;
        let v = v - (v.ceil() - 1.0);
        cuts.push(v);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            c.eval(f0.inverse(mid), f1.inverse(mid + theta)) * (w[1] - w[0])
        })
        .sum()
}

/// All shifts in `[lo, hi]` at which an `F0` level meets an `F1` level,
/// sorted and deduplicated. Computed from integer numerators when both
/// histograms declare denominators.
pub fn candidate_thetas(h0: &CircularHistogram, h1: &CircularHistogram, lo: f64, hi: f64) -> Vec<f64> {
    let f0 = h0.cdf();
    let f1 = h1.cdf();
    let mut out = Vec::new();
    match (f0.cumulative_numerators(), f1.cumulative_numerators(), h0.denominator(), h1.denominator()) {
        (Some(a), Some(b), Some(m0), Some(m1)) => {
            let m = num_integer::lcm(m0, m1);
            let (s0, s1) = ((m / m0) as i64, (m / m1) as i64);
            let kmin = (lo * m as f64).floor() as i64 - 1;
            let kmax = (hi * m as f64).ceil() as i64 + 1;
            let mut nums: Vec<i64> = Vec::new();
            for &ai in a {
                for &bj in b {
                    let d = bj as i64 * s1 - ai as i64 * s0;
                    let m = m as i64;
                    // d + k m over all k with the result in [kmin, kmax].
                    let first = (kmin - d).div_euclid(m);
                    let last = (kmax - d).div_euclid(m) + 1;
                    for k in first..=last {
                        nums.push(d + k * m);
                    }
                }
            }
            nums.sort_unstable();
            nums.dedup();
            out.extend(
                nums.into_iter()
                    .map(|n| n as f64 / m as f64)
                    .filter(|&t| lo <= t && t <= hi),
            );
        }
        _ => {
            for &ai in f0.cumulative() {
                for &bj in f1.cumulative() {
                    let d = bj - ai;
                    let first = (lo - d).ceil() as i64;
                    let last = (hi - d).floor() as i64;
                    for k in first..=last {
                        out.push(d + k as f64);
                    }
                }
            }
            out.sort_by(f64::total_cmp);
            out.dedup();
        }
    }
    out
}

/// Minimum of `C` over every exceptional shift in the bracket and the
/// bracket ends. A convex piecewise-affine function attains its minimum at
/// a breakpoint, so this is exact up to rounding.
pub fn oracle_breakpoints(
    h0: &CircularHistogram,
    h1: &CircularHistogram,
    c: &CostFunction,
    bracket: &SearchBracket,
) -> Result<OracleResult, OracleError> {
    if h0.len() * h1.len() > BREAKPOINT_GUARD {
        return Err(OracleError::TooLarge(format!(
            "n0 * n1 = {} > {}",
            h0.len() * h1.len(),
            BREAKPOINT_GUARD
        )));
    }
    let f0 = h0.cdf();
    let f1 = h1.cdf();
    let mut candidates = candidate_thetas(h0, h1, bracket.theta_lo, bracket.theta_hi);
    candidates.push(bracket.theta_lo);
    candidates.push(bracket.theta_hi);

    let mut best = OracleResult {
        theta_star: f64::NAN,
        cost: f64::INFINITY,
        candidates_evaluated: 0,
    };
    for &theta in &candidates {
        let v = reference_cost(&f0, &f1, c, theta);
        best.candidates_evaluated += 1;
        if v < best.cost {
            best.cost = v;
            best.theta_star = theta;
        }
    }
    Ok(best)
}

/// Expands both histograms into `M` unit atoms and, for each cyclic offset
/// and a few whole-turn lifts, prices the order-preserving matching.
pub fn oracle_rotations(h0: &CircularHistogram, h1: &CircularHistogram, c: &CostFunction) -> Result<OracleResult, OracleError> {
    let (Some(m0), Some(m1), Some(n0), Some(n1)) = (h0.denominator(), h1.denominator(), h0.numerators(), h1.numerators())
    else {
        return Err(OracleError::NoDenominator);
    };
    let m = num_integer::lcm(m0, m1);
    if m > ROTATION_GUARD {
        return Err(OracleError::TooLarge(format!("M = {m} > {ROTATION_GUARD}")));
    }
    let expand = |h: &CircularHistogram, nums: &[u64], scale: u64| -> Vec<f64> {
        h.positions()
            .iter()
            .zip(nums)
            .flat_map(|(&p, &k)| std::iter::repeat_n(p, (k * scale) as usize))
            .collect()
    };
    let xs = expand(h0, n0, m / m0);
    let ys = expand(h1, n1, m / m1);
    let m = m as usize;
    let unit = 1.0 / m as f64;

    let mut best = OracleResult {
        theta_star: f64::NAN,
        cost: f64::INFINITY,
        candidates_evaluated: 0,
    };
    // Offset s pairs x_i with the (i + s)-th lifted target; s in [-2M, 2M]
    // covers every lift of every rotation that can move mass by at most two turns.
    let m_i = m as i64;
    for s in -2 * m_i..=2 * m_i {
        let total: f64 = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let idx = i as i64 + s;
                let y = ys[idx.rem_euclid(m_i) as usize] + idx.div_euclid(m_i) as f64;
                c.eval(x, y)
            })
            .sum::<f64>()
            * unit;
        best.candidates_evaluated += 1;
        if total < best.cost {
            best.cost = total;
            best.theta_star = s as f64 * unit;
        }
    }
    Ok(best)
}
