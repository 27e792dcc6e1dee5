//! Measure-independent search interval and derivative bound for `C`.

use thiserror::Error;

use crate::costs::{convex_argmin, periodic_extrema, ConvexPlusPeriodic, CostFunction, CostKind, ScalarFn, GRID_STEP};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BracketError {
    #[error("custom cost declares no search bracket and Lipschitz bound")]
    UnknownBracket,
    #[error("declared bracket [{0}, {1}] or Lipschitz bound {2} is invalid")]
    InvalidDeclaration(f64, f64, f64),
    #[error("convex part of the cost is not coercive")]
    NotCoercive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketProvenance {
    Analytic,
    Numeric,
    UserDeclared,
}

/// `[theta_lo, theta_hi]` contains a minimiser of `C` for every pair of
/// marginals, and `|C'| <= lipschitz` on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchBracket {
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub lipschitz: f64,
    pub provenance: BracketProvenance,
}

impl SearchBracket {
    pub fn width(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.theta_lo <= theta && theta <= self.theta_hi
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BracketOptions {
    /// Use `[-1, 1]` for symmetric costs instead of the general bracket.
    pub tight: bool,
}

/// Half-width of the general bracket for power costs.
pub const POWER_HALF_WIDTH: f64 = 6.0;

pub fn bracket_for(c: &CostFunction, options: BracketOptions) -> Result<SearchBracket, BracketError> {
    match c.kind() {
        CostKind::Power(lambda) => Ok(power_bracket(*lambda, options.tight && c.is_symmetric())),
        CostKind::ConvexPlusPeriodic(cp) => numeric_bracket(cp),
        CostKind::Custom(custom) => match (custom.declared_bracket, custom.declared_lipschitz) {
            (Some((lo, hi)), Some(l)) => {
                if lo.is_nan() || hi.is_nan() || lo >= hi || !l.is_finite() || l <= 0.0 {
                    return Err(BracketError::InvalidDeclaration(lo, hi, l));
                }
                Ok(SearchBracket {
                    theta_lo: lo,
                    theta_hi: hi,
                    lipschitz: l,
                    provenance: BracketProvenance::UserDeclared,
                })
            }
            _ => Err(BracketError::UnknownBracket),
        },
    }
}

/// On `[-T, T]` the plan never moves mass farther than `T + 3`, so
/// `|C'| <= sup |d/dy |x - y|^lambda| = lambda (T + 3)^(lambda - 1)`.
fn power_bracket(lambda: f64, tight: bool) -> SearchBracket {
    let half = if tight { 1.0 } else { POWER_HALF_WIDTH };
    SearchBracket {
        theta_lo: -half,
        theta_hi: half,
        lipschitz: lambda * (half + 3.0).powf(lambda - 1.0),
        provenance: BracketProvenance::Analytic,
    }
}

/// Lower and upper envelopes of `c` over the box reachable at shift `theta`.
struct Envelopes {
    convex: ScalarFn,
    argmin: f64,
    periodic_min: f64,
    periodic_max: f64,
}

impl Envelopes {
    /// Over `u1 in [-1, 2]`, `u2 in [theta - 1, theta + 2]` the difference
    /// `u1 - u2` ranges over `[-theta - 3, -theta + 3]`.
    fn range(theta: f64) -> (f64, f64) {
        (-theta - 3.0, -theta + 3.0)
    }

    fn modulus(&self, p: f64, q: f64) -> f64 {
        let h = &self.convex;
        (h(p + GRID_STEP) - h(p)).abs().max((h(q) - h(q - GRID_STEP)).abs())
    }

    fn lower(&self, theta: f64) -> f64 {
        let (p, q) = Self::range(theta);
        let d = self.argmin.clamp(p, q);
        (self.convex)(d) - self.modulus(p, q) + self.periodic_min
    }

    fn upper(&self, theta: f64) -> f64 {
        let (p, q) = Self::range(theta);
        (self.convex)(p).max((self.convex)(q)) + self.periodic_max
    }
}

/// Grid evaluation of the envelope bracket for `h(x - y) + f(x) + g(y)`.
fn numeric_bracket(cp: &ConvexPlusPeriodic) -> Result<SearchBracket, BracketError> {
    let argmin = convex_argmin(&cp.convex).ok_or(BracketError::NotCoercive)?;
    let (fmin, fmax) = periodic_extrema(&cp.source_periodic);
    let (gmin, gmax) = periodic_extrema(&cp.target_periodic);
    let env = Envelopes {
        convex: cp.convex.clone(),
        argmin,
        periodic_min: fmin + gmin,
        periodic_max: fmax + gmax,
    };

    // The minimiser of the upper envelope sits near -argmin; beyond a few
    // units either side the lower envelope exceeds everything seen there.
    let centre = -argmin;
    let step = GRID_STEP;
    let mut best_upper = f64::INFINITY;
    let mut k = 0i64;
    loop {
        let mut improved = false;
        for theta in [centre + k as f64 * step, centre - k as f64 * step] {
            let u = env.upper(theta);
            if u < best_upper {
                best_upper = u;
                improved = true;
            }
        }
        k += 1;
        if !improved && k as f64 * step > 4.0 {
            break;
        }
        if k > 10_000_000 {
            return Err(BracketError::NotCoercive);
        }
    }

    // Walk outward from the centre until the lower envelope clears the target.
    let walk = |dir: f64| -> Result<f64, BracketError> {
        let mut theta = centre;
        let mut n = 0u64;
        loop {
            theta += dir * step;
            n += 1;
            if env.lower(theta) > best_upper && (theta - centre).abs() > 3.0 {
                return Ok(theta);
            }
            if n > 10_000_000 {
                return Err(BracketError::NotCoercive);
            }
        }
    };
    let theta_lo = walk(-1.0)?;
    let theta_hi = walk(1.0)?;

    // Any theta beyond an end gives a valid slope bound; take the best on a grid.
    let slope_bound = |end: f64, dir: f64| -> f64 {
        let base = env.lower(end);
        (1..=2000)
            .map(|k| {
                let d = k as f64 * 0.01;
                (env.upper(end + dir * d) - base) / d
            })
            .fold(f64::INFINITY, f64::min)
    };
    let lipschitz = slope_bound(theta_hi, 1.0).max(slope_bound(theta_lo, -1.0));

    Ok(SearchBracket {
        theta_lo,
        theta_hi,
        lipschitz: lipschitz.max(f64::MIN_POSITIVE),
        provenance: BracketProvenance::Numeric,
    })
}
