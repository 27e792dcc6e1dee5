//! Cost functions on the universal cover of the circle.
//!
//! Every cost handled here satisfies `c(x + 1, y + 1) = c(x, y)`, the Monge
//! condition `c(x1, y1) + c(x2, y2) < c(x1, y2) + c(x2, y1)` for `x1 < x2`,
//! `y1 < y2` (non-strict in the `|x - y|` limit case) and grows without bound
//! as `|x - y|` grows.

use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A real function of one variable, shared between threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// A real function of two variables, shared between threads.
pub type PairFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("power cost exponent must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("cost declares no growth data")]
    UnknownGrowth,
    #[error("growth radius for level {0} not found; the convex part is not coercive")]
    NotCoercive(f64),
}

/// Anything that can price moving unit mass from `x` to `y`.
pub trait PairCost {
    fn cost(&self, x: f64, y: f64) -> f64;
}

impl<F: Fn(f64, f64) -> f64> PairCost for F {
    fn cost(&self, x: f64, y: f64) -> f64 {
        self(x, y)
    }
}

/// Wraps a cost and counts how often it is evaluated.
pub struct CountingCost<'a, C: ?Sized> {
    inner: &'a C,
    evaluations: Cell<u64>,
}

impl<'a, C: PairCost + ?Sized> CountingCost<'a, C> {
    pub fn new(inner: &'a C) -> Self {
        Self {
            inner,
            evaluations: Cell::new(0),
        }
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations.get()
    }
}

impl<C: PairCost + ?Sized> PairCost for CountingCost<'_, C> {
    fn cost(&self, x: f64, y: f64) -> f64 {
        self.evaluations.set(self.evaluations.get() + 1);
        self.inner.cost(x, y)
    }
}

/// `c(x, y) = h(x - y) + f(x) + g(y)` with `h` convex and `f`, `g` 1-periodic.
#[derive(Clone)]
pub struct ConvexPlusPeriodic {
    pub convex: ScalarFn,
    pub source_periodic: ScalarFn,
    pub target_periodic: ScalarFn,
}

/// An opaque cost together with the data the solver cannot derive for it.
#[derive(Clone)]
pub struct CustomCost {
    pub evaluator: PairFn,
    /// Interval of shifts known to contain a minimiser.
    pub declared_bracket: Option<(f64, f64)>,
    /// Upper bound on `|C'|` over the declared bracket.
    pub declared_lipschitz: Option<f64>,
    /// `R(P)` such that `c(x, y) >= P` whenever `|x - y| >= R(P)`.
    pub declared_growth: Option<ScalarFn>,
}

#[derive(Clone)]
pub enum CostKind {
    /// `|x - y|^lambda`, `lambda >= 1`.
    Power(f64),
    ConvexPlusPeriodic(ConvexPlusPeriodic),
    Custom(CustomCost),
}

#[derive(Clone)]
pub struct CostFunction {
    kind: CostKind,
    symmetric: bool,
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            CostKind::Power(l) => format!("Power({l})"),
            CostKind::ConvexPlusPeriodic(_) => "ConvexPlusPeriodic".to_string(),
            CostKind::Custom(_) => "Custom".to_string(),
        };
        f.debug_struct("CostFunction")
            .field("kind", &kind)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

impl CostFunction {
    pub fn power(lambda: f64) -> Result<Self, CostError> {
        if !lambda.is_finite() || lambda < 1.0 {
            return Err(CostError::InvalidExponent(lambda));
        }
        Ok(Self {
            kind: CostKind::Power(lambda),
            symmetric: true,
        })
    }

    /// `h(x - y) + f(x) + g(y)`; `symmetric` declares that the whole cost
    /// depends on `|x - y|` only.
    pub fn convex_plus_periodic(
        convex: impl Fn(f64) -> f64 + Send + Sync + 'static,
        source_periodic: impl Fn(f64) -> f64 + Send + Sync + 'static,
        target_periodic: impl Fn(f64) -> f64 + Send + Sync + 'static,
        symmetric: bool,
    ) -> Self {
        Self {
            kind: CostKind::ConvexPlusPeriodic(ConvexPlusPeriodic {
                convex: Arc::new(convex),
                source_periodic: Arc::new(source_periodic),
                target_periodic: Arc::new(target_periodic),
            }),
            symmetric,
        }
    }

    pub fn custom(custom: CustomCost, symmetric: bool) -> Self {
        Self {
            kind: CostKind::Custom(custom),
            symmetric,
        }
    }

    /// Opaque cost without any declared bracket, Lipschitz or growth data.
    pub fn custom_fn(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static, symmetric: bool) -> Self {
        Self::custom(
            CustomCost {
                evaluator: Arc::new(f),
                declared_bracket: None,
                declared_lipschitz: None,
                declared_growth: None,
            },
            symmetric,
        )
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Exponent of a power cost.
    pub fn power_exponent(&self) -> Option<f64> {
        match self.kind {
            CostKind::Power(l) => Some(l),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            CostKind::Power(l) => power(x - y, *l),
            CostKind::ConvexPlusPeriodic(c) => {
                (c.convex)(x - y) + (c.source_periodic)(x) + (c.target_periodic)(y)
            }
            CostKind::Custom(c) => (c.evaluator)(x, y),
        }
    }
}

fn power(d: f64, lambda: f64) -> f64 {
    let a = d.abs();
    if lambda == 1.0 {
        a
    } else if lambda == 2.0 {
        a * a
    } else {
        a.powf(lambda)
    }
}

impl PairCost for CostFunction {
    fn cost(&self, x: f64, y: f64) -> f64 {
        self.eval(x, y)
    }
}

pub fn cost_eval(c: &CostFunction, x: f64, y: f64) -> f64 {
    c.eval(x, y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MongeMode {
    /// Every crossing quantity must be `< 0`.
    Strict,
    /// Quantities may reach 0 (up to rounding); used for `|x - y|`.
    NonStrict,
}

/// Outcome of a grid check of the Monge condition.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub passed: bool,
    pub mode: MongeMode,
    /// Largest `c(x1,y1) + c(x2,y2) - c(x1,y2) - c(x2,y1)` seen.
    pub max_quantity: f64,
    /// `(x1, x2, y1, y2)` achieving `max_quantity`.
    pub worst: Option<[f64; 4]>,
    pub quadruples: usize,
}

/// Rounding allowance for the non-strict check.
const NON_STRICT_SLACK: f64 = 1e-12;

/// Evaluates the Monge quantity on every quadruple `x1 < x2`, `y1 < y2` drawn
/// from `grid`. This is a sampled check, not a proof.
pub fn check_monge(c: &CostFunction, grid: &[f64], mode: MongeMode) -> CheckReport {
    let mut pts: Vec<f64> = grid.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut max_quantity = f64::NEG_INFINITY;
    let mut worst = None;
    let mut quadruples = 0;
    for (a, &x1) in pts.iter().enumerate() {
        for &x2 in &pts[a + 1..] {
            for (b, &y1) in pts.iter().enumerate() {
                for &y2 in &pts[b + 1..] {
                    let q = c.eval(x1, y1) + c.eval(x2, y2) - c.eval(x1, y2) - c.eval(x2, y1);
                    quadruples += 1;
                    if q > max_quantity {
                        max_quantity = q;
                        worst = Some([x1, x2, y1, y2]);
                    }
                }
            }
        }
    }
    let passed = quadruples > 0
        && match mode {
            MongeMode::Strict => max_quantity < 0.0,
            MongeMode::NonStrict => max_quantity <= NON_STRICT_SLACK,
        };
    CheckReport {
        passed,
        mode,
        max_quantity,
        worst,
        quadruples,
    }
}

/// Returns `R(P)` with `c(x, y) >= P` whenever `|x - y| >= R(P)`.
pub fn growth_radius(c: &CostFunction, level: f64) -> Result<f64, CostError> {
    match &c.kind {
        CostKind::Power(l) => Ok(level.max(0.0).powf(1.0 / l)),
        CostKind::ConvexPlusPeriodic(cp) => convex_growth_radius(cp, level),
        CostKind::Custom(custom) => custom
            .declared_growth
            .as_ref()
            .map(|r| r(level))
            .ok_or(CostError::UnknownGrowth),
    }
}

/// Grid step used for numeric extrema of the periodic parts and `h`.
pub(crate) const GRID_STEP: f64 = 1e-3;

/// Conservative `(min, max)` of a 1-periodic function over one period,
/// widened by the largest change between neighbouring grid points.
pub(crate) fn periodic_extrema(f: &ScalarFn) -> (f64, f64) {
    let steps = (1.0 / GRID_STEP).round() as usize;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut modulus: f64 = 0.0;
    let mut prev = f(0.0);
    for k in 0..=steps {
        let v = f(k as f64 * GRID_STEP);
        lo = lo.min(v);
        hi = hi.max(v);
        modulus = modulus.max((v - prev).abs());
        prev = v;
    }
    (lo - modulus, hi + modulus)
}

/// Grid location of the minimum of a convex function, searched outward from 0.
pub(crate) fn convex_argmin(h: &ScalarFn) -> Option<f64> {
    // Expand until both ends rise above the interior, then scan on the grid.
    let mut half = 1.0;
    while half < 1e9 {
        let mid = h(0.0).min(h(half * 0.5)).min(h(-half * 0.5));
        if h(half) > mid && h(-half) > mid {
            break;
        }
        half *= 2.0;
    }
    if half >= 1e9 {
        return None;
    }
    // Golden-section style shrink to grid resolution.
    let (mut a, mut b) = (-half, half);
    while b - a > GRID_STEP {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if h(m1) <= h(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    Some(0.5 * (a + b))
}

fn convex_growth_radius(cp: &ConvexPlusPeriodic, level: f64) -> Result<f64, CostError> {
    let (fmin, _) = periodic_extrema(&cp.source_periodic);
    let (gmin, _) = periodic_extrema(&cp.target_periodic);
    let need = level - fmin - gmin;
    let h = &cp.convex;
    let start = convex_argmin(h).ok_or(CostError::NotCoercive(level))?.abs() + GRID_STEP;
    let ok = |r: f64| h(r) >= need && h(-r) >= need;
    if ok(start) {
        // h is monotone outward from its minimiser, so every r >= start works.
        return Ok(start);
    }
    let mut hi = start;
    while !ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(CostError::NotCoercive(level));
        }
    }
    let mut lo = start;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
