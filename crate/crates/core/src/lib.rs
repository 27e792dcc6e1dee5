//! Globally optimal transport between discrete measures on the unit circle.
//!
//! Lifting both measures to the real line turns circle transport into a
//! one-parameter family of monotone couplings indexed by a shift `theta`.
//! The average cost per period `C(theta)` of that family is convex and
//! piecewise affine for atomic marginals; [`solver::minimize`] finds its
//! global minimum by bisection on the signs of the one-sided derivatives in
//! `O((n0 + n1) log(1/epsilon))` cost evaluations.
//!
//! ```
//! use circot_core::{CircularHistogram, CostFunction, SolveOptions, minimize};
//!
//! let a = CircularHistogram::new(&[0.1, 0.6], &[0.5, 0.5], None).unwrap();
//! let b = CircularHistogram::new(&[0.9], &[1.0], None).unwrap();
//! let c = CostFunction::power(2.0).unwrap();
//! let r = minimize(&a, &b, &c, &SolveOptions::default()).unwrap();
//! assert!((r.cost - 0.5 * (0.2f64.powi(2) + 0.3f64.powi(2))).abs() < 1e-9);
//! ```

pub mod bracket;
pub mod costs;
pub mod measures;
pub mod oracle;
pub mod plan;
pub mod profile;
pub mod solver;

pub use bracket::{bracket_for, BracketError, BracketOptions, BracketProvenance, SearchBracket};
pub use costs::{
    check_monge, cost_eval, growth_radius, CheckReport, CostError, CostFunction, CostKind, CountingCost, CustomCost,
    MongeMode, PairCost,
};
pub use measures::{cdf_eval, cdf_inverse, histogram_new, CircularHistogram, MeasureError, PeriodicCdf};
pub use oracle::{candidate_thetas, oracle_breakpoints, oracle_rotations, OracleError, OracleResult};
pub use plan::{extract_plan, Assignment, TransportPlan};
pub use profile::{avg_cost, avg_cost_at, avg_cost_derivatives, build_profile, AvgCostEval, MergedProfile};
pub use solver::{
    evaluate_at, minimize, minimize_with_hook, mk_distance, IterationRecord, SolveError, SolveOptions, SolveResult, Termination,
};
