//! Explicit transport plans: the monotone coupling with rotation number
//! `theta`, written as mass moved between atoms of the circle.

use crate::costs::CostFunction;
use crate::measures::{reduce_to_period, CircularHistogram};
use crate::profile::{avg_cost, build_profile, LiftedAtom};

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub source_index: usize,
    /// In `(0, 1]`.
    pub source_position: f64,
    pub target_index: usize,
    /// Target on the universal cover, paired with `source_position`.
    pub target_position_lifted: f64,
    /// Target projected to `(0, 1]`.
    pub target_position_circle: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    pub theta: f64,
    /// Sorted by source position, then by lifted target.
    pub assignments: Vec<Assignment>,
    /// `C(theta)`, summed exactly as the average cost is.
    pub total_cost: f64,
}

impl TransportPlan {
    /// Total mass leaving each source atom, indexed like the source histogram.
    pub fn source_marginal(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for a in &self.assignments {
            out[a.source_index] += a.mass;
        }
        out
    }

    /// Total mass arriving at each target atom of the circle.
    pub fn target_marginal(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for a in &self.assignments {
            out[a.target_index] += a.mass;
        }
        out
    }

    /// `sum mass * c(source, lifted target)`.
    pub fn recomputed_cost(&self, c: &CostFunction) -> f64 {
        self.assignments
            .iter()
            .map(|a| a.mass * c.eval(a.source_position, a.target_position_lifted))
            .sum()
    }
}

/// Builds the plan conjugate to the shift by `theta`: mass at quantile level
/// `v` goes from `F0^{-1}(v)` to `F1^{-1}(v + theta)`.
///
/// Consecutive segments joining the same pair of lifted atoms are merged and
/// zero-width segments are dropped.
pub fn extract_plan(h0: &CircularHistogram, h1: &CircularHistogram, c: &CostFunction, theta: f64) -> TransportPlan {
    let f0 = h0.cdf();
    let f1 = h1.cdf();
    let profile = build_profile(&f0, &f1, theta);
    let total_cost = avg_cost(&profile, c);

    let mut assignments: Vec<Assignment> = Vec::with_capacity(profile.segments.len());
    let mut last_pair: Option<(LiftedAtom, LiftedAtom)> = None;
    for seg in profile.segments.iter().filter(|s| s.width() > 0.0) {
        let pair = (seg.source, seg.target);
        if last_pair == Some(pair) {
            if let Some(a) = assignments.last_mut() {
                a.mass += seg.width();
            }
            continue;
        }
        last_pair = Some(pair);
        // Re-base the pair so that the source lies in (0, 1].
        let shift = seg.source.period as f64;
        assignments.push(Assignment {
            source_index: seg.source.index,
            source_position: h0.positions()[seg.source.index],
            target_index: seg.target.index,
            target_position_lifted: seg.target_position - shift,
            target_position_circle: reduce_to_period(seg.target_position),
            mass: seg.width(),
        });
    }
    assignments.sort_by(|a, b| {
        a.source_position
            .total_cmp(&b.source_position)
            .then(a.target_position_lifted.total_cmp(&b.target_position_lifted))
    });

    TransportPlan {
        theta,
        assignments,
        total_cost,
    }
}
