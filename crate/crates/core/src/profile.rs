//! The average cost `C(theta)` of the monotone plan with rotation number
//! `theta`, and its one-sided derivatives.
//!
//! For atomic marginals the cumulative levels `F0(x_i)` and `F1(y_j) - theta`
//! that fall in `(0, 1]` split the unit interval of quantile levels into
//! segments; on segment `k` the plan moves mass `v_(k) - v_(k-1)` from a fixed
//! source atom to a fixed target atom. Both level families are already sorted,
//! so a single merge pass yields the whole profile.

use crate::costs::PairCost;
use crate::measures::{split_period, PeriodicCdf};

/// Relative tolerance under which an `F0` and an `F1` level are identified.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// An atom of the lifted (periodic) measure: atom `index` shifted by `period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LiftedAtom {
    pub index: usize,
    pub period: i64,
}

/// One constant piece of the monotone coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lower: f64,
    pub upper: f64,
    pub source: LiftedAtom,
    pub target: LiftedAtom,
    pub source_position: f64,
    pub target_position: f64,
}

impl Segment {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Data attached to one target level `F1(y_j) - theta`, enough for the
/// derivative contributions of that level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetPivot {
    pub level: f64,
    /// `y_j`, the atom whose level this is.
    pub target_position: f64,
    /// `y_{j+1}`, the next lifted target atom.
    pub next_target_position: f64,
    /// `F0^{-1}(level - 0)`, used by the right derivative.
    pub source_below: f64,
    /// `F0^{-1}(level)`, used by the left derivative.
    pub source_above: f64,
    /// Lifted stream indices of the two sources above.
    source_below_stream: i64,
    source_above_stream: i64,
    /// Whether the level coincides with an `F0` level.
    pub tie: bool,
}

/// Sorted merge of the source and shifted target levels at a fixed shift.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedProfile {
    pub theta: f64,
    /// `v_(0) = 0 <= v_(1) <= ... <= v_(n0+n1)`.
    pub levels: Vec<f64>,
    /// One segment per consecutive pair of levels, zero-width ones included.
    pub segments: Vec<Segment>,
    /// One pivot per target atom of the period, in level order.
    pub pivots: Vec<TargetPivot>,
    /// True when an `F0` level coincides with an `F1` level.
    pub exceptional: bool,
    /// Level comparisons spent on the merge.
    pub comparisons: usize,
    /// First target atom whose shifted level is positive.
    pub first_target: LiftedAtom,
    /// Tolerance used to identify coinciding levels.
    pub tolerance: f64,
    lower_gap: f64,
    upper_gap: f64,
}

impl MergedProfile {
    /// Lifted source atoms `x_(k)`, one per segment.
    pub fn source_atoms(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.source_position)
    }

    /// Lifted target atoms `y_(k)`, one per segment.
    pub fn target_atoms(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().map(|s| s.target_position)
    }

    /// Distance to the nearest exceptional shift strictly below `theta`.
    pub fn gap_below(&self) -> f64 {
        self.lower_gap
    }

    /// Distance to the nearest exceptional shift strictly above `theta`.
    pub fn gap_above(&self) -> f64 {
        self.upper_gap
    }
}

/// Value and one-sided derivatives of the average cost at one shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvgCostEval {
    pub theta: f64,
    pub value: f64,
    pub left_derivative: f64,
    pub right_derivative: f64,
    pub exceptional: bool,
}

/// Exact integer levels when both histograms carry denominators.
struct RationalLevels<'a> {
    source: &'a [u64],
    target: &'a [u64],
    source_scale: u64,
    target_scale: u64,
    denominator: u64,
}

fn rational_levels<'a>(f0: &'a PeriodicCdf, f1: &'a PeriodicCdf) -> Option<RationalLevels<'a>> {
    let m0 = f0.histogram().denominator()?;
    let m1 = f1.histogram().denominator()?;
    let m = num_integer::lcm(m0, m1);
    Some(RationalLevels {
        source: f0.cumulative_numerators()?,
        target: f1.cumulative_numerators()?,
        source_scale: m / m0,
        target_scale: m / m1,
        denominator: m,
    })
}

/// Common denominator of two histograms when both declare one.
pub fn common_denominator(f0: &PeriodicCdf, f1: &PeriodicCdf) -> Option<u64> {
    rational_levels(f0, f1).map(|r| r.denominator)
}

/// Shifted target levels `F1(y_{J+t}) - theta`, `t = 0, 1, ...`.
enum TargetStream<'a> {
    Float {
        cumulative: &'a [f64],
        start: usize,
        shift: f64,
    },
    Exact {
        numerators: &'a [u64],
        scale: u64,
        denominator: u64,
        start: usize,
        shift: u64,
    },
}

impl TargetStream<'_> {
    fn level(&self, t: usize) -> f64 {
        match *self {
            TargetStream::Float {
                cumulative,
                start,
                shift,
            } => {
                let n = cumulative.len();
                let idx = start + t;
                (cumulative[idx % n] - shift) + (idx / n) as f64
            }
            TargetStream::Exact {
                numerators,
                scale,
                denominator,
                start,
                shift,
            } => {
                let n = numerators.len();
                let idx = start + t;
                let num = numerators[idx % n] * scale + (idx / n) as u64 * denominator - shift;
                num as f64 / denominator as f64
            }
        }
    }
}

/// Merges the `n0` source levels with the `n1` shifted target levels.
///
/// Exactly `n0 + n1 - 1` comparisons are made: the two streams are continued
/// periodically past the end of the period, so both heads are always defined
/// and only the last level is placed without a comparison. Levels within the
/// tie tolerance are identified, with the source level placed first.
pub fn build_profile(f0: &PeriodicCdf, f1: &PeriodicCdf, theta: f64) -> MergedProfile {
    let n0 = f0.len();
    let n1 = f1.len();
    let h0 = f0.histogram();
    let h1 = f1.histogram();
    let (mut periods, mut frac) = split_period(theta);
    let mut tolerance = TIE_TOLERANCE * theta.abs().max(1.0);

    let mut stream = None;
    if let Some(rat) = rational_levels(f0, f1) {
        let m = rat.denominator;
        let k = (frac * m as f64).round();
        if (frac - k / m as f64).abs() <= tolerance {
            let mut k = k as u64;
            if k == m {
                k = 0;
                periods += 1;
                frac = 0.0;
            }
            let start = rat.target.partition_point(|&b| b * rat.target_scale <= k);
            tolerance = tolerance.min(0.25 / m as f64);
            stream = Some((
                TargetStream::Exact {
                    numerators: rat.target,
                    scale: rat.target_scale,
                    denominator: m,
                    start,
                    shift: k,
                },
                start,
                Some((rat.source, rat.source_scale, m)),
            ));
        }
    }
    let (targets, start, exact_source) = stream.unwrap_or_else(|| {
        let start = f1.cumulative().partition_point(|&b| b <= frac);
        (
            TargetStream::Float {
                cumulative: f1.cumulative(),
                start,
                shift: frac,
            },
            start,
            None,
        )
    });

    let source_level = |s: i64| -> f64 {
        match exact_source {
            Some((nums, scale, m)) => {
                let n = n0 as i64;
                let q = s.div_euclid(n);
                let i = s.rem_euclid(n) as usize;
                (nums[i] * scale) as f64 / m as f64 + q as f64
            }
            None => f0.lifted_level(s),
        }
    };
    let source_atom = |s: i64| -> (LiftedAtom, f64) {
        let n = n0 as i64;
        let atom = LiftedAtom {
            index: s.rem_euclid(n) as usize,
            period: s.div_euclid(n),
        };
        (atom, h0.lifted_position(atom.index, atom.period))
    };
    let target_atom = |t: usize| -> (LiftedAtom, f64) {
        let idx = start + t;
        let atom = LiftedAtom {
            index: idx % n1,
            period: periods + (idx / n1) as i64,
        };
        (atom, h1.lifted_position(atom.index, atom.period))
    };

    let total = n0 + n1;
    let mut levels = Vec::with_capacity(total + 1);
    let mut segments = Vec::with_capacity(total);
    let mut pivots = Vec::with_capacity(n1);
    levels.push(0.0);

    let mut s: i64 = 0;
    let mut t: usize = 0;
    let mut comparisons = 0;
    let mut exceptional = false;
    let mut last = 0.0;
    let mut lower_gap = f64::INFINITY;
    let mut upper_gap = f64::INFINITY;

    for k in 0..total {
        let a = source_level(s);
        let w = targets.level(t);
        let take_source = if k + 1 == total {
            // Only one level remains; it is placed without comparing.
            (s as usize) < n0
        } else {
            comparisons += 1;
            a <= w + tolerance
        };

        let (src, src_pos) = source_atom(s);
        let (tgt, tgt_pos) = target_atom(t);
        let upper = if take_source {
            a.max(last)
        } else {
            let prev = source_level(s - 1);
            let tie = w - prev <= tolerance;
            let (below, above) = if tie { (s - 1, s) } else { (s, s) };
            exceptional |= tie;
            lower_gap = lower_gap.min(source_level(above) - w);
            upper_gap = upper_gap.min(w - source_level(below - 1));
            let (_, next_pos) = target_atom(t + 1);
            pivots.push(TargetPivot {
                level: w,
                target_position: tgt_pos,
                next_target_position: next_pos,
                source_below: source_atom(below).1,
                source_above: source_atom(above).1,
                source_below_stream: below,
                source_above_stream: above,
                tie,
            });
            if tie {
                prev.max(last)
            } else {
                w.max(last)
            }
        };
        segments.push(Segment {
            lower: last,
            upper,
            source: src,
            target: tgt,
            source_position: src_pos,
            target_position: tgt_pos,
        });
        levels.push(upper);
        last = upper;
        if take_source {
            s += 1;
        } else {
            t += 1;
        }
    }

    MergedProfile {
        theta,
        levels,
        segments,
        pivots,
        exceptional,
        comparisons,
        first_target: target_atom(0).0,
        tolerance,
        lower_gap,
        upper_gap,
    }
}

/// `C(theta) = sum_k c(x_(k), y_(k)) (v_(k) - v_(k-1))`.
pub fn avg_cost<C: PairCost + ?Sized>(profile: &MergedProfile, c: &C) -> f64 {
    profile
        .segments
        .iter()
        .filter(|s| s.width() > 0.0)
        .map(|s| c.cost(s.source_position, s.target_position) * s.width())
        .sum()
}

/// `(C'(theta - 0), C'(theta + 0))` from the pivots of a profile.
///
/// Each target level contributes `c(x, y_{j+1}) - c(x, y_j)` with
/// `x = F0^{-1}(level)` on the left and `x = F0^{-1}(level - 0)` on the right.
pub fn derivatives<C: PairCost + ?Sized>(profile: &MergedProfile, c: &C) -> (f64, f64) {
    let mut left = 0.0;
    let mut right = 0.0;
    for p in &profile.pivots {
        let dl = c.cost(p.source_above, p.next_target_position) - c.cost(p.source_above, p.target_position);
        let dr = if p.source_below_stream == p.source_above_stream {
            dl
        } else {
            c.cost(p.source_below, p.next_target_position) - c.cost(p.source_below, p.target_position)
        };
        left += dl;
        right += dr;
    }
    (left, right)
}

/// Value and both one-sided derivatives of `C` at `theta`.
pub fn avg_cost_derivatives<C: PairCost + ?Sized>(
    f0: &PeriodicCdf,
    f1: &PeriodicCdf,
    c: &C,
    theta: f64,
) -> AvgCostEval {
    let profile = build_profile(f0, f1, theta);
    let value = avg_cost(&profile, c);
    let (left_derivative, right_derivative) = derivatives(&profile, c);
    AvgCostEval {
        theta,
        value,
        left_derivative,
        right_derivative,
        exceptional: profile.exceptional,
    }
}

/// `C(theta)` alone.
pub fn avg_cost_at<C: PairCost + ?Sized>(f0: &PeriodicCdf, f1: &PeriodicCdf, c: &C, theta: f64) -> f64 {
    avg_cost(&build_profile(f0, f1, theta), c)
}
