//! JSON output. Every real number is written with 17 significant digits so
//! that it parses back to the same `f64`.

use serde::ser::{Error as _, Serializer};
use serde::Serialize;
use serde_json::value::RawValue;

/// An `f64` serialised in round-trip-safe scientific notation; non-finite
/// values become `null`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return serializer.serialize_none();
        }
        let raw = RawValue::from_string(format!("{:.16e}", self.0)).map_err(S::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Real(v)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AssignmentRow {
    pub source_index: usize,
    pub source_position: Real,
    pub target_index: usize,
    pub target_position_lifted: Real,
    pub target_position_circle: Real,
    pub mass: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurveRow {
    pub theta: Real,
    pub cost: Real,
    pub left_derivative: Real,
    pub right_derivative: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct Curve {
    pub range: [Real; 2],
    pub rows: Vec<CurveRow>,
    /// Exceptional shifts within the range; absent when the instance is too
    /// large to enumerate them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub breakpoints: Option<Vec<Real>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub theta_star: Real,
    pub cost: Real,
    pub candidates_evaluated: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckSummary {
    pub agree: bool,
    pub tolerance: Real,
    pub breakpoints: Option<OracleRow>,
    pub rotations: Option<OracleRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub epsilon: Real,
    pub repeats: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_time_ms: Option<Real>,
    pub mean_iterations: Real,
    pub mean_cost_evaluations: Real,
    pub mean_cost: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendFit {
    /// `"n"` or `"log10_inv_epsilon"`.
    pub against: String,
    /// The value held fixed: epsilon for size sweeps, n for precision sweeps.
    pub fixed: Real,
    pub slope: Real,
    pub intercept: Real,
    pub r_squared: Real,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<TrendFit>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_star: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mk_distance: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_used: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_evaluations: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flat_interval: Option<[Real; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignments: Option<Vec<AssignmentRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<Curve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSummary>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorReport {
    pub error: String,
    pub detail: String,
}
