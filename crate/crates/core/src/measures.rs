//! Discrete measures on the circle and their lifted distribution functions.
//!
//! A [`CircularHistogram`] holds one period of a periodic atomic measure on the
//! real line: atoms at positions `0 < x_1 < ... < x_n <= 1`, repeated with
//! period one. Its [`PeriodicCdf`] is the distribution function
//! `F(x) = mu((0, x])`, extended by `F(x + 1) = F(x) + 1`, together with the
//! right-continuous inverse `F^{-1}(v) = inf { x : v < F(x) }`.

use thiserror::Error;

/// Tolerance on the total mass of a histogram given in floating point.
pub const MASS_SUM_TOLERANCE: f64 = 1e-12;

/// Allowed distance of `mass * M` from an integer when a denominator is declared.
const NUMERATOR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("histogram has no atoms")]
    EmptyHistogram,
    #[error("{positions} positions but {masses} masses")]
    LengthMismatch { positions: usize, masses: usize },
    #[error("atom {index} has non-positive mass {mass}")]
    NonPositiveMass { index: usize, mass: f64 },
    #[error("atom {index} has non-finite position or mass")]
    NonFinite { index: usize },
    #[error("masses sum to {sum}, expected 1")]
    MassSumMismatch { sum: f64 },
    #[error("mass {mass} of atom {index} is not a multiple of 1/{denominator}")]
    NotAMultiple { index: usize, mass: f64, denominator: u64 },
    #[error("mass denominator must be positive")]
    ZeroDenominator,
}

/// Reduces a real number into the half-open period `(0, 1]`.
pub fn reduce_to_period(x: f64) -> f64 {
    let r = x - x.floor();
    if r <= 0.0 {
        1.0
    } else if r > 1.0 {
        // x.floor() can round for huge |x|; keep the contract anyway.
        r - 1.0
    } else {
        r
    }
}

/// Splits `x` into `(k, r)` with `x = k + r`, `k` integer and `0 <= r < 1`.
pub(crate) fn split_period(x: f64) -> (i64, f64) {
    let k = x.floor();
    let mut r = x - k;
    let mut k = k as i64;
    if r >= 1.0 {
        r = 0.0;
        k += 1;
    }
    (k, r)
}

/// One period of a discrete positive unit-mass measure on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct CircularHistogram {
    positions: Vec<f64>,
    masses: Vec<f64>,
    denominator: Option<u64>,
    numerators: Option<Vec<u64>>,
}

impl CircularHistogram {
    /// Validates and canonicalises a histogram.
    ///
    /// Positions are reduced into `(0, 1]` and sorted together with their
    /// masses; atoms landing on the same reduced position are merged. When
    /// `mass_denominator` is `Some(M)`, every mass must be an integer multiple
    /// of `1/M` and the integer numerators must add up to exactly `M`.
    pub fn new(
        positions: &[f64],
        masses: &[f64],
        mass_denominator: Option<u64>,
    ) -> Result<Self, MeasureError> {
        if positions.len() != masses.len() {
            return Err(MeasureError::LengthMismatch {
                positions: positions.len(),
                masses: masses.len(),
            });
        }
        if positions.is_empty() {
            return Err(MeasureError::EmptyHistogram);
        }
        if mass_denominator == Some(0) {
            return Err(MeasureError::ZeroDenominator);
        }
        for (index, (&p, &m)) in positions.iter().zip(masses).enumerate() {
            if !p.is_finite() || !m.is_finite() {
                return Err(MeasureError::NonFinite { index });
            }
            if m <= 0.0 {
                return Err(MeasureError::NonPositiveMass { index, mass: m });
            }
        }

        let mut atoms: Vec<(f64, f64, u64)> = Vec::with_capacity(positions.len());
        for (index, (&p, &m)) in positions.iter().zip(masses).enumerate() {
            let numerator = match mass_denominator {
                Some(den) => {
                    let scaled = m * den as f64;
                    let rounded = scaled.round();
                    if (scaled - rounded).abs() > NUMERATOR_TOLERANCE || rounded < 1.0 {
                        return Err(MeasureError::NotAMultiple {
                            index,
                            mass: m,
                            denominator: den,
                        });
                    }
                    rounded as u64
                }
                None => 0,
            };
            atoms.push((reduce_to_period(p), m, numerator));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut merged: Vec<(f64, f64, u64)> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.0 == atom.0 => {
                    last.1 += atom.1;
                    last.2 += atom.2;
                }
                _ => merged.push(atom),
            }
        }

        let numerators = match mass_denominator {
            Some(den) => {
                let total: u64 = merged.iter().map(|a| a.2).sum();
                if total != den {
                    return Err(MeasureError::MassSumMismatch {
                        sum: total as f64 / den as f64,
                    });
                }
                Some(merged.iter().map(|a| a.2).collect::<Vec<_>>())
            }
            None => {
                let sum: f64 = merged.iter().map(|a| a.1).sum();
                if (sum - 1.0).abs() > MASS_SUM_TOLERANCE {
                    return Err(MeasureError::MassSumMismatch { sum });
                }
                None
            }
        };

        Ok(Self {
            positions: merged.iter().map(|a| a.0).collect(),
            masses: merged.iter().map(|a| a.1).collect(),
            denominator: mass_denominator,
            numerators,
        })
    }

    /// Builds a rational histogram from integer numerators over `denominator`.
    pub fn from_numerators(
        positions: &[f64],
        numerators: &[u64],
        denominator: u64,
    ) -> Result<Self, MeasureError> {
        if denominator == 0 {
            return Err(MeasureError::ZeroDenominator);
        }
        let masses: Vec<f64> = numerators
            .iter()
            .map(|&k| k as f64 / denominator as f64)
            .collect();
        Self::new(positions, &masses, Some(denominator))
    }

    /// A single atom of unit mass.
    pub fn dirac(position: f64) -> Result<Self, MeasureError> {
        Self::new(&[position], &[1.0], Some(1))
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// The declared common denominator of all masses, if any.
    pub fn denominator(&self) -> Option<u64> {
        self.denominator
    }

    /// Integer mass numerators over [`Self::denominator`].
    pub fn numerators(&self) -> Option<&[u64]> {
        self.numerators.as_deref()
    }

    /// Lifted position of atom `index` shifted by `period` whole turns.
    pub fn lifted_position(&self, index: usize, period: i64) -> f64 {
        self.positions[index] + period as f64
    }

    pub fn cdf(&self) -> PeriodicCdf {
        PeriodicCdf::new(self.clone())
    }
}

/// `F(x)` split into whole periods and the cumulative mass within a period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfValue {
    pub periods: i64,
    pub fraction: f64,
}

impl CdfValue {
    pub fn value(self) -> f64 {
        self.periods as f64 + self.fraction
    }
}

/// Lifted periodic distribution function of a [`CircularHistogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicCdf {
    source: CircularHistogram,
    cumulative: Vec<f64>,
    cumulative_numerators: Option<Vec<u64>>,
}

impl PeriodicCdf {
    pub fn new(source: CircularHistogram) -> Self {
        let n = source.len();
        let mut cumulative = Vec::with_capacity(n);
        let mut cumulative_numerators = source.numerators.as_ref().map(|_| Vec::with_capacity(n));
        match (&source.numerators, source.denominator) {
            (Some(nums), Some(den)) => {
                let acc_nums = cumulative_numerators.as_mut().unwrap();
                let mut acc = 0u64;
                for &k in nums {
                    acc += k;
                    acc_nums.push(acc);
                    cumulative.push(acc as f64 / den as f64);
                }
            }
            _ => {
                let mut acc = 0.0;
                for &m in &source.masses {
                    acc += m;
                    cumulative.push(acc);
                }
            }
        }
        // The last level is 1 by definition; absorb the float residue there.
        cumulative[n - 1] = 1.0;
        Self {
            source,
            cumulative,
            cumulative_numerators,
        }
    }

    pub fn histogram(&self) -> &CircularHistogram {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    /// `cumulative[i] = m_1 + ... + m_{i+1}`; the last entry is exactly 1.
    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn cumulative_numerators(&self) -> Option<&[u64]> {
        self.cumulative_numerators.as_deref()
    }

    /// Level `F(x_s)` of the `s`-th atom of the lifted sequence, where
    /// `s = 0` is the first atom in `(0, 1]` and negative `s` walk backwards.
    pub(crate) fn lifted_level(&self, s: i64) -> f64 {
        let n = self.len() as i64;
        let q = s.div_euclid(n);
        let i = s.rem_euclid(n) as usize;
        self.cumulative[i] + q as f64
    }

    /// `F(x)` with the integer period count kept separate.
    pub fn eval_split(&self, x: f64) -> CdfValue {
        let (periods, r) = split_period(x);
        let count = self.source.positions.partition_point(|&p| p <= r);
        let fraction = if count == 0 {
            0.0
        } else {
            self.cumulative[count - 1]
        };
        CdfValue { periods, fraction }
    }

    /// Right-continuous distribution function `F(x) = mu((0, x])`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_split(x).value()
    }

    /// Lifted index `(atom, period)` of `F^{-1}(v)`.
    pub fn inverse_atom(&self, v: f64) -> (usize, i64) {
        let (periods, r) = split_period(v);
        // The last cumulative level is 1 > r, so this is always in range.
        let index = self.cumulative.partition_point(|&c| c <= r);
        (index, periods)
    }

    /// Right-continuous inverse `F^{-1}(v) = inf { x : v < F(x) }`.
    pub fn inverse(&self, v: f64) -> f64 {
        let (index, periods) = self.inverse_atom(v);
        self.source.lifted_position(index, periods)
    }
}

/// Free-function form of [`CircularHistogram::new`].
pub fn histogram_new(
    positions: &[f64],
    masses: &[f64],
    mass_denominator: Option<u64>,
) -> Result<CircularHistogram, MeasureError> {
    CircularHistogram::new(positions, masses, mass_denominator)
}

pub fn cdf_eval(cdf: &PeriodicCdf, x: f64) -> f64 {
    cdf.eval(x)
}

pub fn cdf_inverse(cdf: &PeriodicCdf, v: f64) -> f64 {
    cdf.inverse(v)
}
