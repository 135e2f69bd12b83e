//! Experiment configuration and measurement records.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance used when comparing canonical angles.
pub const ANGLE_TOLERANCE: f64 = 1e-12;

/// Wraps an angle in radians into the half-open interval (−π, π].
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

/// Two condensates sharing one orbital: `n_plus` bosons with spin up along
/// Oz and `n_minus` with spin down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_plus: usize,
    pub n_minus: usize,
}

impl ExperimentConfig {
    pub const fn new(n_plus: usize, n_minus: usize) -> Self {
        Self { n_plus, n_minus }
    }

    /// Equal populations `N/2, N/2`. `total` must be even.
    pub fn balanced(total: usize) -> Result<Self> {
        if !total.is_multiple_of(2) {
            return Err(Error::OddTotal(total));
        }
        Ok(Self::new(total / 2, total / 2))
    }

    pub const fn total(&self) -> usize {
        self.n_plus + self.n_minus
    }

    /// Population imbalance `n_plus − n_minus`.
    pub fn imbalance(&self) -> i64 {
        self.n_plus as i64 - self.n_minus as i64
    }

    pub const fn is_balanced(&self) -> bool {
        self.n_plus == self.n_minus
    }

    pub const fn swapped(&self) -> Self {
        Self::new(self.n_minus, self.n_plus)
    }

    pub(crate) fn check_measurements(&self, measurements: usize) -> Result<()> {
        if measurements > self.total() {
            return Err(Error::TooManyMeasurements {
                measurements,
                particles: self.total(),
            });
        }
        Ok(())
    }
}

/// Result of one transverse spin measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Outcome {
    Up,
    Down,
}

impl Outcome {
    pub const fn sign(self) -> f64 {
        match self {
            Outcome::Up => 1.0,
            Outcome::Down => -1.0,
        }
    }

    pub const fn flipped(self) -> Self {
        match self {
            Outcome::Up => Outcome::Down,
            Outcome::Down => Outcome::Up,
        }
    }

    pub const BOTH: [Outcome; 2] = [Outcome::Up, Outcome::Down];
}

impl TryFrom<i64> for Outcome {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        match value {
            1 => Ok(Outcome::Up),
            -1 => Ok(Outcome::Down),
            other => Err(Error::InvalidOutcome(other)),
        }
    }
}

impl From<Outcome> for i64 {
    fn from(value: Outcome) -> Self {
        match value {
            Outcome::Up => 1,
            Outcome::Down => -1,
        }
    }
}

/// One transverse measurement: the angle of the measured spin component in
/// the xOy plane and the ±1 result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub angle: f64,
    pub outcome: Outcome,
}

impl MeasurementRecord {
    /// Builds a record, wrapping the angle to (−π, π].
    pub fn new(angle: f64, outcome: Outcome) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::NonFiniteAngle(angle));
        }
        Ok(Self {
            angle: wrap_angle(angle),
            outcome,
        })
    }

    /// Builds a record from a raw integer outcome, rejecting anything but ±1.
    pub fn from_raw(angle: f64, outcome: i64) -> Result<Self> {
        Self::new(angle, Outcome::try_from(outcome)?)
    }
}

/// Ordered list of measurement records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSequence {
    records: Vec<MeasurementRecord>,
}

impl MeasurementSequence {
    pub fn new(records: Vec<MeasurementRecord>) -> Self {
        Self { records }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Zips angles with raw ±1 outcomes.
    pub fn from_pairs(angles: &[f64], outcomes: &[i64]) -> Result<Self> {
        if angles.len() != outcomes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} angles but {} outcomes",
                angles.len(),
                outcomes.len()
            )));
        }
        angles
            .iter()
            .zip(outcomes)
            .map(|(&a, &o)| MeasurementRecord::from_raw(a, o))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    /// Pairs each angle with the matching outcome.
    pub fn from_outcomes(angles: &[f64], outcomes: &[Outcome]) -> Result<Self> {
        if angles.len() != outcomes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} angles but {} outcomes",
                angles.len(),
                outcomes.len()
            )));
        }
        angles
            .iter()
            .zip(outcomes)
            .map(|(&a, &o)| MeasurementRecord::new(a, o))
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn records(&self) -> &[MeasurementRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, record: MeasurementRecord) {
        self.records.push(record);
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self::new(self.records[..len.min(self.records.len())].to_vec())
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.angle)
    }
}

impl FromIterator<MeasurementRecord> for MeasurementSequence {
    fn from_iter<I: IntoIterator<Item = MeasurementRecord>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Enumerates all `2^len` outcome vectors in lexicographic order, `Up` first.
pub fn all_outcomes(len: usize) -> impl Iterator<Item = Vec<Outcome>> {
    (0u64..(1u64 << len)).map(move |bits| {
        (0..len)
            .map(|j| {
                if bits >> (len - 1 - j) & 1 == 0 {
                    Outcome::Up
                } else {
                    Outcome::Down
                }
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.25 + 4.0 * PI) - 0.25).abs() < 1e-12);
        assert!((wrap_angle(-0.5) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_outcomes() {
        assert_eq!(
            MeasurementRecord::from_raw(0.0, 0),
            Err(Error::InvalidOutcome(0))
        );
        assert_eq!(
            MeasurementRecord::from_raw(0.0, 2),
            Err(Error::InvalidOutcome(2))
        );
        assert!(MeasurementRecord::from_raw(f64::NAN, 1).is_err());
    }

    #[test]
    fn outcome_enumeration_covers_all() {
        let all: Vec<_> = all_outcomes(3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0], vec![Outcome::Up; 3]);
        assert_eq!(all[7], vec![Outcome::Down; 3]);
        assert_eq!(all_outcomes(0).count(), 1);
    }

    #[test]
    fn config_derived_quantities() {
        let c = ExperimentConfig::new(3, 1);
        assert_eq!(c.total(), 4);
        assert_eq!(c.imbalance(), 2);
        assert_eq!(c.swapped().imbalance(), -2);
        assert!(ExperimentConfig::balanced(5).is_err());
    }
}
