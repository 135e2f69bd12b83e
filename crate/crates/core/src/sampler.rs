//! Monte Carlo measurement trajectories and tracking of the relative phase.
//!
//! Trajectories are drawn one detection at a time from the state-collapse
//! chain of [`crate::fock`]. Randomness comes from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`; trajectory `i` of a batch uses seed
//! `seed + i`.
//!
//! The phase estimate is the maximum-likelihood `λ` under the cosine law
//! `P(η | φ, λ) = ½(1 + η cos(λ − φ))`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{wrap_angle, ExperimentConfig, MeasurementRecord, MeasurementSequence, Outcome, ANGLE_TOLERANCE};
use crate::error::{Error, Result};
use crate::fock::{detect, initial_state};
use crate::optimize::golden_section_maximize;

/// Number of λ grid points scanned before golden-section refinement.
pub const PHASE_GRID: usize = 4096;
/// Width of the final golden-section bracket.
pub const PHASE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: ExperimentConfig,
    pub records: MeasurementSequence,
    pub seed: u64,
}

/// Draws one outcome per angle, in order.
pub fn sample_trajectory(config: ExperimentConfig, angles: &[f64], seed: u64) -> Result<Trajectory> {
    config.check_measurements(angles.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = initial_state(config);
    let mut records = MeasurementSequence::empty();
    for &angle in angles {
        let (p_up, up) = detect(&state, angle, Outcome::Up)?;
        let u: f64 = rng.random();
        let outcome = if u < p_up { Outcome::Up } else { Outcome::Down };
        state = match outcome {
            Outcome::Up => up,
            Outcome::Down => detect(&state, angle, Outcome::Down)?.1,
        };
        records.push(MeasurementRecord::new(angle, outcome)?);
    }
    Ok(Trajectory {
        config,
        records,
        seed,
    })
}

/// `count` independent trajectories; trajectory `i` uses seed `seed + i`.
pub fn sample_batch(config: ExperimentConfig, angles: &[f64], count: usize, seed: u64) -> Result<Vec<Trajectory>> {
    config.check_measurements(angles.len())?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_trajectory(config, angles, seed.wrapping_add(i)))
        .collect()
}

/// Exact probability that the next detection along `angle` gives `+1`
/// after the results in `prefix`.
pub fn conditional_up_probability(config: ExperimentConfig, prefix: &MeasurementSequence, angle: f64) -> Result<f64> {
    config.check_measurements(prefix.len() + 1)?;
    let mut state = initial_state(config);
    for r in prefix.records() {
        state = detect(&state, r.angle, r.outcome)?.1;
    }
    Ok(detect(&state, angle, Outcome::Up)?.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseEstimate {
    pub lambda_hat: f64,
    pub log_likelihood: f64,
    /// Mean of `η_j cos(λ̂ − φ_j)` over the records.
    pub concentration: f64,
    /// Mean resultant length of the normalized likelihood over λ: 0 for a
    /// flat likelihood, 1 for a sharply determined phase.
    pub posterior_concentration: f64,
    /// All angles share one axis, so the data cannot fix both quadratures.
    pub degenerate: bool,
}

impl PhaseEstimate {
    /// Cosine-law probability of `+1` along `angle` at the estimated phase.
    pub fn predicted_up_probability(&self, angle: f64) -> f64 {
        0.5 * (1.0 + (self.lambda_hat - angle).cos())
    }
}

fn record_log_likelihood(lambda: f64, record: &MeasurementRecord) -> f64 {
    let p = 0.5 * (1.0 + record.outcome.sign() * (lambda - record.angle).cos());
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

/// Incrementally accumulated log-likelihood on a fixed λ grid.
#[derive(Debug, Clone)]
pub struct PhaseTracker {
    grid: Vec<f64>,
    log_likelihood: Vec<f64>,
    records: MeasurementSequence,
}

impl Default for PhaseTracker {
    fn default() -> Self {
        Self::new()
    }
}

impl PhaseTracker {
    pub fn new() -> Self {
        let step = 2.0 * PI / PHASE_GRID as f64;
        Self {
            grid: (0..PHASE_GRID).map(|i| -PI + step * (i + 1) as f64).collect(),
            log_likelihood: vec![0.0; PHASE_GRID],
            records: MeasurementSequence::empty(),
        }
    }

    pub fn push(&mut self, record: MeasurementRecord) {
        for (ll, &l) in self.log_likelihood.iter_mut().zip(&self.grid) {
            *ll += record_log_likelihood(l, &record);
        }
        self.records.push(record);
    }

    pub fn records(&self) -> &MeasurementSequence {
        &self.records
    }

    fn total_log_likelihood(&self, lambda: f64) -> f64 {
        self.records
            .records()
            .iter()
            .map(|r| record_log_likelihood(lambda, r))
            .sum()
    }

    pub fn estimate(&self) -> Result<PhaseEstimate> {
        let records = self.records.records();
        if records.is_empty() {
            return Err(Error::NoRecords);
        }
        let (best, peak) = self
            .log_likelihood
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let h = 2.0 * PI / PHASE_GRID as f64;
        let centre = self.grid[best];
        let (lambda, ll) = golden_section_maximize(|l| self.total_log_likelihood(l), centre - h, centre + h, PHASE_TOLERANCE);
        let lambda_hat = wrap_angle(lambda);

        let concentration = records
            .iter()
            .map(|r| r.outcome.sign() * (lambda_hat - r.angle).cos())
            .sum::<f64>()
            / records.len() as f64;

        let (mut w_sum, mut re, mut im) = (0.0, 0.0, 0.0);
        for (&l, &v) in self.grid.iter().zip(&self.log_likelihood) {
            let w = (v - peak).exp();
            w_sum += w;
            re += w * l.cos();
            im += w * l.sin();
        }
        let posterior_concentration = (re * re + im * im).sqrt() / w_sum;

        let first = records[0].angle;
        let degenerate = records.iter().all(|r| {
            let d = r.angle - first;
            (d - PI * (d / PI).round()).abs() <= ANGLE_TOLERANCE
        });

        Ok(PhaseEstimate {
            lambda_hat,
            log_likelihood: ll,
            concentration,
            posterior_concentration,
            degenerate,
        })
    }
}

/// Maximum-likelihood relative phase for a set of records.
pub fn estimate_phase(records: &MeasurementSequence) -> Result<PhaseEstimate> {
    let mut tracker = PhaseTracker::new();
    for &r in records.records() {
        tracker.push(r);
    }
    tracker.estimate()
}

/// Angle of the j-th measurement (0-based) in emergence studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AnglePolicy {
    /// Repeats the listed angles in order.
    Cycle(Vec<f64>),
}

impl Default for AnglePolicy {
    fn default() -> Self {
        Self::Cycle(vec![0.0, FRAC_PI_2])
    }
}

impl AnglePolicy {
    pub fn angle(&self, index: usize) -> f64 {
        match self {
            Self::Cycle(list) => list[index % list.len()],
        }
    }

    pub fn angles(&self, count: usize) -> Vec<f64> {
        (0..count).map(|j| self.angle(j)).collect()
    }
}

/// One row of a trajectory table: the record and the running phase estimate
/// after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub trajectory_id: usize,
    pub step: usize,
    pub angle: f64,
    pub outcome: Outcome,
    pub lambda_hat: f64,
    pub concentration: f64,
    pub posterior_concentration: f64,
}

pub fn trajectory_steps(trajectory_id: usize, trajectory: &Trajectory) -> Result<Vec<TrajectoryStep>> {
    let mut tracker = PhaseTracker::new();
    trajectory
        .records
        .records()
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            tracker.push(r);
            let est = tracker.estimate()?;
            Ok(TrajectoryStep {
                trajectory_id,
                step: j + 1,
                angle: r.angle,
                outcome: r.outcome,
                lambda_hat: est.lambda_hat,
                concentration: est.concentration,
                posterior_concentration: est.posterior_concentration,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmergencePoint {
    pub step: usize,
    pub mean_concentration: f64,
    pub mean_posterior_concentration: f64,
    /// Standard error of `mean_posterior_concentration`.
    pub posterior_std_error: f64,
}

/// Mean phase concentration after each of `steps` measurements, averaged
/// over `n_trajectories` seeded trajectories.
pub fn phase_emergence_curve(
    config: ExperimentConfig,
    policy: &AnglePolicy,
    steps: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<Vec<EmergencePoint>> {
    if config.total() < 4 {
        return Err(Error::InvalidArgument(format!(
            "emergence curves need N >= 4, got {}",
            config.total()
        )));
    }
    if n_trajectories == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    let angles = policy.angles(steps);
    let per_trajectory: Vec<Vec<TrajectoryStep>> = (0..n_trajectories)
        .into_par_iter()
        .map(|i| {
            let t = sample_trajectory(config, &angles, seed.wrapping_add(i as u64))?;
            trajectory_steps(i, &t)
        })
        .collect::<Result<_>>()?;

    let count = n_trajectories as f64;
    Ok((0..steps)
        .map(|j| {
            let mut conc = 0.0;
            let mut post = 0.0;
            let mut post_sq = 0.0;
            for rows in &per_trajectory {
                conc += rows[j].concentration;
                post += rows[j].posterior_concentration;
                post_sq += rows[j].posterior_concentration.powi(2);
            }
            let mean_post = post / count;
            let var = (post_sq / count - mean_post * mean_post).max(0.0);
            EmergencePoint {
                step: j + 1,
                mean_concentration: conc / count,
                mean_posterior_concentration: mean_post,
                posterior_std_error: (var / count).sqrt(),
            }
        })
        .collect())
}
