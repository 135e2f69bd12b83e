//! Brute-force operator algebra on the two-mode Fock space.
//!
//! Detecting one particle with transverse result `η` along `φ` applies the
//! jump operator `b = (a₊ + η e^{iφ} a₋)/√2` to the state. Summed over `η`,
//! `b†b` is the number operator, so each step's conditional probability is
//! `‖bψ‖² / (n ‖ψ‖²)`.

use num_complex::Complex64;
use crate::config::{ExperimentConfig, MeasurementSequence, Outcome};
use crate::error::{Error, Result};

/// State with a fixed particle number `total`; `amplitudes[k]` is the
/// amplitude of `|n₊ = k, n₋ = total − k⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    total: usize,
    amplitudes: Vec<Complex64>,
}

impl FockVector {
    pub fn total(&self) -> usize {
        self.total
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rescales to unit norm. A zero vector is left untouched.
    pub fn normalized(mut self) -> Self {
        let norm = self.norm_sqr().sqrt();
        if norm > 0.0 {
            for a in &mut self.amplitudes {
                *a /= norm;
            }
        }
        self
    }
}

/// The double Fock state `|N₊, N₋⟩`.
pub fn initial_state(config: ExperimentConfig) -> FockVector {
    let total = config.total();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); total + 1];
    amplitudes[config.n_plus] = Complex64::new(1.0, 0.0);
    FockVector { total, amplitudes }
}

/// Unnormalized post-detection state `b|ψ⟩` with `total − 1` particles.
pub fn apply_detection(state: &FockVector, angle: f64, outcome: Outcome) -> Result<FockVector> {
    if state.total == 0 {
        return Err(Error::EmptyState);
    }
    let total = state.total;
    let phase = Complex64::from_polar(outcome.sign(), angle);
    let mut out = vec![Complex64::new(0.0, 0.0); total];
    for (k, &amp) in state.amplitudes.iter().enumerate() {
        if k > 0 {
            out[k - 1] += amp * (k as f64).sqrt();
        }
        let n_minus = total - k;
        if n_minus > 0 {
            out[k] += phase * amp * (n_minus as f64).sqrt();
        }
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for a in &mut out {
        *a *= scale;
    }
    Ok(FockVector {
        total: total - 1,
        amplitudes: out,
    })
}

/// Conditional probability of `outcome` at `angle` given the (normalized or
/// not) state, and the collapsed unit-norm state.
pub fn detect(state: &FockVector, angle: f64, outcome: Outcome) -> Result<(f64, FockVector)> {
    let norm = state.norm_sqr();
    let next = apply_detection(state, angle, outcome)?;
    let probability = if norm > 0.0 {
        next.norm_sqr() / (state.total as f64 * norm)
    } else {
        0.0
    };
    Ok((probability, next.normalized()))
}

/// Sequence probability as a chain of conditional detection probabilities.
pub fn oracle_sequence_probability(
    config: ExperimentConfig,
    seq: &MeasurementSequence,
) -> Result<f64> {
    config.check_measurements(seq.len())?;
    let mut state = initial_state(config);
    let mut probability = 1.0;
    for record in seq.records() {
        let (p, next) = detect(&state, record.angle, record.outcome)?;
        probability *= p;
        if probability == 0.0 {
            return Ok(0.0);
        }
        state = next;
    }
    Ok(probability)
}

/// Mean transverse spin per particle along `angle`,
/// `(‖b₊ψ‖² − ‖b₋ψ‖²) / (n ‖ψ‖²)`. Lies in [−1, 1].
pub fn transverse_spin_expectation(state: &FockVector, angle: f64) -> Result<f64> {
    let up = apply_detection(state, angle, Outcome::Up)?.norm_sqr();
    let down = apply_detection(state, angle, Outcome::Down)?.norm_sqr();
    Ok((up - down) / (state.total as f64 * state.norm_sqr()))
}
