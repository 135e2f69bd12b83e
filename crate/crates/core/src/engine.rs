//! Exact evaluation of sequence probabilities and correlations.
//!
//! Both quantities are double integrals over a relative phase `λ` and an
//! auxiliary variable `Λ`. The integrands are trigonometric polynomials, so
//! equispaced periodic quadrature with enough nodes gives the exact value up
//! to roundoff.
//!
//! ```text
//! P(η₁…η_M) = 1/(2^M C_N) ∫dΛ/2π cos(DΛ) cos^{N−M}Λ ∫dλ/2π Π_j [cos Λ + η_j cos(λ − φ_j)]
//! E(φ₁…φ_M) = 1/C_N       ∫dΛ/2π cos(DΛ) cos^{N−M}Λ ∫dλ/2π Π_j cos(λ − φ_j)
//! C_N       =             ∫dΛ/2π cos(DΛ) cos^N Λ
//! ```

use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MeasurementSequence};
use crate::error::Result;
use crate::quadrature::{node_count, periodic_mean, periodic_nodes, CompensatedSum};

/// `binomial(n, k) / 2^n`, computed as a scaled running product.
pub(crate) fn binomial_over_power_of_two(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut ratio = 1.0f64;
    let mut halves = n as i32;
    for i in 1..=k {
        ratio *= (n - k + i) as f64 / i as f64;
        while ratio > 1.0 && halves > 0 {
            ratio *= 0.5;
            halves -= 1;
        }
    }
    ratio * 0.5f64.powi(halves)
}

/// Normalization coefficient `C_N = 2^{−N} binomial(N, N₋)`.
pub fn normalization_constant(config: ExperimentConfig) -> f64 {
    binomial_over_power_of_two(config.total(), config.n_minus)
}

/// `C_N` by direct periodic quadrature of `cos(DΛ) cos^N Λ`.
pub fn normalization_constant_quadrature(config: ExperimentConfig) -> f64 {
    let n = config.total();
    let d = config.imbalance() as f64;
    periodic_mean(node_count(n), |x| (d * x).cos() * x.cos().powi(n as i32))
}

/// Probability of an ordered sequence of measurement results.
pub fn sequence_probability(config: ExperimentConfig, seq: &MeasurementSequence) -> Result<f64> {
    sequence_probability_with_nodes(config, seq, node_count(config.total()))
}

/// [`sequence_probability`] with an explicit node count per integration
/// variable. Exact whenever `nodes > 2N`.
pub fn sequence_probability_with_nodes(
    config: ExperimentConfig,
    seq: &MeasurementSequence,
    nodes: usize,
) -> Result<f64> {
    let n = config.total();
    let m = seq.len();
    config.check_measurements(m)?;
    if m == 0 {
        return Ok(1.0);
    }

    let grid = periodic_nodes(nodes);
    // signed[j][s] = η_j cos(λ_s − φ_j)
    let signed: Vec<Vec<f64>> = seq
        .records()
        .iter()
        .map(|r| {
            let eta = r.outcome.sign();
            grid.iter().map(|&l| eta * (l - r.angle).cos()).collect()
        })
        .collect();

    let d = config.imbalance() as f64;
    let spare = (n - m) as i32;
    let mut outer = CompensatedSum::new();
    for &big in &grid {
        let c = big.cos();
        let weight = (d * big).cos() * c.powi(spare);
        if weight == 0.0 {
            continue;
        }
        let mut inner = CompensatedSum::new();
        for s in 0..nodes {
            let product: f64 = signed.iter().map(|row| c + row[s]).product();
            inner.add(product);
        }
        outer.add(weight * inner.value());
    }
    let integral = outer.value() / (nodes * nodes) as f64;
    Ok(integral / (2f64.powi(m as i32) * normalization_constant(config)))
}

/// Angles of an `M`-fold correlation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationQuery {
    pub config: ExperimentConfig,
    pub angles: Vec<f64>,
}

impl CorrelationQuery {
    pub fn new(config: ExperimentConfig, angles: Vec<f64>) -> Self {
        Self { config, angles }
    }
}

/// Quantum average of the product of all `M` results.
pub fn correlation(query: &CorrelationQuery) -> Result<f64> {
    correlation_of(query.config, &query.angles)
}

/// [`correlation`] without building a query.
pub fn correlation_of(config: ExperimentConfig, angles: &[f64]) -> Result<f64> {
    config.check_measurements(angles.len())?;
    let nodes = node_count(config.total());
    Ok(auxiliary_weight(config, angles.len(), nodes) * phase_average(angles, nodes))
}

/// `∫dΛ/2π cos(DΛ) cos^{N−M}Λ / C_N`: the factor by which unmeasured
/// particles and population imbalance scale the classical phase average.
pub(crate) fn auxiliary_weight(config: ExperimentConfig, measurements: usize, nodes: usize) -> f64 {
    let d = config.imbalance() as f64;
    let spare = (config.total() - measurements) as i32;
    let integral = periodic_mean(nodes, |x| (d * x).cos() * x.cos().powi(spare));
    integral / normalization_constant(config)
}

/// `∫dλ/2π Π_j cos(λ − φ_j)`.
pub(crate) fn phase_average(angles: &[f64], nodes: usize) -> f64 {
    if angles.is_empty() {
        return 1.0;
    }
    periodic_mean(nodes, |l| angles.iter().map(|&a| (l - a).cos()).product())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::all_outcomes;
    use crate::error::Error;
    use std::f64::consts::PI;

    fn seq(angles: &[f64], outcomes: &[i64]) -> MeasurementSequence {
        MeasurementSequence::from_pairs(angles, outcomes).unwrap()
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalization_constant(ExperimentConfig::new(0, 0)), 1.0);
        assert!((normalization_constant(ExperimentConfig::new(1, 1)) - 0.5).abs() < 1e-15);
        assert!((normalization_constant(ExperimentConfig::new(2, 0)) - 0.25).abs() < 1e-15);
        assert!((normalization_constant_quadrature(ExperimentConfig::new(1, 1)) - 0.5).abs() < 1e-15);
        assert!((normalization_constant_quadrature(ExperimentConfig::new(2, 0)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn normalization_closed_form_matches_quadrature() {
        // Quadrature of an integrand of size 1 carries ~1e-16 absolute error,
        // so the relative check applies while C_N stays above ~1e-4.
        for n in 0..=24usize {
            for n_minus in 0..=n {
                let cfg = ExperimentConfig::new(n - n_minus, n_minus);
                let exact = normalization_constant(cfg);
                let quad = normalization_constant_quadrature(cfg);
                assert!((exact - quad).abs() <= 1e-15, "{cfg:?}: {exact} vs {quad}");
                if n <= 12 || cfg.is_balanced() {
                    assert!(((exact - quad) / exact).abs() <= 1e-12, "{cfg:?}: {exact} vs {quad}");
                }
            }
        }
    }

    #[test]
    fn empty_sequence_is_certain() {
        for cfg in [ExperimentConfig::new(0, 0), ExperimentConfig::new(3, 2)] {
            assert_eq!(sequence_probability(cfg, &MeasurementSequence::empty()), Ok(1.0));
        }
        assert_eq!(
            sequence_probability(ExperimentConfig::new(0, 0), &seq(&[0.0], &[1])),
            Err(Error::TooManyMeasurements { measurements: 1, particles: 0 })
        );
    }

    #[test]
    fn two_particle_values() {
        let cfg = ExperimentConfig::new(1, 1);
        for angle in [0.0, 0.3, -2.0, PI] {
            let p = sequence_probability(cfg, &seq(&[angle], &[1])).unwrap();
            assert!((p - 0.5).abs() < 1e-14);
        }
        for chi in [0.0, 0.4, 1.3, 2.9, -1.1] {
            let p = sequence_probability(cfg, &seq(&[0.0, chi], &[1, 1])).unwrap();
            assert!((p - (1.0 + chi.cos()) / 4.0).abs() < 1e-14, "chi={chi}");
        }
    }

    #[test]
    fn rejects_too_many_measurements() {
        let cfg = ExperimentConfig::new(1, 0);
        assert!(matches!(
            sequence_probability(cfg, &seq(&[0.0, 1.0], &[1, -1])),
            Err(Error::TooManyMeasurements { .. })
        ));
        assert!(correlation_of(cfg, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn correlation_examples() {
        assert!((correlation_of(ExperimentConfig::new(2, 3), &[]).unwrap() - 1.0).abs() < 1e-14);
        let cfg = ExperimentConfig::new(1, 1);
        for (a, b) in [(0.0, 0.7), (1.2, -0.4), (3.0, 0.1)] {
            let e = correlation_of(cfg, &[a, b]).unwrap();
            assert!((e - (a - b).cos()).abs() < 1e-14);
        }
        let e = correlation_of(ExperimentConfig::new(2, 2), &[0.8; 4]).unwrap();
        assert!((e - 1.0).abs() < 1e-13);
    }

    #[test]
    fn correlation_equals_signed_sum_of_probabilities() {
        let cfg = ExperimentConfig::new(3, 2);
        let angles = [0.1, -0.9, 2.2, 0.5];
        let direct = correlation_of(cfg, &angles).unwrap();
        let mut acc = 0.0;
        for outcomes in all_outcomes(angles.len()) {
            let sign: f64 = outcomes.iter().map(|o| o.sign()).product();
            let s = MeasurementSequence::from_outcomes(&angles, &outcomes).unwrap();
            acc += sign * sequence_probability(cfg, &s).unwrap();
        }
        assert!((direct - acc).abs() < 1e-13, "{direct} vs {acc}");
    }

    #[test]
    fn imbalance_kills_full_correlations() {
        // with N₊ ≠ N₋ and every particle measured, the Λ integral vanishes
        let e = correlation_of(ExperimentConfig::new(3, 1), &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(e.abs() < 1e-14);
    }
}
