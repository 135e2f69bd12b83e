//! Symmetry and consistency properties of sequence probabilities and
//! correlations.

use std::f64::consts::PI;

use fockbell::config::{all_outcomes, Outcome};
use fockbell::engine::{correlation_of, sequence_probability_with_nodes};
use fockbell::quadrature::node_count;
use fockbell::{closed_form_correlation, sequence_probability, ExperimentConfig, MeasurementSequence};
use proptest::prelude::*;

fn case() -> impl Strategy<Value = (ExperimentConfig, Vec<f64>, Vec<Outcome>)> {
    (1usize..=10)
        .prop_flat_map(|n| (Just(n), 0..=n, 1..=n))
        .prop_flat_map(|(n, n_minus, m)| {
            (
                Just(ExperimentConfig::new(n - n_minus, n_minus)),
                prop::collection::vec(-PI..PI, m),
                prop::collection::vec(prop::sample::select(Outcome::BOTH.to_vec()), m),
            )
        })
}

fn prob(cfg: ExperimentConfig, angles: &[f64], outcomes: &[Outcome]) -> f64 {
    sequence_probability(cfg, &MeasurementSequence::from_outcomes(angles, outcomes).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn marginal_consistency((cfg, angles, outcomes) in case()) {
        let m = angles.len();
        let shorter = prob(cfg, &angles[..m - 1], &outcomes[..m - 1]);
        let mut up = outcomes.clone();
        up[m - 1] = Outcome::Up;
        let mut down = outcomes.clone();
        down[m - 1] = Outcome::Down;
        let summed = prob(cfg, &angles, &up) + prob(cfg, &angles, &down);
        prop_assert!((summed - shorter).abs() <= 1e-12);
    }

    #[test]
    fn exchangeable((cfg, angles, outcomes) in case(), rotate in 0usize..10) {
        let m = angles.len();
        let k = rotate % m;
        let mut a2 = angles.clone();
        let mut o2 = outcomes.clone();
        a2.rotate_left(k);
        o2.rotate_left(k);
        a2.reverse();
        o2.reverse();
        prop_assert!((prob(cfg, &angles, &outcomes) - prob(cfg, &a2, &o2)).abs() <= 1e-12);
    }

    #[test]
    fn global_gauge((cfg, angles, outcomes) in case(), delta in -PI..PI) {
        let shifted: Vec<f64> = angles.iter().map(|a| a + delta).collect();
        prop_assert!((prob(cfg, &angles, &outcomes) - prob(cfg, &shifted, &outcomes)).abs() <= 1e-12);
        let e1 = correlation_of(cfg, &angles).unwrap();
        let e2 = correlation_of(cfg, &shifted).unwrap();
        prop_assert!((e1 - e2).abs() <= 1e-12);
    }

    #[test]
    fn spin_flip((cfg, angles, outcomes) in case()) {
        let turned: Vec<f64> = angles.iter().map(|a| a + PI).collect();
        let flipped: Vec<Outcome> = outcomes.iter().map(|o| o.flipped()).collect();
        prop_assert!((prob(cfg, &angles, &outcomes) - prob(cfg, &turned, &flipped)).abs() <= 1e-12);
    }

    #[test]
    fn population_swap((cfg, angles, outcomes) in case()) {
        let flipped: Vec<Outcome> = outcomes.iter().map(|o| o.flipped()).collect();
        prop_assert!((prob(cfg, &angles, &outcomes) - prob(cfg.swapped(), &angles, &flipped)).abs() <= 1e-12);
    }

    #[test]
    fn quadrature_exact_beyond_minimum((cfg, angles, outcomes) in case()) {
        let seq = MeasurementSequence::from_outcomes(&angles, &outcomes).unwrap();
        let k = node_count(cfg.total());
        let base = sequence_probability_with_nodes(cfg, &seq, 2 * cfg.total() + 2).unwrap();
        let doubled = sequence_probability_with_nodes(cfg, &seq, 2 * k).unwrap();
        prop_assert!((base - doubled).abs() <= 1e-13);
    }

    #[test]
    fn closed_form_even_in_chi(half in 1usize..=12, p_seed in 0usize..100, chi in -PI..PI) {
        let n = 2 * half;
        let p = 1 + p_seed % n;
        let a = closed_form_correlation(n, p, chi).unwrap();
        let b = closed_form_correlation(n, p, -chi).unwrap();
        prop_assert!((a - b).abs() <= 1e-14);
        prop_assert!(a.abs() <= 1.0 + 1e-12);
    }
}

#[test]
fn normalization_up_to_twelve_particles() {
    for n in 1..=12usize {
        for n_minus in [0, n / 3, n / 2, n] {
            let cfg = ExperimentConfig::new(n - n_minus, n_minus);
            let angles: Vec<f64> = (0..n).map(|j| (j as f64 * 1.3).sin() * 3.0).collect();
            let m = n.min(8);
            let total: f64 = all_outcomes(m).map(|o| prob(cfg, &angles[..m], &o)).sum();
            assert!((total - 1.0).abs() <= 1e-12, "{cfg:?}: {total}");
        }
    }
}

#[test]
fn correlation_is_signed_probability_sum() {
    for cfg in [ExperimentConfig::new(2, 2), ExperimentConfig::new(4, 1), ExperimentConfig::new(3, 3)] {
        let angles = [0.2, -1.4, 2.7, 0.9];
        let direct = correlation_of(cfg, &angles).unwrap();
        let summed: f64 = all_outcomes(4)
            .map(|o| o.iter().map(|x| x.sign()).product::<f64>() * prob(cfg, &angles, &o))
            .sum();
        assert!((direct - summed).abs() <= 1e-12);
    }
}
