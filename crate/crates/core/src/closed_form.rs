//! Combinatorial correlation for equal populations with every particle
//! measured, Alice holding `P` results along one angle and Bob `N − P` along
//! another:
//!
//! ```text
//! E(χ) = (N/2)!/N! Σ_{k=0}^{⌊P/2⌋} P!(N−2k)! / (k!(P−2k)!(N/2−k)!) sin^{2k}χ cos^{P−2k}χ
//! ```
//!
//! All terms share the sign of `cos^P χ`, so the sum has no cancellation.
//! Coefficients are exact rationals up to [`EXACT_LIMIT`] particles and are
//! built in log space from the ratio of consecutive coefficients beyond that.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::quadrature::CompensatedSum;

/// Largest `N` for which coefficients are formed with exact integer arithmetic.
pub const EXACT_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq)]
enum Coefficients {
    /// `c_k` as the nearest f64 to an exact rational.
    Exact(Vec<f64>),
    /// `ln c_k`.
    Log(Vec<f64>),
}

/// Precomputed correlation function `χ ↦ E(χ)` for fixed `(N, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormCorrelation {
    total: usize,
    alice: usize,
    coefficients: Coefficients,
}

impl ClosedFormCorrelation {
    pub fn new(total: usize, alice: usize) -> Result<Self> {
        if !total.is_multiple_of(2) {
            return Err(Error::OddTotal(total));
        }
        if alice < 1 || alice > total {
            return Err(Error::PartitionOutOfRange {
                p: alice,
                min: 1,
                max: total,
            });
        }
        let coefficients = if total <= EXACT_LIMIT {
            Coefficients::Exact(exact_coefficients(total, alice))
        } else {
            Coefficients::Log(log_coefficients(total, alice))
        };
        Ok(Self {
            total,
            alice,
            coefficients,
        })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn alice(&self) -> usize {
        self.alice
    }

    /// Whether coefficients came from exact integer arithmetic.
    pub fn is_exact(&self) -> bool {
        matches!(self.coefficients, Coefficients::Exact(_))
    }

    pub fn eval(&self, chi: f64) -> f64 {
        let (s, c) = chi.sin_cos();
        let p = self.alice;
        let mut acc = CompensatedSum::new();
        match &self.coefficients {
            Coefficients::Exact(coef) => {
                let s2 = s * s;
                for (k, &ck) in coef.iter().enumerate() {
                    acc.add(ck * s2.powi(k as i32) * c.powi((p - 2 * k) as i32));
                }
            }
            Coefficients::Log(log_coef) => {
                let sign = if p % 2 == 1 && c < 0.0 { -1.0 } else { 1.0 };
                let (ls, lc) = (s.abs().ln(), c.abs().ln());
                for (k, &lk) in log_coef.iter().enumerate() {
                    let sin_pow = 2 * k;
                    let cos_pow = p - 2 * k;
                    if (sin_pow > 0 && s == 0.0) || (cos_pow > 0 && c == 0.0) {
                        continue;
                    }
                    let mut exponent = lk;
                    if sin_pow > 0 {
                        exponent += sin_pow as f64 * ls;
                    }
                    if cos_pow > 0 {
                        exponent += cos_pow as f64 * lc;
                    }
                    acc.add(exponent.exp());
                }
                return sign * acc.value();
            }
        }
        acc.value()
    }
}

/// One-shot evaluation of the closed-form correlation.
pub fn closed_form_correlation(total: usize, alice: usize, chi: f64) -> Result<f64> {
    Ok(ClosedFormCorrelation::new(total, alice)?.eval(chi))
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut table = Vec::with_capacity(n + 1);
    let mut f = BigInt::one();
    table.push(f.clone());
    for i in 1..=n {
        f *= i;
        table.push(f.clone());
    }
    table
}

fn exact_coefficients(n: usize, p: usize) -> Vec<f64> {
    let fact = factorials(n);
    let half = n / 2;
    (0..=p / 2)
        .map(|k| {
            let num = &fact[half] * &fact[p] * &fact[n - 2 * k];
            let den = &fact[n] * &fact[k] * &fact[p - 2 * k] * &fact[half - k];
            BigRational::new(num, den)
                .to_f64()
                .expect("closed-form coefficient is a finite rational")
        })
        .collect()
}

// c_0 = 1 and c_k / c_{k−1} = (P−2k+2)(P−2k+1) / (2k (N−2k+1)).
fn log_coefficients(n: usize, p: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(p / 2 + 1);
    let mut acc = CompensatedSum::new();
    out.push(0.0);
    for k in 1..=p / 2 {
        acc.add(((p - 2 * k + 2) as f64).ln());
        acc.add(((p - 2 * k + 1) as f64).ln());
        acc.add(-((2 * k) as f64).ln());
        acc.add(-((n - 2 * k + 1) as f64).ln());
        out.push(acc.value());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p2_form(n: usize, chi: f64) -> f64 {
        let r = 1.0 / (n as f64 - 1.0);
        0.5 * (1.0 + r + (1.0 - r) * (2.0 * chi).cos())
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(closed_form_correlation(5, 1, 0.0), Err(Error::OddTotal(5)));
        assert!(matches!(
            closed_form_correlation(4, 0, 0.0),
            Err(Error::PartitionOutOfRange { .. })
        ));
        assert!(matches!(
            closed_form_correlation(4, 5, 0.0),
            Err(Error::PartitionOutOfRange { .. })
        ));
    }

    #[test]
    fn single_alice_measurement_is_cosine() {
        for n in [2, 4, 10, 64, 66, 200, 4096] {
            for chi in [-2.5, -0.3, 0.0, 0.7, 1.9, PI] {
                let e = closed_form_correlation(n, 1, chi).unwrap();
                assert!((e - chi.cos()).abs() < 1e-13, "n={n} chi={chi}");
            }
        }
    }

    #[test]
    fn two_alice_measurements() {
        for n in [4, 6, 64, 66, 4096] {
            for chi in [0.1, 0.9, 2.0] {
                let e = closed_form_correlation(n, 2, chi).unwrap();
                assert!((e - p2_form(n, chi)).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn zero_angle_gives_one() {
        for n in [2, 8, 20, 64, 128, 256] {
            for p in 1..=n {
                let e = closed_form_correlation(n, p, 0.0).unwrap();
                assert!((e - 1.0).abs() < 1e-11, "n={n} p={p}: {e}");
            }
        }
    }

    #[test]
    fn exact_and_log_paths_agree() {
        // same (N, P) evaluated through both coefficient routes
        for &(n, p) in &[(64usize, 1usize), (64, 2), (64, 17), (64, 32), (64, 63)] {
            let exact = exact_coefficients(n, p);
            let logs = log_coefficients(n, p);
            for (e, l) in exact.iter().zip(&logs) {
                assert!(((e.ln() - l) / l.abs().max(1.0)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn symmetric_under_alice_bob_swap() {
        let n = 12;
        for p in 1..n {
            for chi in [0.2, 1.1, 2.6] {
                let e = closed_form_correlation(n, p, chi).unwrap();
                let f = closed_form_correlation(n, n - p, chi).unwrap();
                assert!((e - f).abs() < 1e-13);
            }
        }
    }
}
