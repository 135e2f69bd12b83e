//! Periodic trapezoidal quadrature.
//!
//! On a full period the equispaced trapezoid rule with `K` nodes integrates
//! every trigonometric polynomial of degree `< K` exactly, so it is the
//! natural scheme for the integrands handled here.

use std::f64::consts::PI;

/// Neumaier-compensated accumulator. Summation order is fixed by the caller,
/// so results are reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Node count used for integrands built from `n` particles: exact for
/// trigonometric degree up to `2n + 3`.
pub const fn node_count(n: usize) -> usize {
    2 * n + 4
}

/// `count` equispaced nodes on [−π, π).
pub fn periodic_nodes(count: usize) -> Vec<f64> {
    let step = 2.0 * PI / count as f64;
    (0..count).map(|i| -PI + step * i as f64).collect()
}

/// Mean of `f` over one period, i.e. `∫_{−π}^{π} f(x) dx / 2π`, using `count` nodes.
pub fn periodic_mean<F: FnMut(f64) -> f64>(count: usize, mut f: F) -> f64 {
    assert!(count > 0, "periodic quadrature needs at least one node");
    let acc: CompensatedSum = periodic_nodes(count).into_iter().map(&mut f).collect();
    acc.value() / count as f64
}
