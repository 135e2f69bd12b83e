//! Derivative-free maximizers: Nelder–Mead simplex with restarts and
//! golden-section search.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Nelder–Mead maximizer. After the simplex collapses it is rebuilt around
/// the incumbent and the search resumes until a restart stops improving.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMead {
    pub initial_step: f64,
    pub x_tolerance: f64,
    pub f_tolerance: f64,
    pub max_evaluations: usize,
    pub max_restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            x_tolerance: 1e-11,
            f_tolerance: 1e-15,
            max_evaluations: 50_000,
            max_restarts: 4,
        }
    }
}

impl NelderMead {
    pub fn maximize<F: Fn(&[f64]) -> f64>(&self, f: F, start: &[f64]) -> Optimum {
        let mut best = self.run(&f, start, self.initial_step, 0);
        let mut step = self.initial_step * 0.1;
        for _ in 0..self.max_restarts {
            if best.evaluations >= self.max_evaluations {
                break;
            }
            let again = self.run(&f, &best.x, step, best.evaluations);
            let improved = again.value > best.value + self.f_tolerance;
            let evaluations = again.evaluations;
            if again.value >= best.value {
                best = again;
            }
            best.evaluations = evaluations;
            if !improved {
                break;
            }
            step *= 0.1;
        }
        best
    }

    fn run<F: Fn(&[f64]) -> f64>(&self, f: &F, start: &[f64], step: f64, spent: usize) -> Optimum {
        let dim = start.len();
        let evaluations = std::cell::Cell::new(spent);
        let eval = |x: &[f64]| {
            evaluations.set(evaluations.get() + 1);
            let v = f(x);
            // NaN ranks below everything
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        let v0 = eval(start);
        simplex.push((start.to_vec(), v0));
        for i in 0..dim {
            let mut x = start.to_vec();
            x[i] += step;
            let v = eval(&x);
            simplex.push((x, v));
        }

        let mut converged = false;
        while evaluations.get() < self.max_evaluations {
            // descending by value, ties by coordinates for determinism
            simplex.sort_by(|a, b| {
                b.1.total_cmp(&a.1)
                    .then_with(|| a.0.iter().zip(&b.0).fold(std::cmp::Ordering::Equal, |o, (p, q)| o.then(p.total_cmp(q))))
            });
            let best_value = simplex[0].1;
            let worst_value = simplex[dim].1;
            let spread = simplex
                .iter()
                .skip(1)
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if (best_value - worst_value).abs() <= self.f_tolerance && spread <= self.x_tolerance {
                converged = true;
                break;
            }
            if spread <= self.x_tolerance * 1e-3 {
                converged = true;
                break;
            }

            let centroid: Vec<f64> = (0..dim)
                .map(|i| simplex[..dim].iter().map(|(x, _)| x[i]).sum::<f64>() / dim as f64)
                .collect();
            let along = |t: f64, worst: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let worst = simplex[dim].0.clone();
            let reflected = along(1.0, &worst);
            let fr = eval(&reflected);
            if fr > simplex[0].1 {
                let expanded = along(2.0, &worst);
                let fe = eval(&expanded);
                simplex[dim] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
                continue;
            }
            if fr > simplex[dim - 1].1 {
                simplex[dim] = (reflected, fr);
                continue;
            }
            let (contracted, fc) = if fr > worst_value {
                let x = along(0.5, &worst);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-0.5, &worst);
                let v = eval(&x);
                (x, v)
            };
            if fc > fr.max(worst_value) {
                simplex[dim] = (contracted, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                let x: Vec<f64> = anchor
                    .iter()
                    .zip(&entry.0)
                    .map(|(a, b)| a + 0.5 * (b - a))
                    .collect();
                let v = eval(&x);
                *entry = (x, v);
            }
        }

        let (x, value) = simplex
            .into_iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("simplex is never empty");
        Optimum {
            x,
            value,
            evaluations: evaluations.get(),
            converged,
        }
    }
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Returns `(argmax, max)`.
pub fn golden_section_maximize<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tolerance: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    while (hi - lo).abs() > tolerance {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    [(a, fa), (b, fb), (x, fx)]
        .into_iter()
        .max_by(|p, q| p.1.total_cmp(&q.1))
        .expect("three candidates")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_peak() {
        let f = |x: &[f64]| -(x[0] - 1.0).powi(2) - 3.0 * (x[1] + 0.5).powi(2) - (x[2] - 0.25).powi(2);
        let opt = NelderMead::default().maximize(f, &[0.0, 0.0, 0.0]);
        assert!(opt.converged);
        assert!((opt.x[0] - 1.0).abs() < 1e-7);
        assert!((opt.x[1] + 0.5).abs() < 1e-7);
        assert!((opt.x[2] - 0.25).abs() < 1e-7);
    }

    #[test]
    fn rosenbrock_valley() {
        let f = |x: &[f64]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let opt = NelderMead::default().maximize(f, &[-1.2, 1.0]);
        assert!((opt.x[0] - 1.0).abs() < 1e-6, "{:?}", opt);
        assert!((opt.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn golden_section_on_cosine() {
        let (x, v) = golden_section_maximize(|x| (x - 0.3).cos(), -1.0, 1.5, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }
}
