use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

use fockbell::bell::CIRELSON_BOUND;
use fockbell::config::{all_outcomes, wrap_angle};
use fockbell::engine::correlation_of;
use fockbell::{
    closed_form_correlation, maximize_bchsh, oracle_sequence_probability, sequence_probability, ExperimentConfig,
    MeasurementSequence,
};
use serde_json::Map;

use crate::table::Table;
use crate::{Check, Report};

/// Deterministic, well-spread angles.
fn angle_set(set: usize, len: usize) -> Vec<f64> {
    const GOLDEN: f64 = 2.399_963_229_728_653;
    (0..len)
        .map(|k| wrap_angle(GOLDEN * (1 + k + 7 * set) as f64 + 0.3 * set as f64))
        .collect()
}

fn oracle_equivalence() -> (f64, f64) {
    let (mut diff, mut sum) = (0.0f64, 0.0f64);
    for n in 1..=6usize {
        for n_minus in 0..=n {
            let config = ExperimentConfig::new(n - n_minus, n_minus);
            for set in 0..3 {
                let angles = angle_set(set, n);
                for m in 0..=n {
                    let mut total = 0.0;
                    for outcomes in all_outcomes(m) {
                        let seq = MeasurementSequence::from_outcomes(&angles[..m], &outcomes).expect("finite angles");
                        let e = sequence_probability(config, &seq).expect("valid sequence");
                        let o = oracle_sequence_probability(config, &seq).expect("valid sequence");
                        diff = diff.max((e - o).abs());
                        total += e;
                    }
                    sum = sum.max((total - 1.0).abs());
                }
            }
        }
    }
    (diff, sum)
}

pub fn run() -> Report {
    let mut checks = Vec::new();

    let seq = MeasurementSequence::from_pairs(&[0.0, 0.0], &[1, 1]).expect("valid");
    let p = sequence_probability(ExperimentConfig::new(1, 1), &seq).expect("valid");
    checks.push(Check::new("P(+1,+1 | 0,0) on (1,1) = 1/2", (p - 0.5).abs() <= 1e-14, format!("{p:.17}")));

    let (diff, sum) = oracle_equivalence();
    checks.push(Check::new("engine matches operator oracle, N <= 6", diff <= 1e-10, format!("max |Δ| = {diff:.3e}")));
    checks.push(Check::new("sequence probabilities sum to 1", sum <= 1e-12, format!("max |Σ - 1| = {sum:.3e}")));

    let singlet = (0..12)
        .map(|k| {
            let chi = -PI + 0.5 + k as f64 * 0.5;
            let mut angles = vec![chi];
            angles.extend([0.0; 7]);
            (correlation_of(ExperimentConfig::new(4, 4), &angles).expect("valid") - chi.cos()).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("P = 1 correlation is cos χ, N = 8", singlet <= 1e-10, format!("max |Δ| = {singlet:.3e}")));

    let p2 = (0..12)
        .map(|k| {
            let chi = -PI + 0.25 + k as f64 * 0.5;
            let r = 1.0 / 9.0;
            let expected = 0.5 * (1.0 + r + (1.0 - r) * (2.0 * chi).cos());
            (closed_form_correlation(10, 2, chi).expect("valid") - expected).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("closed form P = 2, N = 10", p2 <= 1e-12, format!("max |Δ| = {p2:.3e}")));

    let cf = (0..8)
        .map(|k| {
            let chi = -3.0 + 0.8 * k as f64;
            let mut angles = vec![chi; 3];
            angles.extend([0.0; 9]);
            let quad = correlation_of(ExperimentConfig::new(6, 6), &angles).expect("valid");
            (closed_form_correlation(12, 3, chi).expect("valid") - quad).abs()
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("closed form matches quadrature, N = 12, P = 3", cf <= 1e-12, format!("max |Δ| = {cf:.3e}")));

    let r = maximize_bchsh(ExperimentConfig::new(1, 1), 1).expect("valid");
    let ok = (r.q_value - CIRELSON_BOUND).abs() <= 1e-8 && (r.fan.spacing - FRAC_PI_4).abs() <= 1e-5;
    checks.push(Check::new(
        "Qmax(2, 1) = 2√2 with spacing π/4",
        ok,
        format!("Q = {:.12}, χ = {:.8}", r.q_value, r.fan.spacing),
    ));

    let r = maximize_bchsh(ExperimentConfig::new(2, 2), 2).expect("valid");
    let exact = 4.0 / 3.0 + 2.0 * SQRT_2 / 3.0;
    checks.push(Check::new(
        "Qmax(4, 2) = 4/3 + 2√2/3",
        (r.q_value - exact).abs() <= 1e-8,
        format!("Q = {:.12}", r.q_value),
    ));

    let mut table = Table::new(vec!["check", "pass", "detail"]);
    for c in &checks {
        table.push(vec![c.name.clone().into(), c.pass.into(), c.detail.clone().into()]);
    }
    Report {
        inputs: Map::new(),
        outputs: Map::new(),
        checks,
        table: Some(table),
        sweep: None,
    }
}

pub fn lines(report: &Report) -> String {
    let mut s = String::new();
    for c in &report.checks {
        s.push_str(&format!("{} {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let passed = report.checks.iter().filter(|c| c.pass).count();
    s.push_str(&format!("{passed}/{} checks passed\n", report.checks.len()));
    s
}
