//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fockbell::bell::{figure1_sweep_over, MultipartyOptions, CIRELSON_BOUND};
use fockbell::config::{all_outcomes, Outcome};
use fockbell::engine::correlation_of;
use fockbell::sampler::sample_batch;
use fockbell::{
    closed_form_correlation, maximize_bchsh, multiparty_collapse, no_violation_scan, oracle_sequence_probability,
    sequence_probability, ExperimentConfig, MeasurementSequence, PartitionRule, PartyCounts,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Check {
    Check {
        pass,
        detail: detail.into(),
    }
}

fn run(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Vec<(String, Check)>) -> bool {
    let start = Instant::now();
    let parts = body();
    let elapsed = start.elapsed();
    let mut pass = true;
    for (label, o) in &parts {
        pass &= o.pass;
        println!(
            "    [{}] {label}: {}",
            if o.pass { "ok" } else { "FAIL" },
            o.detail
        );
    }
    let in_time = elapsed <= budget;
    println!(
        "    [{}] runtime {:.2?} (budget {:.0?})",
        if in_time { "ok" } else { "FAIL" },
        elapsed,
        budget
    );
    pass &= in_time;
    println!("criterion {id} {}: {name}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn singlet_correlation() -> Vec<(String, Check)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let chis: Vec<f64> = (0..20).map(|_| rng.random_range(-PI..PI)).collect();
    let mut worst_quad = 0.0f64;
    let mut worst_cf = 0.0f64;
    for n in (2..=20).step_by(2) {
        let cfg = ExperimentConfig::balanced(n).unwrap();
        for &chi in &chis {
            let mut angles = vec![chi];
            angles.extend(std::iter::repeat_n(0.0, n - 1));
            worst_quad = worst_quad.max((correlation_of(cfg, &angles).unwrap() - chi.cos()).abs());
            worst_cf = worst_cf.max((closed_form_correlation(n, 1, chi).unwrap() - chi.cos()).abs());
        }
    }
    vec![
        (
            "E(χ) = cos χ, quadrature, N = 2..20".into(),
            check(worst_quad <= 1e-10, format!("max |E − cos χ| = {worst_quad:.2e}")),
        ),
        (
            "E(χ) = cos χ, closed form, N = 2..20".into(),
            check(worst_cf <= 1e-10, format!("max |E − cos χ| = {worst_cf:.2e}")),
        ),
    ]
}

fn cirelson_saturation() -> Vec<(String, Check)> {
    let rows: Vec<(usize, f64, f64, bool)> = (2..=32)
        .step_by(2)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&n| {
            let r = maximize_bchsh(ExperimentConfig::balanced(n).unwrap(), 1).unwrap();
            (n, r.q_value, r.fan.spacing, r.fan.is_fan)
        })
        .collect();
    let worst_q = rows.iter().map(|r| (r.1 - CIRELSON_BOUND).abs()).fold(0.0, f64::max);
    let worst_s = rows.iter().map(|r| (r.2 - FRAC_PI_4).abs()).fold(0.0, f64::max);
    let fans = rows.iter().all(|r| r.3);
    vec![
        (
            "Qmax(P=1) = 2√2 for even N in 2..32".into(),
            check(worst_q <= 1e-8, format!("max |Qmax − 2√2| = {worst_q:.2e}")),
        ),
        (
            "fan spacing π/4".into(),
            check(worst_s <= 1e-5 && fans, format!("max |χ − π/4| = {worst_s:.2e}, all fans: {fans}")),
        ),
    ]
}

fn p2_stationary(n: usize) -> f64 {
    let r = 1.0 / (n as f64 - 1.0);
    let alpha = 0.5 * (1.0 + r);
    let beta = 0.5 * (1.0 - r);
    2.0 * alpha + 2.0 * SQRT_2 * beta
}

fn p2_values() -> Vec<(String, Check)> {
    let q4 = maximize_bchsh(ExperimentConfig::balanced(4).unwrap(), 2).unwrap().q_value;
    let q4096 = maximize_bchsh(ExperimentConfig::balanced(4096).unwrap(), 2).unwrap().q_value;
    let big = 1usize << 31;
    let q_big = maximize_bchsh(ExperimentConfig::balanced(big).unwrap(), 2).unwrap().q_value;
    let exact4 = 4.0 / 3.0 + 2.0 * SQRT_2 / 3.0;
    vec![
        ("Qmax(4,2) = 2.28 ± 0.005".into(), check((q4 - 2.28).abs() <= 0.005, format!("{q4:.10}"))),
        (
            "Qmax(4,2) = 4/3 + 2√2/3 to 1e-8".into(),
            check((q4 - exact4).abs() <= 1e-8, format!("|Δ| = {:.2e}", (q4 - exact4).abs())),
        ),
        ("Qmax(4096,2) = 2.41 ± 0.01".into(), check((q4096 - 2.41).abs() <= 0.01, format!("{q4096:.10}"))),
        (
            "Qmax(4096,2) = finite-N stationary value to 1e-8".into(),
            check(
                (q4096 - p2_stationary(4096)).abs() <= 1e-8,
                format!("|Δ| = {:.2e}", (q4096 - p2_stationary(4096)).abs()),
            ),
        ),
        (
            "Qmax(2^31,2) = 1 + √2 to 1e-8".into(),
            check(
                (q_big - (1.0 + SQRT_2)).abs() <= 1e-8,
                format!("{q_big:.12}, |Δ| = {:.2e}", (q_big - 1.0 - SQRT_2).abs()),
            ),
        ),
    ]
}

fn half_partition_trend() -> Vec<(String, Check)> {
    let totals = [8usize, 16, 32, 64, 128, 256];
    let rows = figure1_sweep_over(&totals, &[PartitionRule::HalfN]).unwrap();
    let qs: Vec<f64> = rows.iter().map(|r| r.q_max).collect();
    let increasing = qs.windows(2).all(|w| w[1] > w[0]);
    let q256 = *qs.last().unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.fan_spacing.ln()).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    let my = ys.iter().sum::<f64>() / ys.len() as f64;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let table = rows
        .iter()
        .map(|r| format!("N={} Q={:.6} χ={:.5}", r.n, r.q_max, r.fan_spacing))
        .collect::<Vec<_>>()
        .join("; ");
    vec![
        (
            "Qmax(N, N/2) increasing over N = 8..256".into(),
            check(increasing, table),
        ),
        (
            "|Qmax(256) − 2.32| ≤ 0.05".into(),
            check((q256 - 2.32).abs() <= 0.05, format!("{q256:.6}")),
        ),
        (
            "log-log slope of fan spacing = −0.5 ± 0.1".into(),
            check((slope + 0.5).abs() <= 0.1, format!("slope {slope:.4}")),
        ),
    ]
}

fn oracle_equivalence() -> Vec<(String, Check)> {
    let mut jobs = Vec::new();
    for n in 1..=10usize {
        for n_minus in 0..=n {
            for set in 0..50u64 {
                jobs.push((ExperimentConfig::new(n - n_minus, n_minus), set));
            }
        }
    }
    let results: Vec<(f64, f64)> = jobs
        .par_iter()
        .map(|&(cfg, set)| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * cfg.total() as u64 + 37 * cfg.n_minus as u64 + set);
            let angles: Vec<f64> = (0..cfg.total()).map(|_| rng.random_range(-PI..PI)).collect();
            let mut worst_diff = 0.0f64;
            let mut worst_sum = 0.0f64;
            for m in 0..=angles.len() {
                let mut total = 0.0;
                for outcomes in all_outcomes(m) {
                    let seq = MeasurementSequence::from_outcomes(&angles[..m], &outcomes).unwrap();
                    let e = sequence_probability(cfg, &seq).unwrap();
                    let o = oracle_sequence_probability(cfg, &seq).unwrap();
                    worst_diff = worst_diff.max((e - o).abs());
                    total += e;
                }
                worst_sum = worst_sum.max((total - 1.0).abs());
            }
            (worst_diff, worst_sum)
        })
        .collect();
    let diff = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let sum = results.iter().map(|r| r.1).fold(0.0, f64::max);
    vec![
        (
            format!("engine vs oracle, {} (config, angle set) pairs", jobs.len()),
            check(diff <= 1e-10, format!("max |Δ| = {diff:.2e}")),
        ),
        ("probabilities sum to 1".into(), check(sum <= 1e-12, format!("max |Σ − 1| = {sum:.2e}"))),
    ]
}

fn no_violation() -> Vec<(String, Check)> {
    let mut partial = Vec::new();
    let mut unequal = Vec::new();
    for n in 2..=8usize {
        for n_minus in 0..=n {
            let cfg = ExperimentConfig::new(n - n_minus, n_minus);
            for m in [n - 1, n - 2] {
                for p in 1..m.max(1) {
                    partial.push((cfg, p, m));
                }
            }
            if !cfg.is_balanced() {
                for p in 1..n {
                    unequal.push((cfg, p, n));
                }
            }
        }
    }
    let scan = |jobs: &[(ExperimentConfig, usize, usize)]| -> (f64, String) {
        let rs: Vec<(f64, String)> = jobs
            .par_iter()
            .map(|&(cfg, p, m)| {
                let q = no_violation_scan(cfg, p, m, 64).unwrap().q_value;
                (q, format!("({},{}) P={p} m={m}", cfg.n_plus, cfg.n_minus))
            })
            .collect();
        rs.into_iter()
            .reduce(|a, b| if b.0 > a.0 { b } else { a })
            .unwrap_or((f64::NEG_INFINITY, String::new()))
    };
    let (qa, wa) = scan(&partial);
    let (qb, wb) = scan(&unequal);
    vec![
        (
            format!("m_used ∈ {{N−1, N−2}}, N ≤ 8 ({} scans)", partial.len()),
            check(qa <= 2.0 + 1e-8, format!("max Q = {qa:.10} at {wa}")),
        ),
        (
            format!("N₊ ≠ N₋, N ≤ 8 ({} scans)", unequal.len()),
            check(qb <= 2.0 + 1e-8, format!("max Q = {qb:.10} at {wb}")),
        ),
    ]
}

fn p2_identity() -> Vec<(String, Check)> {
    let mut worst = 0.0f64;
    for n in [4usize, 6, 10, 20] {
        let r = 1.0 / (n as f64 - 1.0);
        for i in 0..20 {
            let chi = -PI + 2.0 * PI * (i as f64 + 0.5) / 20.0;
            let expected = 0.5 * (1.0 + r + (1.0 - r) * (2.0 * chi).cos());
            worst = worst.max((closed_form_correlation(n, 2, chi).unwrap() - expected).abs());
        }
    }
    vec![(
        "E(N,2,χ) = ½[1 + 1/(N−1) + (1 − 1/(N−1)) cos 2χ]".into(),
        check(worst <= 1e-12, format!("max |Δ| = {worst:.2e}")),
    )]
}

fn chi_square(cfg: ExperimentConfig, angles: &[f64], samples: usize, seed: u64) -> (f64, f64) {
    let batch = sample_batch(cfg, angles, samples, seed).unwrap();
    let mut counts: HashMap<Vec<Outcome>, usize> = HashMap::new();
    for t in &batch {
        *counts
            .entry(t.records.records().iter().map(|r| r.outcome).collect())
            .or_default() += 1;
    }
    // cells with expected count below 5 are pooled
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    for outcomes in all_outcomes(angles.len()) {
        let seq = MeasurementSequence::from_outcomes(angles, &outcomes).unwrap();
        let expected = sequence_probability(cfg, &seq).unwrap() * samples as f64;
        let observed = *counts.get(&outcomes).unwrap_or(&0) as f64;
        if expected >= 5.0 {
            stat += (observed - expected).powi(2) / expected;
            cells += 1;
        } else {
            pooled_e += expected;
            pooled_o += observed;
        }
    }
    if pooled_e >= 5.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    (stat, ChiSquared::new((cells - 1) as f64).unwrap().inverse_cdf(0.99))
}

fn sampler_statistics() -> Vec<(String, Check)> {
    let mut out = Vec::new();
    for (n, angle) in [(10usize, 0.0), (100, 1.1)] {
        let cfg = ExperimentConfig::balanced(n).unwrap();
        let batch = sample_batch(cfg, &[angle], 100_000, 2024 + n as u64).unwrap();
        let ups = batch
            .iter()
            .filter(|t| t.records.records()[0].outcome == Outcome::Up)
            .count();
        let freq = ups as f64 / batch.len() as f64;
        out.push((
            format!("first outcome frequency, N = {n}"),
            check((freq - 0.5).abs() <= 0.005, format!("{freq:.5}")),
        ));
    }
    let cases: Vec<(ExperimentConfig, Vec<f64>)> = vec![
        (ExperimentConfig::new(5, 5), vec![0.0; 6]),
        (ExperimentConfig::new(6, 6), vec![0.0, FRAC_PI_4 * 2.0, 0.0, FRAC_PI_4 * 2.0, 0.0, FRAC_PI_4 * 2.0]),
        (ExperimentConfig::new(2, 2), vec![0.3, -1.2, 2.0, 0.7]),
        (ExperimentConfig::new(4, 2), vec![0.1, 2.2, -0.8, 1.5, -2.9]),
        (ExperimentConfig::new(3, 3), vec![0.0, 0.4, 0.8, 1.2, 1.6, 2.0]),
        (ExperimentConfig::new(7, 5), vec![1.0, -1.0, 0.5, 2.5]),
    ];
    for (i, (cfg, angles)) in cases.iter().enumerate() {
        let (stat, critical) = chi_square(*cfg, angles, 20_000, 500 + i as u64);
        out.push((
            format!("chi-square ({},{}) M={}", cfg.n_plus, cfg.n_minus, angles.len()),
            check(stat <= critical, format!("χ² = {stat:.2} ≤ {critical:.2}")),
        ));
    }
    out
}

fn multiparty() -> Vec<(String, Check)> {
    let mut out = Vec::new();
    for (n, counts) in [(4usize, PartyCounts::new(1, 1, 1, 1)), (6, PartyCounts::new(1, 2, 2, 1))] {
        let cfg = ExperimentConfig::balanced(n).unwrap();
        let r = multiparty_collapse(cfg, counts, &MultipartyOptions::default()).unwrap();
        let label = format!(
            "N={n} counts (A,B,C,D)=({},{},{},{})",
            counts.alice, counts.bob, counts.carole, counts.david
        );
        out.push((
            format!("{label}: optimum = bipartite optimum"),
            check(
                (r.q_max - r.q_bipartite).abs() <= 1e-6 && (r.q_random_starts - r.q_bipartite).abs() <= 1e-6,
                format!(
                    "Q4 = {:.10}, random starts {:.10}, bipartite {:.10}",
                    r.q_max, r.q_random_starts, r.q_bipartite
                ),
            ),
        ));
        out.push((
            format!("{label}: Carole/David angles collapse"),
            check(
                r.collapsed,
                format!(
                    "distances C={:.2e} D={:.2e} (random-start optimum: {:.2e})",
                    r.carole_distance.unwrap_or(0.0),
                    r.david_distance.unwrap_or(0.0),
                    r.random_start_distance
                ),
            ),
        ));
    }
    out
}

fn main() -> ExitCode {
    let results = [
        run(1, "singlet-equivalent correlation", Duration::from_secs(1), singlet_correlation),
        run(2, "Cirel'son saturation at P = 1", Duration::from_secs(30), cirelson_saturation),
        run(3, "P = 2 values", Duration::from_secs(60), p2_values),
        run(4, "P = N/2 trend", Duration::from_secs(600), half_partition_trend),
        run(5, "oracle equivalence", Duration::from_secs(300), oracle_equivalence),
        run(6, "no-violation claims", Duration::from_secs(600), no_violation),
        run(7, "closed-form P = 2 identity", Duration::from_secs(1), p2_identity),
        run(8, "sampler statistics", Duration::from_secs(300), sampler_statistics),
        run(9, "multiparty collapse", Duration::from_secs(600), multiparty),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
