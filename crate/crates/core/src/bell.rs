//! BCHSH quantity for products of results, its maximization over the four
//! orientations, and the scans built on top of it.
//!
//! Alice measures `P` particles along `φ_a` or `φ_a′` and keeps the product
//! `A` of her results; Bob measures `m_used − P` particles along `φ_b` or
//! `φ_b′` and keeps `B`. The quantity is
//! `Q = E(a,b) + E(a,b′) + E(a′,b) − E(a′,b′)`, bounded by 2 for local
//! realist models and by 2√2 in quantum mechanics.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::ClosedFormCorrelation;
use crate::config::{wrap_angle, ExperimentConfig};
use crate::engine::{auxiliary_weight, correlation_of};
use crate::error::{Error, Result};
use crate::optimize::NelderMead;
use crate::quadrature::{node_count, periodic_nodes, CompensatedSum};

/// Local realist bound on `|Q|`.
pub const LOCAL_BOUND: f64 = 2.0;
/// Quantum (Cirel'son) bound `2√2`.
pub const CIRELSON_BOUND: f64 = 2.0 * std::f64::consts::SQRT_2;
/// Angular tolerance for recognizing a fan.
pub const FAN_TOLERANCE: f64 = 1e-4;
/// Angular tolerance for recognizing collapsed multiparty angles.
pub const COLLAPSE_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartiteSetting {
    pub p_alice: usize,
    pub angle_a: f64,
    pub angle_a_prime: f64,
    pub angle_b: f64,
    pub angle_b_prime: f64,
}

impl BipartiteSetting {
    pub fn new(p_alice: usize, a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        Self {
            p_alice,
            angle_a: a,
            angle_a_prime: a_prime,
            angle_b: b,
            angle_b_prime: b_prime,
        }
    }

    /// Orientations `a′, b, a, b′` equally spaced by `spacing`, with `a = 0`.
    pub fn fan(p_alice: usize, spacing: f64) -> Self {
        Self::new(p_alice, 0.0, -2.0 * spacing, -spacing, spacing)
    }

    /// All four orientations rotated by `delta`.
    pub fn rotated(&self, delta: f64) -> Self {
        Self::new(
            self.p_alice,
            self.angle_a + delta,
            self.angle_a_prime + delta,
            self.angle_b + delta,
            self.angle_b_prime + delta,
        )
    }

    /// Alice-minus-Bob angle differences in the order `(a,b), (a,b′), (a′,b), (a′,b′)`.
    pub fn differences(&self) -> [f64; 4] {
        [
            self.angle_a - self.angle_b,
            self.angle_a - self.angle_b_prime,
            self.angle_a_prime - self.angle_b,
            self.angle_a_prime - self.angle_b_prime,
        ]
    }

    fn wrapped(&self) -> Self {
        Self::new(
            self.p_alice,
            wrap_angle(self.angle_a),
            wrap_angle(self.angle_a_prime),
            wrap_angle(self.angle_b),
            wrap_angle(self.angle_b_prime),
        )
    }
}

/// Shape of a setting viewed as four measurement axes (orientations modulo
/// π). A fan has three of the Alice–Bob axis openings equal to `spacing`
/// and the fourth equal to `3 × spacing`; which term carries the triple
/// opening depends on how the optimizer labelled the orientations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanAnalysis {
    pub spacing: f64,
    pub deviation: f64,
    pub is_fan: bool,
}

impl FanAnalysis {
    pub fn of(setting: &BipartiteSetting) -> Self {
        let axis = |x: f64| (x - PI * (x / PI).round()).abs();
        let openings = setting.differences().map(axis);
        let (spacing, deviation) = (0..4)
            .map(|odd| {
                let others: Vec<f64> = (0..4).filter(|&j| j != odd).map(|j| openings[j]).collect();
                let s = others.iter().sum::<f64>() / 3.0;
                let dev = others
                    .iter()
                    .map(|o| (o - s).abs())
                    .fold((openings[odd] - axis(3.0 * s)).abs(), f64::max);
                (s, dev)
            })
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("four candidates");
        Self {
            spacing,
            deviation,
            is_fan: deviation < FAN_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub q_value: f64,
    /// `E(a,b), E(a,b′), E(a′,b), E(a′,b′)`.
    pub e_components: [f64; 4],
    pub optimal_setting: BipartiteSetting,
    pub config: ExperimentConfig,
    pub m_used: usize,
    pub fan: FanAnalysis,
}

impl BellReport {
    fn from_components(
        config: ExperimentConfig,
        m_used: usize,
        setting: BipartiteSetting,
        e: [f64; 4],
    ) -> Self {
        Self {
            q_value: e[0] + e[1] + e[2] - e[3],
            e_components: e,
            optimal_setting: setting,
            config,
            m_used,
            fan: FanAnalysis::of(&setting),
        }
    }

    pub fn violates_local_bound(&self) -> bool {
        self.q_value > LOCAL_BOUND + 1e-9
    }
}

fn check_partition(config: ExperimentConfig, p_alice: usize, m_used: usize) -> Result<()> {
    config.check_measurements(m_used)?;
    if p_alice < 1 || p_alice >= m_used {
        return Err(Error::PartitionOutOfRange {
            p: p_alice,
            min: 1,
            max: m_used.saturating_sub(1),
        });
    }
    Ok(())
}

/// BCHSH value of `setting`, each correlation evaluated by the quadrature
/// engine on the explicit list of `m_used` angles.
pub fn bchsh_value(config: ExperimentConfig, setting: &BipartiteSetting, m_used: usize) -> Result<BellReport> {
    check_partition(config, setting.p_alice, m_used)?;
    let p = setting.p_alice;
    let bob = m_used - p;
    let e = |alice_angle: f64, bob_angle: f64| -> Result<f64> {
        let mut angles = vec![alice_angle; p];
        angles.extend(std::iter::repeat_n(bob_angle, bob));
        correlation_of(config, &angles)
    };
    let components = [
        e(setting.angle_a, setting.angle_b)?,
        e(setting.angle_a, setting.angle_b_prime)?,
        e(setting.angle_a_prime, setting.angle_b)?,
        e(setting.angle_a_prime, setting.angle_b_prime)?,
    ];
    Ok(BellReport::from_components(config, m_used, *setting, components))
}

/// Correlation of grouped angles: `∫dλ/2π Π_g cos^{count_g}(λ − angle_g)`
/// times the auxiliary weight of the configuration.
#[derive(Debug, Clone)]
struct GroupedCorrelation {
    weight: f64,
    nodes: Vec<f64>,
}

impl GroupedCorrelation {
    fn new(config: ExperimentConfig, measurements: usize) -> Self {
        let count = node_count(config.total());
        Self {
            weight: auxiliary_weight(config, measurements, count),
            nodes: periodic_nodes(count),
        }
    }

    fn eval(&self, groups: &[(f64, usize)]) -> f64 {
        if self.weight == 0.0 {
            return 0.0;
        }
        let acc: CompensatedSum = self
            .nodes
            .iter()
            .map(|&l| {
                groups
                    .iter()
                    .map(|&(angle, count)| (l - angle).cos().powi(count as i32))
                    .product::<f64>()
            })
            .collect();
        self.weight * acc.value() / self.nodes.len() as f64
    }
}

/// `χ ↦ E(χ)` for Alice's `P` results against Bob's `m_used − P`.
#[derive(Debug, Clone)]
enum BipartiteCorrelation {
    ClosedForm(ClosedFormCorrelation),
    Quadrature {
        inner: GroupedCorrelation,
        alice: usize,
        bob: usize,
    },
}

impl BipartiteCorrelation {
    fn new(config: ExperimentConfig, p_alice: usize, m_used: usize) -> Result<Self> {
        check_partition(config, p_alice, m_used)?;
        if config.is_balanced() && m_used == config.total() {
            return Ok(Self::ClosedForm(ClosedFormCorrelation::new(config.total(), p_alice)?));
        }
        Ok(Self::Quadrature {
            inner: GroupedCorrelation::new(config, m_used),
            alice: p_alice,
            bob: m_used - p_alice,
        })
    }

    fn eval(&self, chi: f64) -> f64 {
        match self {
            Self::ClosedForm(cf) => cf.eval(chi),
            Self::Quadrature { inner, alice, bob } => inner.eval(&[(chi, *alice), (0.0, *bob)]),
        }
    }
}

/// Search settings for [`maximize_bchsh_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaximizeOptions {
    /// Grid points per free angle in the coarse scan.
    pub grid: usize,
    /// Number of best grid points refined by the simplex.
    pub starts: usize,
    pub simplex: NelderMead,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            starts: 8,
            simplex: NelderMead::default(),
        }
    }
}

/// Maximum of `Q` with every particle measured.
pub fn maximize_bchsh(config: ExperimentConfig, p_alice: usize) -> Result<BellReport> {
    maximize_bchsh_with(config, p_alice, config.total(), &MaximizeOptions::default())
}

/// Maximum of `Q` when only `m_used` results enter the products.
///
/// The gauge is fixed by `φ_a = 0`. The three remaining angles are scanned
/// on a regular grid, where every angle difference falls on the same grid so
/// `E` is tabulated once, and the best grid points are polished with
/// Nelder–Mead.
pub fn maximize_bchsh_with(
    config: ExperimentConfig,
    p_alice: usize,
    m_used: usize,
    options: &MaximizeOptions,
) -> Result<BellReport> {
    let corr = BipartiteCorrelation::new(config, p_alice, m_used)?;
    let g = options.grid.max(4);
    let table: Vec<f64> = (0..g).map(|d| corr.eval(2.0 * PI * d as f64 / g as f64)).collect();
    let at = |diff: isize| table[diff.rem_euclid(g as isize) as usize];

    // (q, i_b, j_a', k_b′) candidates, best per b-index
    let mut candidates: Vec<(f64, usize, usize, usize)> = (0..g)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut local: Vec<(f64, usize, usize, usize)> = Vec::new();
            for j in 0..g {
                for k in 0..g {
                    let (i, j, k) = (i as isize, j as isize, k as isize);
                    let q = at(-i) + at(-k) + at(j - i) - at(j - k);
                    local.push((q, i as usize, j as usize, k as usize));
                }
            }
            local.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2, x.3).cmp(&(y.1, y.2, y.3))));
            local.truncate(options.starts.max(1));
            local
        })
        .collect();
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2, x.3).cmp(&(y.1, y.2, y.3))));
    candidates.truncate(options.starts.max(1));

    let step = 2.0 * PI / g as f64;
    let objective = |x: &[f64]| {
        let (b, a2, b2) = (x[0], x[1], x[2]);
        corr.eval(-b) + corr.eval(-b2) + corr.eval(a2 - b) - corr.eval(a2 - b2)
    };
    let simplex = NelderMead {
        initial_step: step * 0.5,
        ..options.simplex
    };
    let refined: Vec<_> = candidates
        .par_iter()
        .map(|&(_, i, j, k)| {
            let start = [-PI + step * i as f64, -PI + step * j as f64, -PI + step * k as f64];
            simplex.maximize(objective, &start)
        })
        .collect();
    let best = refined
        .into_iter()
        .reduce(|acc, r| if r.value > acc.value { r } else { acc })
        .expect("at least one start");

    let setting = BipartiteSetting::new(p_alice, 0.0, best.x[1], best.x[0], best.x[2]).wrapped();
    let e = setting.differences().map(|d| corr.eval(d));
    Ok(BellReport::from_components(config, m_used, setting, e))
}

/// Which Alice count to use at a given `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartitionRule {
    Fixed(usize),
    HalfN,
}

impl PartitionRule {
    pub fn resolve(&self, total: usize) -> usize {
        match self {
            Self::Fixed(p) => *p,
            Self::HalfN => total / 2,
        }
    }
}

impl FromStr for PartitionRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("N/2") {
            return Ok(Self::HalfN);
        }
        t.parse::<usize>()
            .map(Self::Fixed)
            .map_err(|_| Error::InvalidArgument(format!("bad partition rule `{s}`")))
    }
}

impl fmt::Display for PartitionRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(p) => write!(f, "{p}"),
            Self::HalfN => f.write_str("N/2"),
        }
    }
}

/// One row of the `Qmax` versus `N` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: usize,
    pub rule: PartitionRule,
    pub q_max: f64,
    /// Opening between Alice's two orientations, `φ_a′ − φ_a`, wrapped.
    pub chi_a: f64,
    /// Opening between Bob's two orientations, `φ_b′ − φ_b`, wrapped.
    pub chi_b: f64,
    pub fan_spacing: f64,
    pub is_fan: bool,
    pub violated: bool,
}

impl SweepRow {
    fn from_report(rule: PartitionRule, report: &BellReport) -> Self {
        let s = &report.optimal_setting;
        Self {
            n: report.config.total(),
            p: s.p_alice,
            rule,
            q_max: report.q_value,
            chi_a: wrap_angle(s.angle_a_prime - s.angle_a),
            chi_b: wrap_angle(s.angle_b_prime - s.angle_b),
            fan_spacing: report.fan.spacing,
            is_fan: report.fan.is_fan,
            violated: report.violates_local_bound(),
        }
    }
}

/// `Qmax` for balanced populations at every even `N` in `2..=max_n` and
/// every partition rule whose `P` lies in `1..N`.
pub fn figure1_sweep(max_n: usize, rules: &[PartitionRule]) -> Result<Vec<SweepRow>> {
    figure1_sweep_over(&(2..=max_n).step_by(2).collect::<Vec<_>>(), rules)
}

/// [`figure1_sweep`] over an explicit list of even `N`.
pub fn figure1_sweep_over(totals: &[usize], rules: &[PartitionRule]) -> Result<Vec<SweepRow>> {
    if totals.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least N = 2".into()));
    }
    let mut jobs = Vec::new();
    for &n in totals {
        let config = ExperimentConfig::balanced(n)?;
        for &rule in rules {
            let p = rule.resolve(n);
            if p >= 1 && p < n {
                jobs.push((config, rule, p));
            }
        }
    }
    jobs.par_iter()
        .map(|&(config, rule, p)| maximize_bchsh(config, p).map(|r| SweepRow::from_report(rule, &r)))
        .collect()
}

/// Largest `Q` found when only `m_used` results are correlated or the
/// populations differ.
pub fn no_violation_scan(
    config: ExperimentConfig,
    p_alice: usize,
    m_used: usize,
    grid: usize,
) -> Result<BellReport> {
    let options = MaximizeOptions {
        grid,
        ..MaximizeOptions::default()
    };
    maximize_bchsh_with(config, p_alice, m_used, &options)
}

/// Measurement counts for the four parties. Alice and Carole form the left
/// side of the bipartition, Bob and David the right side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyCounts {
    pub alice: usize,
    pub bob: usize,
    pub carole: usize,
    pub david: usize,
}

impl PartyCounts {
    pub fn new(alice: usize, bob: usize, carole: usize, david: usize) -> Self {
        Self {
            alice,
            bob,
            carole,
            david,
        }
    }

    pub fn total(&self) -> usize {
        self.alice + self.bob + self.carole + self.david
    }

    pub fn left(&self) -> usize {
        self.alice + self.carole
    }
}

/// Two orientations for each of the four parties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultipartySetting {
    pub alice: [f64; 2],
    pub bob: [f64; 2],
    pub carole: [f64; 2],
    pub david: [f64; 2],
}

impl MultipartySetting {
    // x = [a′, c, c′, b, b′, d, d′] with a = 0
    fn from_free(x: &[f64]) -> Self {
        Self {
            alice: [0.0, wrap_angle(x[0])],
            carole: [wrap_angle(x[1]), wrap_angle(x[2])],
            bob: [wrap_angle(x[3]), wrap_angle(x[4])],
            david: [wrap_angle(x[5]), wrap_angle(x[6])],
        }
    }

    fn collapsed(bipartite: &BipartiteSetting) -> [f64; 7] {
        let s = bipartite;
        [
            s.angle_a_prime - s.angle_a,
            0.0,
            s.angle_a_prime - s.angle_a,
            s.angle_b - s.angle_a,
            s.angle_b_prime - s.angle_a,
            s.angle_b - s.angle_a,
            s.angle_b_prime - s.angle_a,
        ]
    }
}

/// Search settings for [`multiparty_collapse`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultipartyOptions {
    pub random_starts: usize,
    pub seed: u64,
    pub simplex: NelderMead,
}

impl Default for MultipartyOptions {
    fn default() -> Self {
        Self {
            random_starts: 48,
            seed: 0x5eed,
            simplex: NelderMead {
                initial_step: 0.3,
                max_evaluations: 60_000,
                ..NelderMead::default()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipartyReport {
    pub config: ExperimentConfig,
    pub counts: PartyCounts,
    /// Reported optimum. Starts from the collapsed bipartite optimum compete
    /// with random starts; a random start wins only if it beats it by 1e-10.
    pub q_max: f64,
    pub setting: MultipartySetting,
    /// Best value reached from random starts alone.
    pub q_random_starts: f64,
    /// Bipartite optimum with `P = alice + carole`.
    pub q_bipartite: f64,
    pub bipartite_setting: BipartiteSetting,
    /// Axis distance (mod π) from each of Carole's and David's orientations
    /// to the nearest Alice/Bob orientation; `None` for a party with no
    /// measurements.
    pub carole_distance: Option<f64>,
    pub david_distance: Option<f64>,
    /// Same distance, largest over Carole and David, for the best
    /// random-start optimum.
    pub random_start_distance: f64,
    pub collapsed: bool,
}

fn axis_distance(x: f64, y: f64) -> f64 {
    let d = x - y;
    (d - PI * (d / PI).round()).abs()
}

fn nearest_axis(angles: &[f64; 2], reference: &[f64]) -> f64 {
    angles
        .iter()
        .map(|&a| {
            reference
                .iter()
                .map(|&r| axis_distance(a, r))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Maximizes the bipartite BCHSH functional for (Alice ∪ Carole) against
/// (Bob ∪ David), where each side's two effective settings pair one
/// orientation of each of its parties.
pub fn multiparty_collapse(
    config: ExperimentConfig,
    counts: PartyCounts,
    options: &MultipartyOptions,
) -> Result<MultipartyReport> {
    let n = config.total();
    if counts.total() != n {
        return Err(Error::CountsMismatch {
            sum: counts.total(),
            expected: n,
        });
    }
    let left = counts.left();
    check_partition(config, left, n)?;

    let bipartite = maximize_bchsh(config, left)?;
    let inner = GroupedCorrelation::new(config, n);
    let objective = |x: &[f64]| {
        let a = [0.0, x[0]];
        let c = [x[1], x[2]];
        let b = [x[3], x[4]];
        let d = [x[5], x[6]];
        let e = |l: usize, r: usize| {
            inner.eval(&[
                (a[l], counts.alice),
                (c[l], counts.carole),
                (b[r], counts.bob),
                (d[r], counts.david),
            ])
        };
        e(0, 0) + e(0, 1) + e(1, 0) - e(1, 1)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut starts: Vec<[f64; 7]> = vec![MultipartySetting::collapsed(&bipartite.optimal_setting)];
    for _ in 0..options.random_starts {
        let mut x = [0.0; 7];
        for v in &mut x {
            *v = rng.random_range(-PI..PI);
        }
        starts.push(x);
    }
    let results: Vec<_> = starts
        .par_iter()
        .map(|x0| options.simplex.maximize(objective, x0))
        .collect();

    let seeded = &results[0];
    let best_random = results[1..]
        .iter()
        .reduce(|acc, r| if r.value > acc.value { r } else { acc });
    let chosen = match best_random {
        Some(r) if r.value > seeded.value + 1e-10 => r,
        _ => seeded,
    };

    let setting = MultipartySetting::from_free(&chosen.x);
    let reference = [setting.alice[0], setting.alice[1], setting.bob[0], setting.bob[1]];
    let carole_distance = (counts.carole > 0).then(|| nearest_axis(&setting.carole, &reference));
    let david_distance = (counts.david > 0).then(|| nearest_axis(&setting.david, &reference));
    let random_start_distance = best_random
        .map(|r| {
            let s = MultipartySetting::from_free(&r.x);
            let reference = [s.alice[0], s.alice[1], s.bob[0], s.bob[1]];
            let c = if counts.carole > 0 { nearest_axis(&s.carole, &reference) } else { 0.0 };
            let d = if counts.david > 0 { nearest_axis(&s.david, &reference) } else { 0.0 };
            c.max(d)
        })
        .unwrap_or(0.0);
    let collapsed = carole_distance.unwrap_or(0.0) <= COLLAPSE_TOLERANCE
        && david_distance.unwrap_or(0.0) <= COLLAPSE_TOLERANCE;

    Ok(MultipartyReport {
        config,
        counts,
        q_max: chosen.value,
        setting,
        q_random_starts: best_random.map_or(f64::NEG_INFINITY, |r| r.value),
        q_bipartite: bipartite.q_value,
        bipartite_setting: bipartite.optimal_setting,
        carole_distance,
        david_distance,
        random_start_distance,
        collapsed,
    })
}
