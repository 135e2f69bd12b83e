use std::f64::consts::FRAC_PI_2;

use fockbell::bell::{
    figure1_sweep, maximize_bchsh_with, multiparty_collapse, no_violation_scan, BellReport, MaximizeOptions,
    MultipartyOptions, PartitionRule, PartyCounts, LOCAL_BOUND,
};
use fockbell::engine::correlation_of;
use fockbell::sampler::{phase_emergence_curve, sample_batch, trajectory_steps, AnglePolicy};
use fockbell::{
    closed_form_correlation, oracle_sequence_probability, sequence_probability, ExperimentConfig, MeasurementSequence,
};
use serde_json::{json, Map, Value};

use crate::config::{Command, Format, RunConfig};
use crate::error::{usage, CliResult};
use crate::table::{Cell, Table};
use crate::{selfcheck, Check, Report};

const DEFAULT_EMERGENCE_TRAJECTORIES: usize = 200;

/// Rejects flags the command does not read, so a typo'd combination fails
/// loudly instead of being ignored.
pub fn validate_flags(run: &RunConfig) -> CliResult<()> {
    use Command::*;
    let set = [
        ("--n-plus", run.n_plus.is_some()),
        ("--n-minus", run.n_minus.is_some()),
        ("--n", run.n.is_some()),
        ("--p", !run.p.is_empty()),
        ("--m-used", run.m_used.is_some()),
        ("--angles", !run.angles.is_empty()),
        ("--outcomes", !run.outcomes.is_empty()),
        ("--chi", !run.chi.is_empty()),
        ("--degrees", run.degrees),
        ("--trajectories", run.trajectories.is_some()),
        ("--steps", run.steps.is_some()),
        ("--max-n", run.max_n.is_some()),
        ("--grid", run.grid.is_some()),
        ("--counts", !run.counts.is_empty()),
        ("--log-x", run.log_x),
    ];
    let state = ["--n-plus", "--n-minus", "--n"];
    let allowed: Vec<&str> = match run.command {
        Prob => [&state[..], &["--angles", "--outcomes", "--degrees"]].concat(),
        Correlate => [&state[..], &["--angles", "--degrees"]].concat(),
        ClosedForm => [&state[..], &["--p", "--chi", "--degrees"]].concat(),
        Sample | Emergence => [&state[..], &["--angles", "--degrees", "--trajectories", "--steps"]].concat(),
        Maximize => [&state[..], &["--p", "--m-used", "--grid"]].concat(),
        Figure1 => vec!["--max-n", "--p", "--log-x"],
        ScanNoViolation => [&state[..], &["--p", "--m-used", "--grid"]].concat(),
        Multiparty => [&state[..], &["--counts"]].concat(),
        SelfCheck => vec![],
    };
    let unexpected: Vec<&str> = set
        .iter()
        .filter(|(name, on)| *on && !allowed.contains(name))
        .map(|(name, _)| *name)
        .collect();
    if !unexpected.is_empty() {
        return usage(format!(
            "{} does not accept {}",
            run.command.name(),
            unexpected.join(", ")
        ));
    }
    if run.log_x && run.format() != Format::Svg {
        return usage("--log-x only applies to --format svg");
    }
    if run.format() == Format::Svg && run.command != Figure1 {
        return usage("--format svg is only available for figure1");
    }
    Ok(())
}

pub fn execute(run: &RunConfig) -> CliResult<Report> {
    match run.command {
        Command::Prob => prob(run),
        Command::Correlate => correlate(run),
        Command::ClosedForm => closed_form(run),
        Command::Sample => sample(run),
        Command::Emergence => emergence(run),
        Command::Maximize => maximize(run),
        Command::Figure1 => figure1(run),
        Command::ScanNoViolation => scan_no_violation(run),
        Command::Multiparty => multiparty(run),
        Command::SelfCheck => Ok(selfcheck::run()),
    }
}

fn state(run: &RunConfig) -> CliResult<ExperimentConfig> {
    match (run.n, run.n_plus, run.n_minus) {
        (Some(n), _, _) if !n.is_multiple_of(2) => usage(format!("--n must be even for a balanced state, got {n}")),
        (Some(n), _, _) => Ok(ExperimentConfig::balanced(n)?),
        (None, Some(p), Some(m)) => Ok(ExperimentConfig::new(p, m)),
        _ => usage(format!(
            "{} needs --n-plus and --n-minus, or --n",
            run.command.name()
        )),
    }
}

fn to_radians(run: &RunConfig, values: &[f64]) -> Vec<f64> {
    if run.degrees {
        values.iter().map(|v| v.to_radians()).collect()
    } else {
        values.to_vec()
    }
}

fn required_angles(run: &RunConfig) -> CliResult<Vec<f64>> {
    if run.angles.is_empty() {
        return usage(format!("{} needs --angles", run.command.name()));
    }
    Ok(to_radians(run, &run.angles))
}

fn single_p(run: &RunConfig, total: usize) -> CliResult<usize> {
    match run.p.as_slice() {
        [rule] => Ok(rule.resolve(total)),
        [] => usage(format!("{} needs --p", run.command.name())),
        _ => usage(format!("{} takes a single --p", run.command.name())),
    }
}

fn state_inputs(config: ExperimentConfig) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("n_plus".into(), config.n_plus.into());
    m.insert("n_minus".into(), config.n_minus.into());
    m
}

fn prob(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let angles = required_angles(run)?;
    if run.outcomes.len() != angles.len() {
        return usage(format!(
            "--outcomes has {} entries but --angles has {}",
            run.outcomes.len(),
            angles.len()
        ));
    }
    let seq = MeasurementSequence::from_pairs(&angles, &run.outcomes)?;
    let p = sequence_probability(config, &seq)?;
    let oracle = oracle_sequence_probability(config, &seq)?;

    let mut inputs = state_inputs(config);
    inputs.insert("angles".into(), json!(angles));
    inputs.insert("outcomes".into(), json!(run.outcomes));
    let mut outputs = Map::new();
    outputs.insert("probability".into(), p.into());
    outputs.insert("oracle_probability".into(), oracle.into());
    let mut table = Table::new(vec!["probability", "oracle_probability"]);
    table.push(vec![p.into(), oracle.into()]);
    let diff = (p - oracle).abs();
    Ok(Report {
        inputs,
        outputs,
        checks: vec![Check::new("oracle agreement", diff <= 1e-10, format!("|Δ| = {diff:.3e}"))],
        table: Some(table),
        sweep: None,
    })
}

fn correlate(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let angles = required_angles(run)?;
    let e = correlation_of(config, &angles)?;
    let mut inputs = state_inputs(config);
    inputs.insert("angles".into(), json!(angles));
    let mut outputs = Map::new();
    outputs.insert("correlation".into(), e.into());
    let mut table = Table::new(vec!["correlation"]);
    table.push(vec![e.into()]);
    Ok(Report {
        inputs,
        outputs,
        table: Some(table),
        ..Report::default()
    })
}

fn closed_form(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    if !config.is_balanced() {
        return usage("closed-form needs N+ = N-");
    }
    let total = config.total();
    let p = single_p(run, total)?;
    if run.chi.is_empty() {
        return usage("closed-form needs --chi");
    }
    let chis = to_radians(run, &run.chi);
    let mut table = Table::new(vec!["N", "P", "chi", "correlation"]);
    for &chi in &chis {
        table.push(vec![total.into(), p.into(), chi.into(), closed_form_correlation(total, p, chi)?.into()]);
    }
    let mut inputs = state_inputs(config);
    inputs.insert("p".into(), p.into());
    inputs.insert("chi".into(), json!(chis));
    Ok(Report {
        inputs,
        table: Some(table),
        ..Report::default()
    })
}

fn policy(run: &RunConfig) -> AnglePolicy {
    if run.angles.is_empty() {
        AnglePolicy::Cycle(vec![0.0, FRAC_PI_2])
    } else {
        AnglePolicy::Cycle(to_radians(run, &run.angles))
    }
}

fn sampling_inputs(run: &RunConfig, config: ExperimentConfig, steps: usize, count: usize, seed: u64) -> Map<String, Value> {
    let AnglePolicy::Cycle(cycle) = policy(run);
    let mut inputs = state_inputs(config);
    inputs.insert("angle_cycle".into(), json!(cycle));
    inputs.insert("steps".into(), steps.into());
    inputs.insert("trajectories".into(), count.into());
    inputs.insert("seed".into(), seed.into());
    inputs
}

fn sample(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let seed = run.effective_seed().map_err(crate::CliError::Usage)?;
    let steps = run.steps.unwrap_or(config.total());
    let count = run.trajectories.unwrap_or(1);
    if count == 0 {
        return usage("--trajectories must be positive");
    }
    let angles = policy(run).angles(steps);
    let batch = sample_batch(config, &angles, count, seed)?;
    let mut table = Table::new(vec![
        "trajectory_id",
        "step",
        "angle",
        "outcome",
        "lambda_hat",
        "concentration",
        "posterior_concentration",
    ]);
    for (id, t) in batch.iter().enumerate() {
        for s in trajectory_steps(id, t)? {
            table.push(vec![
                s.trajectory_id.into(),
                s.step.into(),
                s.angle.into(),
                Cell::Int(s.outcome.sign() as i64),
                s.lambda_hat.into(),
                s.concentration.into(),
                s.posterior_concentration.into(),
            ]);
        }
    }
    Ok(Report {
        inputs: sampling_inputs(run, config, steps, count, seed),
        table: Some(table),
        ..Report::default()
    })
}

fn emergence(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let seed = run.effective_seed().map_err(crate::CliError::Usage)?;
    let steps = run.steps.unwrap_or(config.total());
    let count = run.trajectories.unwrap_or(DEFAULT_EMERGENCE_TRAJECTORIES);
    let curve = phase_emergence_curve(config, &policy(run), steps, count, seed)?;
    let mut table = Table::new(vec![
        "step",
        "mean_concentration",
        "mean_posterior_concentration",
        "posterior_std_error",
    ]);
    for p in &curve {
        table.push(vec![
            p.step.into(),
            p.mean_concentration.into(),
            p.mean_posterior_concentration.into(),
            p.posterior_std_error.into(),
        ]);
    }
    Ok(Report {
        inputs: sampling_inputs(run, config, steps, count, seed),
        table: Some(table),
        ..Report::default()
    })
}

fn options(run: &RunConfig) -> CliResult<MaximizeOptions> {
    let mut opts = MaximizeOptions::default();
    if let Some(g) = run.grid {
        if g < 4 {
            return usage("--grid must be at least 4");
        }
        opts.grid = g;
    }
    Ok(opts)
}

fn bell_outputs(r: &BellReport) -> Map<String, Value> {
    let s = &r.optimal_setting;
    let mut m = Map::new();
    m.insert("q_max".into(), r.q_value.into());
    m.insert("e_components".into(), json!(r.e_components));
    m.insert(
        "setting".into(),
        json!({"a": s.angle_a, "a_prime": s.angle_a_prime, "b": s.angle_b, "b_prime": s.angle_b_prime}),
    );
    m.insert("fan_spacing".into(), r.fan.spacing.into());
    m.insert("fan_deviation".into(), r.fan.deviation.into());
    m.insert("is_fan".into(), r.fan.is_fan.into());
    m.insert("violated".into(), r.violates_local_bound().into());
    m
}

fn maximize(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let p = single_p(run, config.total())?;
    let m_used = run.m_used.unwrap_or(config.total());
    let opts = options(run)?;
    let r = maximize_bchsh_with(config, p, m_used, &opts)?;

    let mut inputs = state_inputs(config);
    inputs.insert("p".into(), p.into());
    inputs.insert("m_used".into(), m_used.into());
    inputs.insert("grid".into(), opts.grid.into());
    let s = r.optimal_setting;
    let mut table = Table::new(vec![
        "N", "P", "m_used", "Qmax", "a", "a_prime", "b", "b_prime", "fan_spacing", "is_fan", "violated",
    ]);
    table.push(vec![
        config.total().into(),
        p.into(),
        m_used.into(),
        r.q_value.into(),
        s.angle_a.into(),
        s.angle_a_prime.into(),
        s.angle_b.into(),
        s.angle_b_prime.into(),
        r.fan.spacing.into(),
        r.fan.is_fan.into(),
        r.violates_local_bound().into(),
    ]);
    let within = r.q_value <= fockbell::bell::CIRELSON_BOUND + 1e-12;
    Ok(Report {
        inputs,
        outputs: bell_outputs(&r),
        checks: vec![Check::new("Cirel'son bound", within, format!("Q = {:.12}", r.q_value))],
        table: Some(table),
        sweep: None,
    })
}

fn figure1(run: &RunConfig) -> CliResult<Report> {
    let Some(max_n) = run.max_n else {
        return usage("figure1 needs --max-n");
    };
    if max_n < 2 {
        return usage("--max-n must be at least 2");
    }
    let rules = if run.p.is_empty() {
        vec![PartitionRule::Fixed(1), PartitionRule::Fixed(2), PartitionRule::HalfN]
    } else {
        run.p.clone()
    };
    let rows = figure1_sweep(max_n, &rules)?;
    let mut table = Table::new(vec!["N", "P", "Qmax", "chi_a", "chi_b", "fan_spacing", "violated", "rule"]);
    for r in &rows {
        table.push(vec![
            r.n.into(),
            r.p.into(),
            r.q_max.into(),
            r.chi_a.into(),
            r.chi_b.into(),
            r.fan_spacing.into(),
            r.violated.into(),
            r.rule.to_string().into(),
        ]);
    }
    let mut inputs = Map::new();
    inputs.insert("max_n".into(), max_n.into());
    inputs.insert("p".into(), json!(rules.iter().map(ToString::to_string).collect::<Vec<_>>()));
    let fans = rows.iter().all(|r| r.is_fan);
    Ok(Report {
        inputs,
        outputs: Map::new(),
        checks: vec![Check::new("optimal settings are fans", fans, format!("{} rows", rows.len()))],
        table: Some(table),
        sweep: Some(rows),
    })
}

fn scan_no_violation(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let m_used = run.m_used.unwrap_or(config.total());
    let opts = options(run)?;
    let ps: Vec<usize> = if run.p.is_empty() {
        (1..m_used.max(1)).collect()
    } else {
        run.p.iter().map(|r| r.resolve(m_used)).collect()
    };
    if ps.is_empty() {
        return usage("no partition to scan: m_used must be at least 2");
    }
    let mut table = Table::new(vec!["N", "P", "m_used", "Qmax", "violated"]);
    let mut worst = f64::NEG_INFINITY;
    for &p in &ps {
        let r = no_violation_scan(config, p, m_used, opts.grid)?;
        worst = worst.max(r.q_value);
        table.push(vec![
            config.total().into(),
            p.into(),
            m_used.into(),
            r.q_value.into(),
            r.violates_local_bound().into(),
        ]);
    }
    let mut inputs = state_inputs(config);
    inputs.insert("m_used".into(), m_used.into());
    inputs.insert("p".into(), json!(ps));
    inputs.insert("grid".into(), opts.grid.into());
    let mut outputs = Map::new();
    outputs.insert("max_q".into(), worst.into());
    Ok(Report {
        inputs,
        outputs,
        checks: vec![Check::new(
            "no violation",
            worst <= LOCAL_BOUND + 1e-8,
            format!("max Q = {worst:.12}"),
        )],
        table: Some(table),
        sweep: None,
    })
}

fn multiparty(run: &RunConfig) -> CliResult<Report> {
    let config = state(run)?;
    let [a, b, c, d] = run.counts[..] else {
        return usage("multiparty needs --counts alice,bob,carole,david");
    };
    let counts = PartyCounts::new(a, b, c, d);
    let opts = MultipartyOptions::default();
    let r = multiparty_collapse(config, counts, &opts)?;

    let mut inputs = state_inputs(config);
    inputs.insert("counts".into(), json!([a, b, c, d]));
    inputs.insert("random_starts".into(), opts.random_starts.into());
    inputs.insert("seed".into(), opts.seed.into());
    let mut outputs = Map::new();
    outputs.insert("q_max".into(), r.q_max.into());
    outputs.insert("q_random_starts".into(), r.q_random_starts.into());
    outputs.insert("q_bipartite".into(), r.q_bipartite.into());
    outputs.insert(
        "setting".into(),
        json!({"alice": r.setting.alice, "bob": r.setting.bob, "carole": r.setting.carole, "david": r.setting.david}),
    );
    outputs.insert("carole_distance".into(), json!(r.carole_distance));
    outputs.insert("david_distance".into(), json!(r.david_distance));
    outputs.insert("random_start_distance".into(), r.random_start_distance.into());
    outputs.insert("collapsed".into(), r.collapsed.into());
    let mut table = Table::new(vec!["N", "q_max", "q_random_starts", "q_bipartite", "collapsed"]);
    table.push(vec![
        config.total().into(),
        r.q_max.into(),
        r.q_random_starts.into(),
        r.q_bipartite.into(),
        r.collapsed.into(),
    ]);
    let gap = (r.q_random_starts - r.q_bipartite).abs().max((r.q_max - r.q_bipartite).abs());
    Ok(Report {
        inputs,
        outputs,
        checks: vec![
            Check::new("matches bipartite optimum", gap <= 1e-6, format!("|Δ| = {gap:.3e}")),
            Check::new("angles collapse", r.collapsed, String::new()),
        ],
        table: Some(table),
        sweep: None,
    })
}
