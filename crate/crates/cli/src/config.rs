use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use fockbell::PartitionRule;

/// Environment variable that takes precedence over `--seed`.
pub const SEED_ENV: &str = "FOCKBELL_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Prob,
    Correlate,
    ClosedForm,
    Sample,
    Emergence,
    Maximize,
    Figure1,
    ScanNoViolation,
    Multiparty,
    SelfCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Prob => "prob",
            Self::Correlate => "correlate",
            Self::ClosedForm => "closed-form",
            Self::Sample => "sample",
            Self::Emergence => "emergence",
            Self::Maximize => "maximize",
            Self::Figure1 => "figure1",
            Self::ScanNoViolation => "scan-no-violation",
            Self::Multiparty => "multiparty",
            Self::SelfCheck => "self-check",
        }
    }

    pub fn default_format(self) -> Format {
        match self {
            Self::Sample | Self::Emergence | Self::Figure1 => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Spin-measurement statistics and Bell tests for double Fock states.
#[derive(Debug, Clone, Parser)]
#[command(name = "fockbell", version)]
pub struct RunConfig {
    /// Operation to run.
    #[arg(value_enum)]
    pub command: Command,

    /// Particles in the `+` mode.
    #[arg(long)]
    pub n_plus: Option<usize>,
    /// Particles in the `-` mode.
    #[arg(long)]
    pub n_minus: Option<usize>,
    /// Total particle number of a balanced state, N/2 in each mode.
    #[arg(long, conflicts_with_all = ["n_plus", "n_minus"])]
    pub n: Option<usize>,
    /// Alice's measurement count, or a comma-separated list where `N/2`
    /// resolves per particle number.
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<PartitionRule>,
    /// Number of results correlated (defaults to N).
    #[arg(long)]
    pub m_used: Option<usize>,
    /// Comma-separated detector angles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Vec<f64>,
    /// Comma-separated outcomes, each +1 or -1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub outcomes: Vec<i64>,
    /// Comma-separated angle differences for `closed-form`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub chi: Vec<f64>,
    /// Interpret angles and angle differences in degrees.
    #[arg(long)]
    pub degrees: bool,
    /// Base seed; trajectory i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of sampled trajectories.
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Measurements per trajectory (defaults to N).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Largest N in a `figure1` sweep.
    #[arg(long)]
    pub max_n: Option<usize>,
    /// Points per axis of the coarse optimizer grid.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Party sizes for `multiparty` as alice,bob,carole,david.
    #[arg(long, value_delimiter = ',')]
    pub counts: Vec<usize>,
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Logarithmic N axis in SVG plots.
    #[arg(long)]
    pub log_x: bool,
}

impl RunConfig {
    pub fn format(&self) -> Format {
        self.format.unwrap_or(self.command.default_format())
    }

    /// `--seed`, unless the environment overrides it.
    pub fn effective_seed(&self) -> Result<u64, String> {
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| format!("{SEED_ENV} must be an unsigned integer, got `{v}`")),
            Err(_) => Ok(self.seed),
        }
    }
}
