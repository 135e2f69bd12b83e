//! Spin-measurement statistics for double Fock states of two Bose–Einstein
//! condensates.
//!
//! * [`engine`] evaluates sequence probabilities and product correlations
//!   by exact periodic quadrature.
//! * [`closed_form`] gives the combinatorial correlation for balanced
//!   populations when every particle is measured.
//! * [`fock`] is an independent operator-algebra evaluator used as an oracle
//!   and as the state-collapse engine of the sampler.
//! * [`sampler`] draws measurement trajectories and tracks the emerging
//!   relative phase.
//! * [`bell`] builds and maximizes the BCHSH quantity.

pub mod bell;
pub mod closed_form;
pub mod config;
pub mod engine;
pub mod error;
pub mod fock;
pub mod optimize;
pub mod quadrature;
pub mod sampler;

pub use bell::{
    bchsh_value, figure1_sweep, maximize_bchsh, multiparty_collapse, no_violation_scan, BellReport,
    BipartiteSetting, PartitionRule, PartyCounts,
};
pub use closed_form::{closed_form_correlation, ClosedFormCorrelation};
pub use config::{ExperimentConfig, MeasurementRecord, MeasurementSequence, Outcome};
pub use engine::{correlation, normalization_constant, sequence_probability, CorrelationQuery};
pub use error::{Error, Result};
pub use fock::{apply_detection, initial_state, oracle_sequence_probability, FockVector};
pub use sampler::{estimate_phase, phase_emergence_curve, sample_trajectory, PhaseEstimate, Trajectory};
