//! Monte Carlo ensembles and the statistics built on them.
//!
//! * [`run_ensemble`] runs many independent trajectories and aggregates
//!   visit orders, skips, diamond paths and absorption.
//! * [`first_hit_oracle`] computes the first-hit distribution by
//!   deterministic quadrature; Monte Carlo frequencies are checked against it.
//! * [`compare_statistics`] contrasts two ensembles, separating the endpoint
//!   marginals (expected to agree with and without the selection rule) from
//!   the visit orders (expected to differ).

mod compare;
mod ensemble;
mod oracle;
mod report;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::config::ConfigError;
use crate::dynamics::DynamicsError;
use crate::graph::ValidationReport;

pub use compare::{compare_statistics, CellComparison, ComparisonReport, Z_THRESHOLD};
pub use ensemble::{aggregate_results, audit_mask, run_ensemble, run_ensemble_trajectories, DiamondLayout};
pub use oracle::{first_hit_oracle, FirstHitDistribution};
pub use report::parse_report;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("an ensemble needs at least one trajectory")]
    EmptyEnsemble,
    #[error("graph failed validation: {0}")]
    InvalidGraph(ValidationReport),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("statistics are not comparable: {0}")]
    IncomparableStats(String),
    #[error("oracle resolution too coarse: {0}")]
    BadResolution(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PathCounts {
    pub clockwise: u64,
    pub counterclockwise: u64,
    /// Reached the final state without visiting either intermediate.
    pub direct: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFailure {
    pub index: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub n_requested: usize,
    /// Completed trajectories; failures are listed in `failures`.
    pub n_trajectories: usize,
    pub n_components: usize,
    pub rule4_enabled: bool,
    pub terminal_components: Vec<usize>,
    /// Visit sequence rendered as `0-1-2` → count.
    pub visit_order_histogram: BTreeMap<String, u64>,
    pub first_hit_counts: Vec<u64>,
    pub no_hit_count: u64,
    pub skip_count: u64,
    pub path_counts: Option<PathCounts>,
    pub absorption_count: u64,
    pub absorption_counts: BTreeMap<usize, u64>,
    pub max_time_count: u64,
    pub quiescent_count: u64,
    pub mean_absorption_time: Option<f64>,
    /// Hits whose source edge was forbidden by the selection rule at the
    /// time of the hit.
    pub mask_violations: u64,
    pub failures: Vec<TrajectoryFailure>,
}

impl EnsembleStats {
    pub fn first_hit_fraction(&self, component: usize) -> f64 {
        self.first_hit_counts[component] as f64 / self.n_trajectories as f64
    }

    pub fn absorbed_fraction(&self) -> f64 {
        self.absorption_count as f64 / self.n_trajectories as f64
    }
}

pub fn visit_signature(sequence: &[usize]) -> String {
    let parts: Vec<String> = sequence.iter().map(usize::to_string).collect();
    parts.join("-")
}

/// Fraction of trajectories that skipped a step.
pub fn skip_rate(stats: &EnsembleStats) -> f64 {
    if stats.n_trajectories == 0 {
        return 0.0;
    }
    stats.skip_count as f64 / stats.n_trajectories as f64
}

/// Binomial standard error of a fraction `p` estimated from `n` samples.
pub fn binomial_sigma(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
