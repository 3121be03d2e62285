use std::path::PathBuf;

use thiserror::Error;

use crate::graph::CouplingGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub max_time: f64,
    pub seed: u64,
    pub rule4_enabled: bool,
    pub n_trajectories: usize,
    pub emit_traces: bool,
    /// Write every integrator step to the trace instead of downsampling.
    pub full_trace: bool,
    pub output_dir: PathBuf,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("dt must be positive and finite, got {0}")]
    BadDt(f64),
    #[error("max_time ({max_time}) must exceed dt ({dt})")]
    BadHorizon { dt: f64, max_time: f64 },
    #[error("n_trajectories must be at least 1")]
    NoTrajectories,
}

pub const DEFAULT_SEED: u64 = 42;

impl RunConfig {
    /// Defaults scaled to the graph's couplings: `dt = 1e-3 / k_max`,
    /// `max_time = 50 / k_min`, seed 42, selection rule on.
    pub fn for_graph(graph: &CouplingGraph) -> Self {
        let k_max = graph.k_max().unwrap_or(1.0);
        let k_min = graph.k_min().unwrap_or(1.0);
        RunConfig {
            dt: 1e-3 / k_max,
            max_time: 50.0 / k_min,
            seed: DEFAULT_SEED,
            rule4_enabled: true,
            n_trajectories: 1000,
            emit_traces: false,
            full_trace: false,
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn with_rule4(mut self, on: bool) -> Self {
        self.rule4_enabled = on;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_time(mut self, max_time: f64) -> Self {
        self.max_time = max_time;
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(ConfigError::BadDt(self.dt));
        }
        if !(self.max_time > self.dt) {
            return Err(ConfigError::BadHorizon {
                dt: self.dt,
                max_time: self.max_time,
            });
        }
        if self.n_trajectories == 0 {
            return Err(ConfigError::NoTrajectories);
        }
        Ok(())
    }
}
