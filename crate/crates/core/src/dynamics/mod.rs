//! Square-modulus flow, stochastic hits and reduction.
//!
//! The engine integrates the square moduli `|cᵢ|²` directly: every active
//! edge carries a probability current from its source to its destination,
//! and a component holding a ready brain state is hit with probability per
//! unit time equal to its inflow divided by the total square modulus. A hit
//! zeroes every other component and makes the hit component conscious.

mod flow;
mod hits;
mod run;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::ConfigError;
use crate::graph::{active_edge_indices, BrainStatus, BrainTable, CouplingGraph, ObserverId, ValidationReport};

pub use flow::{current, max_normalized_current, step};
pub use hits::{free_modulus, hazard, intensity, reduce, sample_hit, total_modulus, HIT_PROBABILITY_LIMIT};
pub use run::{run_trajectory, run_trajectory_with, QUIESCENT_CURRENT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurrentModel {
    /// `J = k · m_src`.
    RateLinear,
}

impl CurrentModel {
    pub fn as_str(self) -> &'static str {
        match self {
            CurrentModel::RateLinear => "rate_linear",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "rate_linear" => Some(CurrentModel::RateLinear),
            _ => None,
        }
    }
}

/// Parameters of the current carried by one edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentParams {
    pub model: CurrentModel,
    /// Coupling rate (1/time). Zero means structurally present but inert.
    pub k: f64,
}

impl CurrentParams {
    pub fn rate_linear(k: f64) -> Self {
        CurrentParams {
            model: CurrentModel::RateLinear,
            k,
        }
    }

    #[inline]
    pub fn flow(&self, src_modulus: f64) -> f64 {
        match self.model {
            CurrentModel::RateLinear => self.k * src_modulus,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("graph failed validation: {0}")]
    InvalidGraph(ValidationReport),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("modulus of component {component} became non-finite ({value})")]
    NonFiniteModulus { component: usize, value: f64 },
    #[error("total square modulus is zero")]
    ZeroTotalModulus,
    #[error("hit probability per step {probability} reaches the {limit} limit; reduce dt")]
    StepTooLarge { probability: f64, limit: f64 },
    #[error("integrator overshoot of {deficit} below zero on component {component}; reduce dt")]
    Overshoot { component: usize, deficit: f64 },
    #[error("dt must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("hit target {0} out of range")]
    BadTarget(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitEvent {
    pub time: f64,
    pub target: usize,
    pub source_edge: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    Absorbed,
    MaxTime,
    Quiescent,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Absorbed => "absorbed",
            Termination::MaxTime => "max_time",
            Termination::Quiescent => "quiescent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub index: u64,
    pub events: Vec<HitEvent>,
    /// Initial conscious component followed by each hit target.
    pub visit_sequence: Vec<usize>,
    pub terminated: Termination,
    pub end_time: f64,
}

impl Trajectory {
    pub fn first_hit(&self) -> Option<usize> {
        self.events.first().map(|e| e.target)
    }

    pub fn absorbed_at(&self) -> Option<usize> {
        match self.terminated {
            Termination::Absorbed => self.visit_sequence.last().copied(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
    start: Vec<f64>,
    inflow: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        let z = vec![0.0; n];
        Scratch {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z.clone(),
            start: z.clone(),
            inflow: z,
        }
    }
}

/// Mutable state of one trajectory. Exclusively owned by a single run.
#[derive(Debug, Clone)]
pub struct TrajectoryState {
    moduli: Vec<f64>,
    time: f64,
    brain: BrainTable,
    /// Conscious component per observer slot of `brain`.
    conscious_at: Vec<usize>,
    rng: ChaCha8Rng,
    rule4_enabled: bool,
    /// Indices into `graph.edges` currently carrying current.
    active: Vec<usize>,
    /// Components holding a ready brain state.
    hittable: Vec<bool>,
    scratch: Scratch,
}

impl TrajectoryState {
    /// Fresh state at `t = 0` with unit modulus on the initial component.
    ///
    /// The RNG stream is ChaCha8 seeded with `seed` and switched to stream
    /// `stream`, so trajectory `i` of an ensemble is independent of the
    /// scheduling of the others.
    pub fn new(graph: &CouplingGraph, rule4_enabled: bool, seed: u64, stream: u64) -> Result<Self, DynamicsError> {
        let report = graph.validate();
        if !report.is_ok() {
            return Err(DynamicsError::InvalidGraph(report));
        }
        let n = graph.len();
        let mut moduli = vec![0.0; n];
        moduli[graph.initial_component()] = 1.0;
        let brain = BrainTable::from_graph(graph);
        let conscious_at = (0..brain.observers().len())
            .map(|slot| {
                (0..n)
                    .find(|&c| brain.get(c, slot) == BrainStatus::Conscious)
                    .expect("validated graph has one conscious component per observer")
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let mut state = TrajectoryState {
            moduli,
            time: 0.0,
            brain,
            conscious_at,
            rng,
            rule4_enabled,
            active: Vec::new(),
            hittable: Vec::new(),
            scratch: Scratch::new(n),
        };
        state.refresh_mask(graph);
        Ok(state)
    }

    fn refresh_mask(&mut self, graph: &CouplingGraph) {
        self.active = active_edge_indices(graph, &self.brain, self.rule4_enabled);
        self.hittable = (0..graph.len()).map(|c| self.brain.has_ready(c)).collect();
    }

    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    /// Overwrite the moduli, e.g. to start from a prepared distribution.
    pub fn set_moduli(&mut self, moduli: &[f64]) {
        assert_eq!(moduli.len(), self.moduli.len(), "modulus vector length");
        self.moduli.copy_from_slice(moduli);
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn rule4_enabled(&self) -> bool {
        self.rule4_enabled
    }

    pub fn brain(&self) -> &BrainTable {
        &self.brain
    }

    pub fn status(&self, component: usize, observer: ObserverId) -> BrainStatus {
        match self.brain.observers().iter().position(|o| *o == observer) {
            Some(slot) => self.brain.get(component, slot),
            None => BrainStatus::Absent,
        }
    }

    pub fn conscious_component(&self, observer: ObserverId) -> Option<usize> {
        let slot = self.brain.observers().iter().position(|o| *o == observer)?;
        Some(self.conscious_at[slot])
    }

    /// Whether any observer is conscious in `component`.
    pub fn is_conscious(&self, component: usize) -> bool {
        self.conscious_at.contains(&component)
    }

    pub fn is_hittable(&self, component: usize) -> bool {
        self.hittable[component]
    }

    /// Active edges as `(src, dst)` pairs in stable order.
    pub fn active_pairs(&self, graph: &CouplingGraph) -> Vec<(usize, usize)> {
        self.active.iter().map(|&i| graph.edges[i].pair()).collect()
    }

    pub fn is_edge_active(&self, src: usize, dst: usize) -> bool {
        !self.rule4_enabled || self.brain.rule4_allowed(src, dst)
    }
}
