//! Builders for the three graph families: the series chain (a counter
//! stepping through dial readings), the parallel diamond (clockwise or
//! counterclockwise to a common final state) and the hammer chain (a decay
//! that jump-starts a discretised classical sweep).
//!
//! Every builder uses a single observer, [`OBSERVER`], conscious in
//! component 0 and ready everywhere else.

use std::fmt;

use thiserror::Error;

use crate::dynamics::CurrentParams;
use crate::graph::{BrainStatus, Component, CouplingGraph, Edge, ObserverId};

pub const OBSERVER: ObserverId = ObserverId(0);

/// Component indices of the diamond.
pub const DIAMOND_START: usize = 0;
pub const DIAMOND_RIGHT: usize = 1;
pub const DIAMOND_LEFT: usize = 2;
pub const DIAMOND_FINAL: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("bad scenario: {0}")]
    BadSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    SeriesChain,
    ParallelDiamond,
    HammerChain,
}

impl ScenarioKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::SeriesChain => "series_chain",
            ScenarioKind::ParallelDiamond => "parallel_diamond",
            ScenarioKind::HammerChain => "hammer_chain",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "series_chain" => Some(ScenarioKind::SeriesChain),
            "parallel_diamond" => Some(ScenarioKind::ParallelDiamond),
            "hammer_chain" => Some(ScenarioKind::HammerChain),
            _ => None,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameters of a builder call.
///
/// `n` is the component count (ignored for the diamond). `couplings` holds
/// one rate per edge for the series chain, `[k_0r, k_0l, k_rf, k_lf]` for the
/// diamond and `[k_decay, k_angle]` for the hammer chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub n: usize,
    pub couplings: Vec<f64>,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<CouplingGraph, ScenarioError> {
        match self.kind {
            ScenarioKind::SeriesChain => series_chain(self.n, &self.couplings),
            ScenarioKind::ParallelDiamond => match self.couplings[..] {
                [k0r, k0l, krf, klf] => parallel_diamond(k0r, k0l, krf, klf),
                _ => Err(ScenarioError::BadSpec(format!(
                    "parallel_diamond needs 4 rates, got {}",
                    self.couplings.len()
                ))),
            },
            ScenarioKind::HammerChain => match self.couplings[..] {
                [k_decay, k_angle] => hammer_chain(self.n.saturating_sub(1), k_decay, k_angle),
                _ => Err(ScenarioError::BadSpec(format!(
                    "hammer_chain needs k_decay and k_angle, got {} rates",
                    self.couplings.len()
                ))),
            },
        }
    }
}

fn check_rates(rates: &[f64]) -> Result<(), ScenarioError> {
    match rates.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
        Some(k) => Err(ScenarioError::BadSpec(format!("coupling rate {k} must be finite and >= 0"))),
        None => Ok(()),
    }
}

fn chain(labels: Vec<String>, rates: &[f64]) -> CouplingGraph {
    let n = labels.len();
    let components = labels
        .into_iter()
        .enumerate()
        .map(|(i, label)| {
            let status = if i == 0 { BrainStatus::Conscious } else { BrainStatus::Ready };
            Component::new(i, label).with_status(OBSERVER, status).terminal(i + 1 == n)
        })
        .collect();
    let edges = rates
        .iter()
        .enumerate()
        .map(|(i, &k)| Edge::new(i, i + 1, CurrentParams::rate_linear(k)))
        .collect();
    CouplingGraph::new(components, edges, vec![OBSERVER])
}

/// Nearest-neighbour chain `0 → 1 → … → n−1`; `k[i]` couples `i` and `i+1`.
pub fn series_chain(n: usize, k: &[f64]) -> Result<CouplingGraph, ScenarioError> {
    if n < 2 {
        return Err(ScenarioError::BadSpec(format!("series_chain needs n >= 2, got {n}")));
    }
    if k.len() != n - 1 {
        return Err(ScenarioError::BadSpec(format!(
            "series_chain with n = {n} needs {} rates, got {}",
            n - 1,
            k.len()
        )));
    }
    check_rates(k)?;
    let labels = (0..n).map(|i| format!("A{i}: dial={i}")).collect();
    Ok(chain(labels, k))
}

pub fn series_chain_uniform(n: usize, k: f64) -> Result<CouplingGraph, ScenarioError> {
    series_chain(n, &vec![k; n.saturating_sub(1)])
}

/// Four components `{0, r, l, f}` with edges `0→r`, `0→l`, `r→f`, `l→f`.
/// There is no direct `0→f` coupling.
pub fn parallel_diamond(k_0r: f64, k_0l: f64, k_rf: f64, k_lf: f64) -> Result<CouplingGraph, ScenarioError> {
    check_rates(&[k_0r, k_0l, k_rf, k_lf])?;
    let ready = |i, label: &str| Component::new(i, label).with_status(OBSERVER, BrainStatus::Ready);
    let components = vec![
        Component::new(DIAMOND_START, "A0: initial").with_status(OBSERVER, BrainStatus::Conscious),
        ready(DIAMOND_RIGHT, "Ar: clockwise"),
        ready(DIAMOND_LEFT, "Al: counterclockwise"),
        ready(DIAMOND_FINAL, "Af: final").terminal(true),
    ];
    let e = |s, d, k| Edge::new(s, d, CurrentParams::rate_linear(k));
    let edges = vec![
        e(DIAMOND_START, DIAMOND_RIGHT, k_0r),
        e(DIAMOND_START, DIAMOND_LEFT, k_0l),
        e(DIAMOND_RIGHT, DIAMOND_FINAL, k_rf),
        e(DIAMOND_LEFT, DIAMOND_FINAL, k_lf),
    ];
    Ok(CouplingGraph::new(components, edges, vec![OBSERVER]))
}

/// Undecayed source (hammer vertical) followed by `n_angles` hammer angles
/// sweeping from the first tilt to horizontal. The decay couples the source
/// to the first angle only; each angle couples to the next.
pub fn hammer_chain(n_angles: usize, k_decay: f64, k_angle: f64) -> Result<CouplingGraph, ScenarioError> {
    if n_angles < 2 {
        return Err(ScenarioError::BadSpec(format!(
            "hammer_chain needs at least 2 angles, got {n_angles}"
        )));
    }
    check_rates(&[k_decay, k_angle])?;
    let mut labels = vec!["no decay, hammer vertical".to_string()];
    labels.extend((1..=n_angles).map(|i| {
        let degrees = 90.0 * i as f64 / n_angles as f64;
        format!("hammer at angle {i} ({degrees} deg)")
    }));
    let mut rates = vec![k_decay];
    rates.extend(std::iter::repeat_n(k_angle, n_angles - 1));
    Ok(chain(labels, &rates))
}
