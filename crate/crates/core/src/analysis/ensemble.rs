use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use super::{visit_signature, AnalysisError, EnsembleStats, PathCounts, TrajectoryFailure};
use crate::config::RunConfig;
use crate::dynamics::{run_trajectory_with, DynamicsError, Termination, Trajectory};
use crate::graph::{BrainStatus, BrainTable, CouplingGraph};
use crate::scenarios::{DIAMOND_FINAL, DIAMOND_LEFT, DIAMOND_RIGHT, DIAMOND_START};

/// Component roles of a graph shaped like the parallel diamond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiamondLayout {
    pub start: usize,
    pub right: usize,
    pub left: usize,
    pub last: usize,
}

impl DiamondLayout {
    /// Recognise the diamond built by `parallel_diamond`.
    pub fn detect(graph: &CouplingGraph) -> Option<Self> {
        if graph.len() != 4 {
            return None;
        }
        let pairs: BTreeSet<(usize, usize)> = graph.edges.iter().map(|e| e.pair()).collect();
        let expected: BTreeSet<(usize, usize)> = [
            (DIAMOND_START, DIAMOND_RIGHT),
            (DIAMOND_START, DIAMOND_LEFT),
            (DIAMOND_RIGHT, DIAMOND_FINAL),
            (DIAMOND_LEFT, DIAMOND_FINAL),
        ]
        .into_iter()
        .collect();
        (pairs == expected).then_some(DiamondLayout {
            start: DIAMOND_START,
            right: DIAMOND_RIGHT,
            left: DIAMOND_LEFT,
            last: DIAMOND_FINAL,
        })
    }
}

/// Run trajectories `0..n` of the configured seed and keep them all.
pub fn run_ensemble_trajectories(
    graph: &CouplingGraph,
    config: &RunConfig,
    n: usize,
) -> Result<Vec<Result<Trajectory, DynamicsError>>, AnalysisError> {
    if n == 0 {
        return Err(AnalysisError::EmptyEnsemble);
    }
    let report = graph.validate();
    if !report.is_ok() {
        return Err(AnalysisError::InvalidGraph(report));
    }
    config.check()?;
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| run_trajectory_with(graph, config, i, |_| {}))
        .collect())
}

pub fn run_ensemble(graph: &CouplingGraph, config: &RunConfig, n: usize) -> Result<EnsembleStats, AnalysisError> {
    let results = run_ensemble_trajectories(graph, config, n)?;
    Ok(aggregate_results(graph, config.rule4_enabled, &results))
}

/// Count hits whose source edge the selection rule forbade at the time of
/// the hit, by replaying the brain statuses from the graph along the visit
/// sequence. Also counts hits through edges the graph does not contain.
pub fn audit_mask(graph: &CouplingGraph, rule4_enabled: bool, trajectory: &Trajectory) -> u64 {
    let mut table = BrainTable::from_graph(graph);
    let slots = table.observers().len();
    let mut conscious: Vec<Option<usize>> = (0..slots)
        .map(|s| (0..graph.len()).find(|&c| table.get(c, s) == BrainStatus::Conscious))
        .collect();
    let mut violations = 0;
    for hit in &trajectory.events {
        let (src, dst) = hit.source_edge;
        if dst != hit.target || !graph.has_edge(src, dst) {
            violations += 1;
            continue;
        }
        if rule4_enabled && !table.rule4_allowed(src, dst) {
            violations += 1;
        }
        for (slot, slot_conscious) in conscious.iter_mut().enumerate() {
            if table.get(hit.target, slot) == BrainStatus::Ready {
                if let Some(prev) = *slot_conscious {
                    table.set(prev, slot, BrainStatus::Ready);
                }
                table.set(hit.target, slot, BrainStatus::Conscious);
                *slot_conscious = Some(hit.target);
            }
        }
    }
    violations
}

pub fn aggregate_results(graph: &CouplingGraph, rule4_enabled: bool, results: &[Result<Trajectory, DynamicsError>]) -> EnsembleStats {
    let n_components = graph.len();
    let diamond = DiamondLayout::detect(graph);
    let mut stats = EnsembleStats {
        n_requested: results.len(),
        n_trajectories: 0,
        n_components,
        rule4_enabled,
        terminal_components: (0..n_components).filter(|&c| graph.components[c].terminal).collect(),
        visit_order_histogram: BTreeMap::new(),
        first_hit_counts: vec![0; n_components],
        no_hit_count: 0,
        skip_count: 0,
        path_counts: diamond.map(|_| PathCounts::default()),
        absorption_count: 0,
        absorption_counts: BTreeMap::new(),
        max_time_count: 0,
        quiescent_count: 0,
        mean_absorption_time: None,
        mask_violations: 0,
        failures: Vec::new(),
    };
    let mut absorption_time_sum = 0.0;

    for (i, result) in results.iter().enumerate() {
        let t = match result {
            Ok(t) => t,
            Err(e) => {
                stats.failures.push(TrajectoryFailure {
                    index: i as u64,
                    message: e.to_string(),
                });
                continue;
            }
        };
        stats.n_trajectories += 1;
        *stats
            .visit_order_histogram
            .entry(visit_signature(&t.visit_sequence))
            .or_insert(0) += 1;
        match t.first_hit() {
            Some(c) => stats.first_hit_counts[c] += 1,
            None => stats.no_hit_count += 1,
        }
        if t.visit_sequence.windows(2).any(|w| !graph.has_edge(w[0], w[1])) {
            stats.skip_count += 1;
        }
        if let (Some(layout), Some(counts)) = (diamond, stats.path_counts.as_mut()) {
            let seq = &t.visit_sequence;
            if seq.contains(&layout.right) {
                counts.clockwise += 1;
            } else if seq.contains(&layout.left) {
                counts.counterclockwise += 1;
            } else if seq.contains(&layout.last) {
                counts.direct += 1;
            }
        }
        match t.terminated {
            Termination::Absorbed => {
                stats.absorption_count += 1;
                absorption_time_sum += t.end_time;
                if let Some(c) = t.absorbed_at() {
                    *stats.absorption_counts.entry(c).or_insert(0) += 1;
                }
            }
            Termination::MaxTime => stats.max_time_count += 1,
            Termination::Quiescent => stats.quiescent_count += 1,
        }
        stats.mask_violations += audit_mask(graph, rule4_enabled, t);
    }
    if stats.absorption_count > 0 {
        stats.mean_absorption_time = Some(absorption_time_sum / stats.absorption_count as f64);
    }
    stats
}
