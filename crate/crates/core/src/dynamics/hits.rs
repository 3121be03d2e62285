//! Stochastic hits and reduction.
//!
//! `hazard` is the probability per unit time of a hit on a ready component:
//! its inflow current divided by the total square modulus. That density is
//! unconditional. Between collapses the probability that no hit has happened
//! yet equals the share of the total modulus still held by components
//! without a ready brain state (the "free" modulus), so the rate at which a
//! surviving trajectory is hit is `inflow / free` ([`intensity`]). With
//! the selection rule on this makes `∫ hazard dt = 1` a certain hit.

use rand::Rng;

use super::{DynamicsError, HitEvent, TrajectoryState};
use crate::graph::{BrainStatus, CouplingGraph};

/// Upper bound on the total hit probability of a single step.
pub const HIT_PROBABILITY_LIMIT: f64 = 0.1;

pub fn total_modulus(state: &TrajectoryState) -> f64 {
    state.moduli.iter().sum()
}

/// Modulus held by components without a ready brain state.
pub fn free_modulus(state: &TrajectoryState) -> f64 {
    state
        .moduli
        .iter()
        .zip(&state.hittable)
        .filter(|(_, h)| !**h)
        .map(|(m, _)| m)
        .sum()
}

fn inflow(state: &TrajectoryState, graph: &CouplingGraph, target: usize) -> f64 {
    state
        .active
        .iter()
        .map(|&i| &graph.edges[i])
        .filter(|e| e.dst == target)
        .map(|e| e.coupling.flow(state.moduli[e.src]))
        .sum()
}

/// Active inflow into `target` over the total square modulus. Zero for
/// components without a ready brain state.
pub fn hazard(state: &TrajectoryState, graph: &CouplingGraph, target: usize) -> Result<f64, DynamicsError> {
    if target >= graph.len() {
        return Err(DynamicsError::BadTarget(target));
    }
    let total = total_modulus(state);
    if total <= 0.0 {
        return Err(DynamicsError::ZeroTotalModulus);
    }
    if !state.hittable[target] {
        return Ok(0.0);
    }
    Ok(inflow(state, graph, target) / total)
}

/// Hit rate of `target` for a trajectory that has not been hit since the
/// last collapse: `hazard · total / free`.
pub fn intensity(state: &TrajectoryState, graph: &CouplingGraph, target: usize) -> Result<f64, DynamicsError> {
    let h = hazard(state, graph, target)?;
    if h == 0.0 {
        return Ok(0.0);
    }
    let free = free_modulus(state);
    if free <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(h * total_modulus(state) / free)
}

/// Decide whether a hit happens during the step of length `dt` that just
/// ended. Target `c` is hit with probability `intensity(c) · dt`; at most one
/// target per step. The source edge is drawn in proportion to the currents
/// flowing into the target.
pub fn sample_hit(
    state: &mut TrajectoryState,
    graph: &CouplingGraph,
    dt: f64,
) -> Result<Option<HitEvent>, DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::BadStep(dt));
    }
    let mut total = 0.0;
    let mut free = 0.0;
    for (m, h) in state.moduli.iter().zip(&state.hittable) {
        total += m;
        if !h {
            free += m;
        }
    }
    if total <= 0.0 {
        return Err(DynamicsError::ZeroTotalModulus);
    }

    let inflow = &mut state.scratch.inflow;
    inflow.fill(0.0);
    let mut sum_in = 0.0;
    for &i in &state.active {
        let e = &graph.edges[i];
        if state.hittable[e.dst] {
            let j = e.coupling.flow(state.moduli[e.src]);
            inflow[e.dst] += j;
            sum_in += j;
        }
    }
    if sum_in <= 0.0 {
        return Ok(None);
    }
    let probability = if free > 0.0 { sum_in / free * dt } else { f64::INFINITY };
    if !(probability < HIT_PROBABILITY_LIMIT) {
        return Err(DynamicsError::StepTooLarge {
            probability,
            limit: HIT_PROBABILITY_LIMIT,
        });
    }

    let u: f64 = state.rng.random();
    if u >= probability {
        return Ok(None);
    }
    let scale = dt / free;
    let mut acc = 0.0;
    let mut target = None;
    for (c, &j) in inflow.iter().enumerate() {
        if j > 0.0 {
            acc += j * scale;
            target = Some(c);
            if u < acc {
                break;
            }
        }
    }
    let target = target.expect("positive inflow has a target");

    let v: f64 = state.rng.random::<f64>() * inflow[target];
    let mut acc = 0.0;
    let mut source = None;
    for &i in &state.active {
        let e = &graph.edges[i];
        if e.dst != target {
            continue;
        }
        let j = e.coupling.flow(state.moduli[e.src]);
        if j > 0.0 {
            acc += j;
            source = Some(e.pair());
            if v < acc {
                break;
            }
        }
    }

    Ok(Some(HitEvent {
        time: state.time,
        target,
        source_edge: source.expect("target has a positive inflow edge"),
    }))
}

/// Collapse onto the hit target. The surviving modulus is kept as is; the
/// division by the total modulus in [`hazard`] supplies the renormalisation.
/// Every observer ready in the target becomes conscious there, and that
/// observer's previous conscious state reverts to ready.
pub fn reduce(state: &mut TrajectoryState, graph: &CouplingGraph, hit: &HitEvent) -> Result<(), DynamicsError> {
    let target = hit.target;
    if target >= graph.len() {
        return Err(DynamicsError::BadTarget(target));
    }
    for (i, m) in state.moduli.iter_mut().enumerate() {
        if i != target {
            *m = 0.0;
        }
    }
    for slot in 0..state.conscious_at.len() {
        if state.brain.get(target, slot) == BrainStatus::Ready {
            let previous = state.conscious_at[slot];
            state.brain.set(previous, slot, BrainStatus::Ready);
            state.brain.set(target, slot, BrainStatus::Conscious);
            state.conscious_at[slot] = target;
        }
    }
    state.refresh_mask(graph);
    Ok(())
}
