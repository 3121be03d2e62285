use super::{DynamicsError, TrajectoryState};
use crate::graph::{CouplingGraph, Edge};

/// Largest negative excursion the overshoot correction will absorb silently.
const CLAMP_TOLERANCE: f64 = 1e-9;

/// Probability current through `edge` in the given state. Zero when the
/// selection rule masks the edge.
pub fn current(edge: &Edge, state: &TrajectoryState) -> f64 {
    if !state.is_edge_active(edge.src, edge.dst) {
        return 0.0;
    }
    edge.coupling.flow(state.moduli[edge.src])
}

/// Largest active current divided by the total square modulus.
pub fn max_normalized_current(state: &TrajectoryState, graph: &CouplingGraph) -> f64 {
    let total: f64 = state.moduli.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    state
        .active
        .iter()
        .map(|&i| {
            let e = &graph.edges[i];
            e.coupling.flow(state.moduli[e.src])
        })
        .fold(0.0, f64::max)
        / total
}

fn derivative(graph: &CouplingGraph, active: &[usize], m: &[f64], out: &mut [f64]) {
    out.fill(0.0);
    for &i in active {
        let e = &graph.edges[i];
        let j = e.coupling.flow(m[e.src]);
        out[e.src] -= j;
        out[e.dst] += j;
    }
}

/// Advance the moduli by one classical RK4 step of
/// `dmᵢ/dt = Σ inflow − Σ outflow` over the active edges.
pub fn step(state: &mut TrajectoryState, graph: &CouplingGraph, dt: f64) -> Result<(), DynamicsError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(DynamicsError::BadStep(dt));
    }
    let TrajectoryState {
        moduli,
        active,
        scratch,
        ..
    } = state;
    let n = moduli.len();
    let s = scratch;
    s.start.copy_from_slice(moduli);

    derivative(graph, active, moduli, &mut s.k1);
    for i in 0..n {
        s.tmp[i] = moduli[i] + 0.5 * dt * s.k1[i];
    }
    derivative(graph, active, &s.tmp, &mut s.k2);
    for i in 0..n {
        s.tmp[i] = moduli[i] + 0.5 * dt * s.k2[i];
    }
    derivative(graph, active, &s.tmp, &mut s.k3);
    for i in 0..n {
        s.tmp[i] = moduli[i] + dt * s.k3[i];
    }
    derivative(graph, active, &s.tmp, &mut s.k4);
    for i in 0..n {
        moduli[i] += dt / 6.0 * (s.k1[i] + 2.0 * s.k2[i] + 2.0 * s.k3[i] + s.k4[i]);
    }

    for (component, &value) in moduli.iter().enumerate() {
        if !value.is_finite() {
            return Err(DynamicsError::NonFiniteModulus { component, value });
        }
    }
    clamp_negative(moduli, &s.start)?;
    state.time += dt;
    Ok(())
}

/// Clamp negative moduli to zero and take the deficit back from the
/// components that gained modulus during the step, in proportion to their gain.
fn clamp_negative(moduli: &mut [f64], start: &[f64]) -> Result<(), DynamicsError> {
    let mut deficit = 0.0;
    for (component, m) in moduli.iter_mut().enumerate() {
        if *m < 0.0 {
            if -*m > CLAMP_TOLERANCE {
                return Err(DynamicsError::Overshoot {
                    component,
                    deficit: -*m,
                });
            }
            deficit -= *m;
            *m = 0.0;
        }
    }
    if deficit == 0.0 {
        return Ok(());
    }
    let gains: f64 = moduli
        .iter()
        .zip(start)
        .map(|(m, s)| (m - s).max(0.0))
        .sum();
    if gains > 0.0 {
        for (m, s) in moduli.iter_mut().zip(start) {
            let gain = (*m - s).max(0.0);
            *m = (*m - deficit * gain / gains).max(0.0);
        }
    }
    Ok(())
}
