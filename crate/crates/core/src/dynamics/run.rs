use super::{max_normalized_current, reduce, sample_hit, step, DynamicsError, Termination, Trajectory, TrajectoryState};
use crate::config::RunConfig;
use crate::graph::CouplingGraph;

/// Threshold below which every normalised active current counts as zero.
pub const QUIESCENT_CURRENT: f64 = 1e-12;

/// Run trajectory 0 of the configured seed.
pub fn run_trajectory(graph: &CouplingGraph, config: &RunConfig) -> Result<Trajectory, DynamicsError> {
    run_trajectory_with(graph, config, 0, |_| {})
}

/// Run trajectory `index` of the configured seed, calling `on_step` with the
/// state at `t = 0` and after every integrator step (after any reduction).
pub fn run_trajectory_with<F>(
    graph: &CouplingGraph,
    config: &RunConfig,
    index: u64,
    mut on_step: F,
) -> Result<Trajectory, DynamicsError>
where
    F: FnMut(&TrajectoryState),
{
    config.check()?;
    let mut state = TrajectoryState::new(graph, config.rule4_enabled, config.seed, index)?;
    let start = graph.initial_component();
    let mut traj = Trajectory {
        index,
        events: Vec::new(),
        visit_sequence: vec![start],
        terminated: Termination::MaxTime,
        end_time: 0.0,
    };
    on_step(&state);

    if graph.components[start].terminal && state.is_conscious(start) {
        traj.terminated = Termination::Absorbed;
        return Ok(traj);
    }

    let dt = config.dt;
    let terminated = loop {
        if state.time() >= config.max_time {
            break Termination::MaxTime;
        }
        step(&mut state, graph, dt)?;
        if let Some(hit) = sample_hit(&mut state, graph, dt)? {
            reduce(&mut state, graph, &hit)?;
            traj.events.push(hit);
            traj.visit_sequence.push(hit.target);
            on_step(&state);
            if graph.components[hit.target].terminal && state.is_conscious(hit.target) {
                break Termination::Absorbed;
            }
            continue;
        }
        on_step(&state);
        if max_normalized_current(&state, graph) < QUIESCENT_CURRENT {
            break Termination::Quiescent;
        }
    };
    traj.terminated = terminated;
    traj.end_time = state.time();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BrainStatus, Component, ObserverId};
    use crate::scenarios::{hammer_chain, parallel_diamond, series_chain};

    fn config(g: &CouplingGraph, rule4: bool, seed: u64) -> RunConfig {
        RunConfig::for_graph(g).with_rule4(rule4).with_seed(seed)
    }

    #[test]
    fn series_chain_visits_every_step() {
        let g = series_chain(4, &[1.0; 3]).unwrap();
        for seed in 0..50 {
            let t = run_trajectory(&g, &config(&g, true, seed)).unwrap();
            assert_eq!(t.visit_sequence, vec![0, 1, 2, 3]);
            assert_eq!(t.terminated, Termination::Absorbed);
            assert!(t.events.windows(2).all(|w| w[0].time < w[1].time));
            for e in &t.events {
                assert_eq!(e.source_edge.1, e.target);
            }
        }
    }

    #[test]
    fn terminal_start_is_absorbed() {
        let o = ObserverId(0);
        let g = CouplingGraph::new(
            vec![Component::new(0, "only").with_status(o, BrainStatus::Conscious).terminal(true)],
            vec![],
            vec![o],
        );
        let c = RunConfig::for_graph(&g);
        let t = run_trajectory(&g, &c).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.terminated, Termination::Absorbed);
        assert_eq!(t.visit_sequence, vec![0]);
    }

    #[test]
    fn two_chain_single_hit_absorbs() {
        let g = series_chain(2, &[1.0]).unwrap();
        let t = run_trajectory(&g, &config(&g, true, 3)).unwrap();
        assert_eq!(t.visit_sequence, vec![0, 1]);
        assert_eq!(t.terminated, Termination::Absorbed);
    }

    #[test]
    fn diamond_never_jumps_straight_to_final() {
        let g = parallel_diamond(1.0, 1.0, 1.0, 1.0).unwrap();
        for seed in 0..100 {
            let t = run_trajectory(&g, &config(&g, true, seed)).unwrap();
            assert!(
                t.visit_sequence == vec![0, 1, 3] || t.visit_sequence == vec![0, 2, 3],
                "{:?}",
                t.visit_sequence
            );
        }
    }

    #[test]
    fn inert_source_goes_quiescent() {
        let g = hammer_chain(3, 0.0, 1.0).unwrap();
        let t = run_trajectory(&g, &config(&g, true, 1)).unwrap();
        assert!(t.events.is_empty());
        assert_eq!(t.terminated, Termination::Quiescent);
    }

    #[test]
    fn short_horizon_hits_max_time() {
        let g = series_chain(4, &[1.0; 3]).unwrap();
        let c = config(&g, true, 1).with_max_time(0.01);
        let t = run_trajectory(&g, &c).unwrap();
        assert_eq!(t.terminated, Termination::MaxTime);
        assert!(t.end_time >= 0.01);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let g = series_chain(5, &[1.0, 0.5, 2.0, 1.0]).unwrap();
        let c = config(&g, false, 99);
        let a = run_trajectory_with(&g, &c, 17, |_| {}).unwrap();
        let b = run_trajectory_with(&g, &c, 17, |_| {}).unwrap();
        assert_eq!(a, b);
        let other = run_trajectory_with(&g, &c, 18, |_| {}).unwrap();
        assert_ne!(a.events, other.events);
    }

    #[test]
    fn observer_sees_every_step_callback() {
        let g = series_chain(3, &[1.0, 1.0]).unwrap();
        let c = config(&g, true, 5);
        let mut rows = 0usize;
        let t = run_trajectory_with(&g, &c, 0, |_| rows += 1).unwrap();
        let steps = (t.end_time / c.dt).round() as usize;
        assert_eq!(rows, steps + 1);
    }
}
