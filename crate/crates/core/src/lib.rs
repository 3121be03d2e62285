//! Stochastic trajectory simulator for observer-inclusive state reduction.
//!
//! Probability current flows between the components of a superposition along
//! the couplings of a [`CouplingGraph`]; stochastic hits collapse the state
//! onto one component, and an optional selection rule forbids current
//! between two components that both hold a ready brain state of the same
//! observer. With the rule on, a conscious observer experiences every step of
//! a series or parallel sequence.

pub mod analysis;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod graph;
pub mod scenarios;
pub mod trace;

pub use config::RunConfig;
pub use dynamics::{run_trajectory, HitEvent, Termination, Trajectory, TrajectoryState};
pub use graph::{BrainStatus, Component, CouplingGraph, Edge, ObserverId, ValidationReport};
