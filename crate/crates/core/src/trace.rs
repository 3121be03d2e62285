//! CSV output: hit events and square-modulus time series.

use std::io::{self, Write};

use crate::dynamics::{Trajectory, TrajectoryState};

pub const EVENT_HEADER: &str = "traj_id,t,src,dst,target";

/// Downsampled traces keep at most this many rows.
pub const TRACE_ROW_LIMIT: usize = 10_000;

pub fn write_events_csv<W: Write>(mut w: W, trajectories: &[Trajectory]) -> io::Result<()> {
    writeln!(w, "{EVENT_HEADER}")?;
    for t in trajectories {
        for e in &t.events {
            writeln!(
                w,
                "{},{},{},{},{}",
                t.index, e.time, e.source_edge.0, e.source_edge.1, e.target
            )?;
        }
    }
    Ok(())
}

/// Square moduli recorded after every step of one trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModulusTrace {
    n_components: usize,
    times: Vec<f64>,
    moduli: Vec<f64>,
}

impl ModulusTrace {
    pub fn new(n_components: usize) -> Self {
        ModulusTrace {
            n_components,
            ..Default::default()
        }
    }

    pub fn record(&mut self, state: &TrajectoryState) {
        debug_assert_eq!(state.moduli().len(), self.n_components);
        self.times.push(state.time());
        self.moduli.extend_from_slice(state.moduli());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn row(&self, i: usize) -> (f64, &[f64]) {
        let n = self.n_components;
        (self.times[i], &self.moduli[i * n..(i + 1) * n])
    }

    pub fn header(&self) -> String {
        let mut h = String::from("t");
        for i in 0..self.n_components {
            h.push_str(&format!(",m_{i}"));
        }
        h.push_str(",total");
        h
    }

    /// Write `t,m_0,...,m_{n-1},total`. With `row_limit`, rows are taken at a
    /// uniform stride so that at most `row_limit` are written.
    pub fn write_csv<W: Write>(&self, mut w: W, row_limit: Option<usize>) -> io::Result<()> {
        writeln!(w, "{}", self.header())?;
        let stride = match row_limit {
            Some(limit) if limit > 0 && self.len() > limit => self.len().div_ceil(limit),
            _ => 1,
        };
        for i in (0..self.len()).step_by(stride) {
            let (t, m) = self.row(i);
            write!(w, "{t}")?;
            for v in m {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{}", m.iter().sum::<f64>())?;
        }
        Ok(())
    }
}
