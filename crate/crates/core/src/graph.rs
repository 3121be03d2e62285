//! Components, observers, brain statuses and the coupling graph.
//!
//! A [`CouplingGraph`] is the interaction structure of a superposition
//! `Φ = Σ AᵢBᵢ`: each [`Component`] is one apparatus state entangled with the
//! brain states of zero or more observers, and each [`Edge`] is a coupling
//! through which probability current can flow. The graph is immutable once
//! built; everything that changes during a run lives in
//! [`TrajectoryState`](crate::dynamics::TrajectoryState).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::dynamics::CurrentParams;

/// Identifier of an observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ObserverId(pub u32);

impl fmt::Display for ObserverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BrainStatus {
    Conscious,
    Ready,
    #[default]
    Absent,
}

impl BrainStatus {
    pub const ALL: [BrainStatus; 3] = [BrainStatus::Conscious, BrainStatus::Ready, BrainStatus::Absent];

    /// Spelling used by the scenario file format.
    pub fn as_str(self) -> &'static str {
        match self {
            BrainStatus::Conscious => "conscious",
            BrainStatus::Ready => "ready",
            BrainStatus::Absent => "absent",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "conscious" => Some(BrainStatus::Conscious),
            "ready" => Some(BrainStatus::Ready),
            "absent" => Some(BrainStatus::Absent),
            _ => None,
        }
    }
}

impl fmt::Display for BrainStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One term `AᵢBᵢ` of the superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: usize,
    pub apparatus_label: String,
    /// Per-observer brain status. Observers missing from the map are absent.
    pub brain: BTreeMap<ObserverId, BrainStatus>,
    /// Absorbing: a trajectory ends once this component is conscious.
    pub terminal: bool,
}

impl Component {
    pub fn new(id: usize, label: impl Into<String>) -> Self {
        Component {
            id,
            apparatus_label: label.into(),
            brain: BTreeMap::new(),
            terminal: false,
        }
    }

    pub fn with_status(mut self, observer: ObserverId, status: BrainStatus) -> Self {
        self.brain.insert(observer, status);
        self
    }

    pub fn terminal(mut self, terminal: bool) -> Self {
        self.terminal = terminal;
        self
    }

    pub fn status(&self, observer: ObserverId) -> BrainStatus {
        self.brain.get(&observer).copied().unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub coupling: CurrentParams,
}

impl Edge {
    pub fn new(src: usize, dst: usize, coupling: CurrentParams) -> Self {
        Edge { src, dst, coupling }
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.src, self.dst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingGraph {
    pub components: Vec<Component>,
    pub edges: Vec<Edge>,
    pub observers: Vec<ObserverId>,
}

/// A structural problem found by [`CouplingGraph::validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    ComponentIdMismatch { position: usize, id: usize },
    EdgeOutOfRange { src: usize, dst: usize, len: usize },
    SelfLoop { node: usize },
    DuplicateEdge { src: usize, dst: usize },
    NegativeCoupling { src: usize, dst: usize, k: f64 },
    TerminalWithOutgoing { component: usize, dst: usize },
    MultipleConscious { observer: ObserverId, components: Vec<usize> },
    NoConscious { observer: ObserverId },
    ConsciousSplit { components: Vec<usize> },
    UndeclaredObserver { component: usize, observer: ObserverId },
    DuplicateObserver { observer: ObserverId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "graph has no components"),
            Violation::ComponentIdMismatch { position, id } => {
                write!(f, "component at position {position} has id {id}")
            }
            Violation::EdgeOutOfRange { src, dst, len } => {
                write!(f, "edge ({src},{dst}) out of range for {len} components")
            }
            Violation::SelfLoop { node } => write!(f, "self-loop on component {node}"),
            Violation::DuplicateEdge { src, dst } => write!(f, "duplicate edge ({src},{dst})"),
            Violation::NegativeCoupling { src, dst, k } => {
                write!(f, "edge ({src},{dst}) has invalid coupling k = {k}")
            }
            Violation::TerminalWithOutgoing { component, dst } => {
                write!(f, "terminal component {component} has outgoing edge ({component},{dst})")
            }
            Violation::MultipleConscious { observer, components } => write!(
                f,
                "multiple conscious components for observer {observer}: {components:?}"
            ),
            Violation::NoConscious { observer } => {
                write!(f, "observer {observer} has no conscious component")
            }
            Violation::ConsciousSplit { components } => write!(
                f,
                "conscious brain states are spread over components {components:?}"
            ),
            Violation::UndeclaredObserver { component, observer } => write!(
                f,
                "component {component} references undeclared observer {observer}"
            ),
            Violation::DuplicateObserver { observer } => {
                write!(f, "observer {observer} declared twice")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl CouplingGraph {
    pub fn new(components: Vec<Component>, edges: Vec<Edge>, observers: Vec<ObserverId>) -> Self {
        CouplingGraph {
            components,
            edges,
            observers,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.components.len();
        if n == 0 {
            violations.push(Violation::Empty);
        }
        for (position, c) in self.components.iter().enumerate() {
            if c.id != position {
                violations.push(Violation::ComponentIdMismatch { position, id: c.id });
            }
        }

        let mut seen = BTreeSet::new();
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                violations.push(Violation::EdgeOutOfRange {
                    src: e.src,
                    dst: e.dst,
                    len: n,
                });
                continue;
            }
            if e.src == e.dst {
                violations.push(Violation::SelfLoop { node: e.src });
            }
            if !seen.insert(e.pair()) {
                violations.push(Violation::DuplicateEdge {
                    src: e.src,
                    dst: e.dst,
                });
            }
            // `!(k >= 0)` also catches NaN.
            if !(e.coupling.k >= 0.0) || !e.coupling.k.is_finite() {
                violations.push(Violation::NegativeCoupling {
                    src: e.src,
                    dst: e.dst,
                    k: e.coupling.k,
                });
            }
            if self.components[e.src].terminal {
                violations.push(Violation::TerminalWithOutgoing {
                    component: e.src,
                    dst: e.dst,
                });
            }
        }

        let mut declared = BTreeSet::new();
        for &o in &self.observers {
            if !declared.insert(o) {
                violations.push(Violation::DuplicateObserver { observer: o });
            }
        }
        for c in &self.components {
            for o in c.brain.keys() {
                if !declared.contains(o) {
                    violations.push(Violation::UndeclaredObserver {
                        component: c.id,
                        observer: *o,
                    });
                }
            }
        }

        let mut conscious_holders = BTreeSet::new();
        for &o in &declared {
            let holders: Vec<usize> = self
                .components
                .iter()
                .enumerate()
                .filter(|(_, c)| c.status(o) == BrainStatus::Conscious)
                .map(|(i, _)| i)
                .collect();
            match holders.len() {
                0 => violations.push(Violation::NoConscious { observer: o }),
                1 => {
                    conscious_holders.insert(holders[0]);
                }
                _ => violations.push(Violation::MultipleConscious {
                    observer: o,
                    components: holders,
                }),
            }
        }
        if conscious_holders.len() > 1 {
            violations.push(Violation::ConsciousSplit {
                components: conscious_holders.into_iter().collect(),
            });
        }

        ValidationReport { violations }
    }

    /// Component holding the initial (conscious) state. Falls back to
    /// component 0 for graphs without observers.
    pub fn initial_component(&self) -> usize {
        self.components
            .iter()
            .position(|c| c.brain.values().any(|s| *s == BrainStatus::Conscious))
            .unwrap_or(0)
    }

    /// Largest coupling rate, ignoring inert edges. `None` if every edge is inert.
    pub fn k_max(&self) -> Option<f64> {
        self.edges
            .iter()
            .map(|e| e.coupling.k)
            .filter(|k| *k > 0.0)
            .fold(None, |acc, k| Some(acc.map_or(k, |a: f64| a.max(k))))
    }

    pub fn k_min(&self) -> Option<f64> {
        self.edges
            .iter()
            .map(|e| e.coupling.k)
            .filter(|k| *k > 0.0)
            .fold(None, |acc, k| Some(acc.map_or(k, |a: f64| a.min(k))))
    }

    /// Whether a Hamiltonian coupling `src -> dst` exists.
    pub fn has_edge(&self, src: usize, dst: usize) -> bool {
        self.edges.iter().any(|e| e.src == src && e.dst == dst)
    }
}

/// Dense per-component, per-observer brain-status table.
///
/// The graph stores statuses as sparse maps; the dynamics needs a mutable
/// copy that it can update on every reduction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrainTable {
    observers: Vec<ObserverId>,
    statuses: Vec<BrainStatus>,
}

impl BrainTable {
    pub fn from_graph(graph: &CouplingGraph) -> Self {
        let observers = graph.observers.clone();
        let mut statuses = Vec::with_capacity(graph.len() * observers.len());
        for c in &graph.components {
            statuses.extend(observers.iter().map(|o| c.status(*o)));
        }
        BrainTable {
            observers,
            statuses,
        }
    }

    pub fn observers(&self) -> &[ObserverId] {
        &self.observers
    }

    pub fn row(&self, component: usize) -> &[BrainStatus] {
        let w = self.observers.len();
        &self.statuses[component * w..(component + 1) * w]
    }

    pub fn get(&self, component: usize, slot: usize) -> BrainStatus {
        self.statuses[component * self.observers.len() + slot]
    }

    pub fn set(&mut self, component: usize, slot: usize, status: BrainStatus) {
        let w = self.observers.len();
        self.statuses[component * w + slot] = status;
    }

    /// True if the component holds a ready brain state of any observer,
    /// i.e. it can be the target of a stochastic hit.
    pub fn has_ready(&self, component: usize) -> bool {
        self.row(component).contains(&BrainStatus::Ready)
    }

    pub fn rule4_allowed(&self, src: usize, dst: usize) -> bool {
        rule4_allowed_rows(self.row(src), self.row(dst))
    }
}

/// The selection-rule predicate on two rows of brain statuses indexed by the
/// same observer slots: the transition is forbidden iff some observer is
/// ready in both.
pub fn rule4_allowed_rows(src: &[BrainStatus], dst: &[BrainStatus]) -> bool {
    !src
        .iter()
        .zip(dst)
        .any(|(a, b)| *a == BrainStatus::Ready && *b == BrainStatus::Ready)
}

/// Whether `edge` may carry current under the selection rule, judged by the
/// statuses stored in the graph.
pub fn rule4_allowed(graph: &CouplingGraph, edge: &Edge) -> bool {
    let src = &graph.components[edge.src];
    let dst = &graph.components[edge.dst];
    !src
        .brain
        .iter()
        .any(|(o, s)| *s == BrainStatus::Ready && dst.status(*o) == BrainStatus::Ready)
}

/// Edges that may carry current, sorted by `(src, dst)`.
pub fn active_edges(graph: &CouplingGraph, rule4_enabled: bool) -> Vec<Edge> {
    let mut edges: Vec<Edge> = graph
        .edges
        .iter()
        .filter(|e| !rule4_enabled || rule4_allowed(graph, e))
        .copied()
        .collect();
    edges.sort_by_key(Edge::pair);
    edges
}

/// Indices into `graph.edges` of the edges active under `table`, sorted by `(src, dst)`.
pub fn active_edge_indices(graph: &CouplingGraph, table: &BrainTable, rule4_enabled: bool) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..graph.edges.len())
        .filter(|&i| {
            let e = &graph.edges[i];
            !rule4_enabled || table.rule4_allowed(e.src, e.dst)
        })
        .collect();
    idx.sort_by_key(|&i| graph.edges[i].pair());
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{parallel_diamond, series_chain};

    const O: ObserverId = ObserverId(0);

    fn rate(k: f64) -> CurrentParams {
        CurrentParams::rate_linear(k)
    }

    fn two_ready_chain() -> CouplingGraph {
        CouplingGraph::new(
            vec![
                Component::new(0, "a0").with_status(O, BrainStatus::Conscious),
                Component::new(1, "a1").with_status(O, BrainStatus::Ready),
                Component::new(2, "a2").with_status(O, BrainStatus::Ready).terminal(true),
            ],
            vec![Edge::new(0, 1, rate(1.0)), Edge::new(1, 2, rate(1.0))],
            vec![O],
        )
    }

    #[test]
    fn builder_output_validates() {
        assert!(series_chain(4, &[1.0; 3]).unwrap().validate().is_ok());
    }

    #[test]
    fn two_conscious_components_rejected() {
        let mut g = two_ready_chain();
        g.components[1].brain.insert(O, BrainStatus::Conscious);
        let report = g.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::MultipleConscious { components, .. } if components == &vec![0, 1])));
        assert!(report.to_string().contains("multiple conscious components"));
    }

    #[test]
    fn self_loop_rejected() {
        let mut g = two_ready_chain();
        g.edges.push(Edge::new(2, 2, rate(1.0)));
        let report = g.validate();
        assert!(report.violations.contains(&Violation::SelfLoop { node: 2 }));
        assert!(report.to_string().contains("self-loop"));
    }

    #[test]
    fn structural_violations_reported() {
        let mut g = two_ready_chain();
        g.edges.push(Edge::new(0, 1, rate(2.0)));
        g.edges.push(Edge::new(0, 7, rate(1.0)));
        g.edges.push(Edge::new(2, 0, rate(1.0)));
        g.edges[1].coupling.k = -0.5;
        let v = g.validate().violations;
        assert!(v.contains(&Violation::DuplicateEdge { src: 0, dst: 1 }));
        assert!(v.contains(&Violation::EdgeOutOfRange { src: 0, dst: 7, len: 3 }));
        assert!(v.contains(&Violation::TerminalWithOutgoing { component: 2, dst: 0 }));
        assert!(v.iter().any(|x| matches!(x, Violation::NegativeCoupling { src: 1, dst: 2, .. })));
    }

    #[test]
    fn observer_bookkeeping() {
        let mut g = two_ready_chain();
        g.components[2].brain.insert(ObserverId(3), BrainStatus::Ready);
        assert!(g.validate().violations.contains(&Violation::UndeclaredObserver {
            component: 2,
            observer: ObserverId(3)
        }));

        let mut g = two_ready_chain();
        g.components[0].brain.insert(O, BrainStatus::Ready);
        assert!(g.validate().violations.contains(&Violation::NoConscious { observer: O }));
    }

    #[test]
    fn conscious_states_must_share_a_component() {
        let p = ObserverId(1);
        let mut g = two_ready_chain();
        g.observers.push(p);
        g.components[1].brain.insert(p, BrainStatus::Conscious);
        assert!(g
            .validate()
            .violations
            .contains(&Violation::ConsciousSplit { components: vec![0, 1] }));
    }

    #[test]
    fn ready_to_ready_is_masked() {
        let g = two_ready_chain();
        assert!(rule4_allowed(&g, &g.edges[0]));
        assert!(!rule4_allowed(&g, &g.edges[1]));
    }

    #[test]
    fn ready_states_of_different_observers_do_not_block() {
        let p = ObserverId(1);
        let g = CouplingGraph::new(
            vec![
                Component::new(0, "x")
                    .with_status(O, BrainStatus::Ready)
                    .with_status(p, BrainStatus::Conscious),
                Component::new(1, "y").with_status(p, BrainStatus::Ready),
            ],
            vec![Edge::new(0, 1, rate(1.0))],
            vec![O, p],
        );
        assert!(rule4_allowed(&g, &g.edges[0]));
    }

    #[test]
    fn exhaustive_status_pairs() {
        for a in BrainStatus::ALL {
            for b in BrainStatus::ALL {
                let expected = !(a == BrainStatus::Ready && b == BrainStatus::Ready);
                assert_eq!(rule4_allowed_rows(&[a], &[b]), expected, "{a} -> {b}");
            }
        }
    }

    #[test]
    fn series_mask_leaves_only_first_link() {
        let g = series_chain(4, &[1.0; 3]).unwrap();
        let pairs: Vec<_> = active_edges(&g, true).iter().map(Edge::pair).collect();
        assert_eq!(pairs, vec![(0, 1)]);
        assert_eq!(active_edges(&g, false).len(), 3);
    }

    #[test]
    fn diamond_mask() {
        let g = parallel_diamond(1.0, 1.0, 1.0, 1.0).unwrap();
        let pairs: Vec<_> = active_edges(&g, true).iter().map(Edge::pair).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2)]);
        let all: Vec<_> = active_edges(&g, false).iter().map(Edge::pair).collect();
        assert_eq!(all, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn active_edges_sorted() {
        let mut g = two_ready_chain();
        g.edges.reverse();
        let pairs: Vec<_> = active_edges(&g, false).iter().map(Edge::pair).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn table_matches_graph_predicate() {
        let g = parallel_diamond(1.0, 1.0, 1.0, 1.0).unwrap();
        let table = BrainTable::from_graph(&g);
        for e in &g.edges {
            assert_eq!(table.rule4_allowed(e.src, e.dst), rule4_allowed(&g, e));
        }
        assert!(!table.has_ready(0));
        assert!(table.has_ready(3));
    }
}
