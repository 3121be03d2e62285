//! Scenario files.
//!
//! A flat, sectioned `key = value` format. `[scenario]` names a builder
//! (`series_chain`, `parallel_diamond`, `hammer_chain`) or `explicit`;
//! explicit graphs list `[component.i]` and `[edge.j]` sections. `[run]`
//! overrides the run configuration defaults. Lines starting with `#` or `;`
//! are comments.
//!
//! ```text
//! [scenario]
//! kind = series_chain
//! n = 4
//! k = 1.0
//!
//! [run]
//! seed = 7
//! rule4 = on
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::RunConfig;
use crate::dynamics::{CurrentModel, CurrentParams};
use crate::graph::{BrainStatus, Component, CouplingGraph, Edge, ObserverId};
use crate::scenarios::{hammer_chain, parallel_diamond, series_chain};

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("{line}:{column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error("cannot read scenario: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    column: usize,
}

impl Entry {
    fn error(&self, message: impl Into<String>) -> ScenarioFileError {
        ScenarioFileError::Parse {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn f64(&self, key: &str) -> Result<f64, ScenarioFileError> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("{key}: expected a number, got {:?}", self.value)))
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, ScenarioFileError> {
        self.value
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| self.error(format!("{key}: expected numbers, got {:?}", self.value)))
            })
            .collect()
    }

    fn usize(&self, key: &str) -> Result<usize, ScenarioFileError> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("{key}: expected a non-negative integer, got {:?}", self.value)))
    }

    fn u64(&self, key: &str) -> Result<u64, ScenarioFileError> {
        self.value
            .parse()
            .map_err(|_| self.error(format!("{key}: expected a 64-bit integer, got {:?}", self.value)))
    }

    fn bool(&self, key: &str) -> Result<bool, ScenarioFileError> {
        match self.value.as_str() {
            "on" | "true" | "yes" => Ok(true),
            "off" | "false" | "no" => Ok(false),
            v => Err(self.error(format!("{key}: expected on/off, got {v:?}"))),
        }
    }
}

#[derive(Debug)]
struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn error(&self, message: impl Into<String>) -> ScenarioFileError {
        ScenarioFileError::Parse {
            line: self.line,
            column: 1,
            message: message.into(),
        }
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<Entry, ScenarioFileError> {
        self.take(key)
            .ok_or_else(|| self.error(format!("[{}] is missing `{key}`", self.name)))
    }

    /// Every key must have been consumed.
    fn finish(self) -> Result<(), ScenarioFileError> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(e.error(format!("unknown key `{k}` in [{}]", self.name))),
            None => Ok(()),
        }
    }
}

fn split_sections(text: &str) -> Result<Vec<Section>, ScenarioFileError> {
    let mut sections: Vec<Section> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let indent = raw.len() - raw.trim_start().len();
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        let parse_err = |column: usize, message: String| ScenarioFileError::Parse { line, column, message };
        if trimmed.starts_with('[') {
            let name = trimmed
                .strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .map(str::trim)
                .filter(|n| !n.is_empty())
                .ok_or_else(|| parse_err(indent + 1, format!("malformed section header {trimmed:?}")))?;
            if sections.iter().any(|s| s.name == name) {
                return Err(parse_err(indent + 1, format!("duplicate section [{name}]")));
            }
            sections.push(Section {
                name: name.to_string(),
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let eq = raw
            .find('=')
            .ok_or_else(|| parse_err(indent + 1, format!("expected `key = value`, got {trimmed:?}")))?;
        let key = raw[..eq].trim();
        if key.is_empty() {
            return Err(parse_err(indent + 1, "empty key".into()));
        }
        let after = &raw[eq + 1..];
        let value = after.trim();
        let column = eq + 2 + (after.len() - after.trim_start().len());
        let section = sections
            .last_mut()
            .ok_or_else(|| parse_err(indent + 1, format!("`{key}` appears before any section")))?;
        if section.entries.contains_key(key) {
            return Err(parse_err(indent + 1, format!("duplicate key `{key}` in [{}]", section.name)));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
                column,
            },
        );
    }
    Ok(sections)
}

fn indexed(name: &str, prefix: &str) -> Option<Result<usize, ()>> {
    name.strip_prefix(prefix).map(|rest| rest.parse().map_err(|_| ()))
}

/// Rates for a builder: either one value broadcast to every edge or an
/// explicit comma-separated list.
fn rates(entry: &Entry, key: &str, count: usize) -> Result<Vec<f64>, ScenarioFileError> {
    let values = entry.f64_list(key)?;
    match values.len() {
        1 => Ok(vec![values[0]; count]),
        n if n == count => Ok(values),
        n => Err(entry.error(format!("{key}: expected 1 or {count} values, got {n}"))),
    }
}

fn validation(message: impl ToString) -> ScenarioFileError {
    ScenarioFileError::Validation(message.to_string())
}

fn build_graph(scenario: &mut Section, components: Vec<Section>, edges: Vec<Section>) -> Result<CouplingGraph, ScenarioFileError> {
    let kind = scenario.require("kind")?;
    let explicit = kind.value == "explicit";
    if !explicit {
        if let Some(s) = components.first().or(edges.first()) {
            return Err(s.error(format!("[{}] is only allowed with kind = explicit", s.name)));
        }
    }
    match kind.value.as_str() {
        "series_chain" => {
            let n_entry = scenario.require("n")?;
            let n = n_entry.usize("n")?;
            if n < 2 {
                return Err(validation(format!("series_chain needs n >= 2 (chain too short), got n = {n}")));
            }
            let k = rates(&scenario.require("k")?, "k", n - 1)?;
            series_chain(n, &k).map_err(validation)
        }
        "parallel_diamond" => {
            let k = match scenario.take("k") {
                Some(e) => rates(&e, "k", 4)?,
                None => {
                    let mut k = Vec::with_capacity(4);
                    for key in ["k_0r", "k_0l", "k_rf", "k_lf"] {
                        k.push(scenario.require(key)?.f64(key)?);
                    }
                    k
                }
            };
            parallel_diamond(k[0], k[1], k[2], k[3]).map_err(validation)
        }
        "hammer_chain" => {
            let n_angles = scenario.require("n_angles")?.usize("n_angles")?;
            let shared = scenario.take("k").map(|e| e.f64("k")).transpose()?;
            let mut get = |key: &str| -> Result<f64, ScenarioFileError> {
                match (scenario.take(key), shared) {
                    (Some(e), _) => e.f64(key),
                    (None, Some(k)) => Ok(k),
                    (None, None) => Err(scenario.error(format!("[scenario] is missing `{key}`"))),
                }
            };
            let k_decay = get("k_decay")?;
            let k_angle = get("k_angle")?;
            hammer_chain(n_angles, k_decay, k_angle).map_err(validation)
        }
        "explicit" => build_explicit(scenario, components, edges),
        other => Err(kind.error(format!("unknown scenario kind {other:?}"))),
    }
}

fn build_explicit(scenario: &mut Section, components: Vec<Section>, edges: Vec<Section>) -> Result<CouplingGraph, ScenarioFileError> {
    let observers: Vec<ObserverId> = match scenario.take("observers") {
        Some(e) => e
            .value
            .split_whitespace()
            .map(|v| {
                v.parse::<u32>()
                    .map(ObserverId)
                    .map_err(|_| e.error(format!("observers: expected integers, got {v:?}")))
            })
            .collect::<Result<_, _>>()?,
        None => Vec::new(),
    };

    let mut built = Vec::with_capacity(components.len());
    for (position, mut s) in components.into_iter().enumerate() {
        let id = match indexed(&s.name, "component.") {
            Some(Ok(id)) => id,
            _ => unreachable!("sections are sorted by index"),
        };
        if id != position {
            return Err(s.error(format!("expected [component.{position}], found [{}]", s.name)));
        }
        let label = s.take("label").map(|e| e.value).unwrap_or_default();
        let terminal = match s.take("terminal") {
            Some(e) => e.bool("terminal")?,
            None => false,
        };
        let mut c = Component::new(id, label).terminal(terminal);
        let brain_keys: Vec<String> = s.entries.keys().filter(|k| k.starts_with("brain.")).cloned().collect();
        for key in brain_keys {
            let e = s.take(&key).expect("key listed");
            let observer = key["brain.".len()..]
                .parse::<u32>()
                .map_err(|_| e.error(format!("bad observer id in `{key}`")))?;
            let status = BrainStatus::parse(&e.value)
                .ok_or_else(|| e.error(format!("expected conscious, ready or absent, got {:?}", e.value)))?;
            c.brain.insert(ObserverId(observer), status);
        }
        s.finish()?;
        built.push(c);
    }

    let mut built_edges = Vec::with_capacity(edges.len());
    for (position, mut s) in edges.into_iter().enumerate() {
        match indexed(&s.name, "edge.") {
            Some(Ok(j)) if j == position => {}
            _ => return Err(s.error(format!("expected [edge.{position}], found [{}]", s.name))),
        }
        let src = s.require("src")?.usize("src")?;
        let dst = s.require("dst")?.usize("dst")?;
        let model = match s.take("model") {
            Some(e) => CurrentModel::parse(&e.value).ok_or_else(|| e.error(format!("unknown current model {:?}", e.value)))?,
            None => CurrentModel::RateLinear,
        };
        let k = s.require("k")?.f64("k")?;
        s.finish()?;
        built_edges.push(Edge::new(src, dst, CurrentParams { model, k }));
    }
    Ok(CouplingGraph::new(built, built_edges, observers))
}

fn apply_run(config: &mut RunConfig, mut run: Section) -> Result<(), ScenarioFileError> {
    if let Some(e) = run.take("dt") {
        config.dt = e.f64("dt")?;
    }
    if let Some(e) = run.take("max_time") {
        config.max_time = e.f64("max_time")?;
    }
    if let Some(e) = run.take("seed") {
        config.seed = e.u64("seed")?;
    }
    if let Some(e) = run.take("rule4") {
        config.rule4_enabled = e.bool("rule4")?;
    }
    if let Some(e) = run.take("n_trajectories") {
        config.n_trajectories = e.usize("n_trajectories")?;
    }
    if let Some(e) = run.take("emit_traces") {
        config.emit_traces = e.bool("emit_traces")?;
    }
    if let Some(e) = run.take("full_trace") {
        config.full_trace = e.bool("full_trace")?;
    }
    if let Some(e) = run.take("output_dir") {
        config.output_dir = PathBuf::from(e.value);
    }
    run.finish()
}

/// Parse scenario text into a validated graph and its run configuration.
pub fn parse_scenario_str(text: &str) -> Result<(CouplingGraph, RunConfig), ScenarioFileError> {
    let sections = split_sections(text)?;
    let mut scenario = None;
    let mut run = None;
    let mut components = Vec::new();
    let mut edges = Vec::new();
    for s in sections {
        match s.name.as_str() {
            "scenario" => scenario = Some(s),
            "run" => run = Some(s),
            name => match (indexed(name, "component."), indexed(name, "edge.")) {
                (Some(Ok(i)), _) => components.push((i, s)),
                (_, Some(Ok(j))) => edges.push((j, s)),
                _ => return Err(s.error(format!("unknown section [{name}]"))),
            },
        }
    }
    components.sort_by_key(|(i, _)| *i);
    edges.sort_by_key(|(j, _)| *j);
    let mut scenario = scenario.ok_or(ScenarioFileError::Parse {
        line: 1,
        column: 1,
        message: "missing [scenario] section".into(),
    })?;
    let graph = build_graph(
        &mut scenario,
        components.into_iter().map(|(_, s)| s).collect(),
        edges.into_iter().map(|(_, s)| s).collect(),
    )?;
    scenario.finish()?;

    let report = graph.validate();
    if !report.is_ok() {
        return Err(validation(report));
    }
    let mut config = RunConfig::for_graph(&graph);
    if let Some(run) = run {
        apply_run(&mut config, run)?;
    }
    config.check().map_err(validation)?;
    Ok((graph, config))
}

pub fn parse_scenario(path: &Path) -> Result<(CouplingGraph, RunConfig), ScenarioFileError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario_str(&text)
}

/// Write `graph` and `config` in the explicit form. Labels are trimmed on
/// parsing, so they should carry no surrounding whitespace or line breaks.
pub fn emit_scenario(graph: &CouplingGraph, config: &RunConfig) -> String {
    let on_off = |b: bool| if b { "on" } else { "off" };
    let mut s = String::from("[scenario]\nkind = explicit\n");
    let observers: Vec<String> = graph.observers.iter().map(|o| o.0.to_string()).collect();
    let _ = writeln!(s, "observers = {}", observers.join(" "));
    for c in &graph.components {
        let _ = write!(
            s,
            "\n[component.{}]\nlabel = {}\nterminal = {}\n",
            c.id, c.apparatus_label, c.terminal
        );
        for (o, status) in &c.brain {
            let _ = writeln!(s, "brain.{o} = {status}");
        }
    }
    for (j, e) in graph.edges.iter().enumerate() {
        let _ = write!(
            s,
            "\n[edge.{j}]\nsrc = {}\ndst = {}\nmodel = {}\nk = {}\n",
            e.src,
            e.dst,
            e.coupling.model.as_str(),
            e.coupling.k
        );
    }
    let _ = write!(
        s,
        "\n[run]\ndt = {}\nmax_time = {}\nseed = {}\nrule4 = {}\nn_trajectories = {}\nemit_traces = {}\nfull_trace = {}\noutput_dir = {}\n",
        config.dt,
        config.max_time,
        config.seed,
        on_off(config.rule4_enabled),
        config.n_trajectories,
        on_off(config.emit_traces),
        on_off(config.full_trace),
        config.output_dir.display()
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::series_chain_uniform;

    #[test]
    fn series_chain_file() {
        let (g, c) = parse_scenario_str("[scenario]\nkind = series_chain\nn = 4\nk = 1.0\n").unwrap();
        assert_eq!(g, series_chain_uniform(4, 1.0).unwrap());
        assert_eq!(c, RunConfig::for_graph(&g));
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.max_time, 50.0);
        assert_eq!(c.seed, 42);
        assert!(c.rule4_enabled);
    }

    #[test]
    fn run_section_overrides() {
        let text = "# comment\n[scenario]\nkind = parallel_diamond\nk = 1, 2, 3, 4\n\n[run]\nseed = 9\nrule4 = off\nn_trajectories = 12\nmax_time = 7.5\n";
        let (g, c) = parse_scenario_str(text).unwrap();
        assert_eq!(g, parallel_diamond(1.0, 2.0, 3.0, 4.0).unwrap());
        assert_eq!(c.seed, 9);
        assert!(!c.rule4_enabled);
        assert_eq!(c.n_trajectories, 12);
        assert_eq!(c.max_time, 7.5);
    }

    #[test]
    fn hammer_file() {
        let (g, _) =
            parse_scenario_str("[scenario]\nkind = hammer_chain\nn_angles = 8\nk_decay = 0.5\nk_angle = 2\n").unwrap();
        assert_eq!(g, hammer_chain(8, 0.5, 2.0).unwrap());
        let (g, _) = parse_scenario_str("[scenario]\nkind = hammer_chain\nn_angles = 3\nk = 1\n").unwrap();
        assert_eq!(g, hammer_chain(3, 1.0, 1.0).unwrap());
    }

    #[test]
    fn short_chain_is_a_validation_error() {
        let err = parse_scenario_str("[scenario]\nkind = series_chain\nn = 1\nk = 1\n").unwrap_err();
        assert!(matches!(err, ScenarioFileError::Validation(ref m) if m.contains("chain too short")), "{err}");
    }

    #[test]
    fn duplicate_edge_named() {
        let text = "[scenario]\nkind = explicit\nobservers = 0\n\
                    [component.0]\nbrain.0 = conscious\n[component.1]\nbrain.0 = ready\nterminal = true\n\
                    [edge.0]\nsrc = 0\ndst = 1\nk = 1\n[edge.1]\nsrc = 0\ndst = 1\nk = 2\n";
        let err = parse_scenario_str(text).unwrap_err();
        assert!(err.to_string().contains("duplicate edge (0,1)"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_scenario_str("[scenario]\nkind = series_chain\nn = four\nk = 1\n").unwrap_err();
        match err {
            ScenarioFileError::Parse { line, column, .. } => assert_eq!((line, column), (3, 5)),
            other => panic!("{other}"),
        }
        let err = parse_scenario_str("[scenario]\nkind = series_chain\nn = 3\nk = 1\nbogus = 2\n").unwrap_err();
        assert!(matches!(err, ScenarioFileError::Parse { line: 5, .. }), "{err}");
        let err = parse_scenario_str("kind = series_chain\n").unwrap_err();
        assert!(matches!(err, ScenarioFileError::Parse { line: 1, .. }));
        let err = parse_scenario_str("[scenario]\nkind = torus\n").unwrap_err();
        assert!(matches!(err, ScenarioFileError::Parse { line: 2, column: 8, .. }), "{err}");
        let err = parse_scenario_str("[scenario]\nkind = series_chain\nn = 3\nn = 4\n").unwrap_err();
        assert!(matches!(err, ScenarioFileError::Parse { line: 4, .. }));
        let err = parse_scenario_str("[scenario]\nkind = series_chain\nn = 3\nk = 1\n[component.0]\n").unwrap_err();
        assert!(matches!(err, ScenarioFileError::Parse { line: 5, .. }));
    }

    #[test]
    fn bad_status_spelling() {
        let text = "[scenario]\nkind = explicit\nobservers = 0\n[component.0]\nbrain.0 = Conscious\n";
        assert!(matches!(
            parse_scenario_str(text),
            Err(ScenarioFileError::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn emitted_builder_graph_round_trips() {
        let g = hammer_chain(4, 0.25, 3.5).unwrap();
        let c = RunConfig::for_graph(&g).with_seed(u64::MAX).with_rule4(false);
        let text = emit_scenario(&g, &c);
        assert_eq!(parse_scenario_str(&text).unwrap(), (g, c));
    }
}
