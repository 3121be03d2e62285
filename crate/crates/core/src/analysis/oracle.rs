//! First-hit distribution by survival-weighted hazard quadrature.
//!
//! Before the first hit the statuses never change, so the moduli obey a
//! fixed linear system `dm/dt = Q m`. The oracle propagates it with the
//! exact one-step propagator `exp(Q dt)` (Taylor series) rather than the
//! RK4 integrator the trajectories use, and accumulates
//!
//! ```text
//! S(t)            = exp(-∫ Σ_c λ_c dτ)
//! P(first hit = c) = ∫ λ_c(t) S(t) dt
//! ```
//!
//! with the trapezoid rule, where `λ_c` is the hit intensity of component `c`.

use super::AnalysisError;
use crate::dynamics::CurrentModel;
use crate::graph::{active_edges, BrainTable, CouplingGraph};

/// Finest resolution demanded of the oracle: `dt · k_max ≤ 1e-4`.
const MAX_RATE_STEP: f64 = 1e-4;
/// Shortest horizon accepted: `horizon · k_min ≥ 20`.
const MIN_RATE_HORIZON: f64 = 20.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FirstHitDistribution {
    /// Probability that each component is the first hit target.
    pub probabilities: Vec<f64>,
    /// Probability of no hit by the horizon.
    pub no_hit: f64,
    pub horizon: f64,
    pub dt: f64,
    pub rule4_enabled: bool,
}

impl FirstHitDistribution {
    pub fn hit_probability(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    /// Versioned text fixture recording the resolution used.
    pub fn to_fixture(&self, scenario: &str) -> String {
        let mut s = String::from("# first-hit oracle fixture\nformat = 1\n");
        s.push_str(&format!("scenario = {scenario}\n"));
        s.push_str(&format!("rule4 = {}\n", if self.rule4_enabled { "on" } else { "off" }));
        s.push_str(&format!("dt = {}\nhorizon = {}\n", self.dt, self.horizon));
        for (i, p) in self.probabilities.iter().enumerate() {
            s.push_str(&format!("p.{i} = {p}\n"));
        }
        s.push_str(&format!("no_hit = {}\n", self.no_hit));
        s
    }

    /// Parse a fixture written by [`to_fixture`](Self::to_fixture); returns
    /// the scenario description alongside the distribution.
    pub fn parse_fixture(text: &str) -> Result<(String, Self), AnalysisError> {
        let mut scenario = None;
        let mut rule4 = None;
        let mut dt = None;
        let mut horizon = None;
        let mut no_hit = None;
        let mut probabilities: Vec<(usize, f64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| AnalysisError::Parse { line, message };
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {trimmed:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let number = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "format" if value == "1" => {}
                "format" => return Err(err(format!("unsupported fixture format {value}"))),
                "scenario" => scenario = Some(value.to_string()),
                "rule4" => {
                    rule4 = Some(match value {
                        "on" => true,
                        "off" => false,
                        _ => return Err(err(format!("rule4 must be on or off, got {value}"))),
                    })
                }
                "dt" => dt = Some(number()?),
                "horizon" => horizon = Some(number()?),
                "no_hit" => no_hit = Some(number()?),
                _ => match key.strip_prefix("p.").map(str::parse::<usize>) {
                    Some(Ok(c)) => probabilities.push((c, number()?)),
                    _ => return Err(err(format!("unknown key {key}"))),
                },
            }
        }
        let missing = |what: &str| AnalysisError::Parse {
            line: 0,
            message: format!("fixture is missing {what}"),
        };
        probabilities.sort_by_key(|(c, _)| *c);
        if probabilities.iter().enumerate().any(|(i, (c, _))| i != *c) {
            return Err(missing("a contiguous p.0..p.n block"));
        }
        Ok((
            scenario.ok_or_else(|| missing("scenario"))?,
            FirstHitDistribution {
                probabilities: probabilities.into_iter().map(|(_, p)| p).collect(),
                no_hit: no_hit.ok_or_else(|| missing("no_hit"))?,
                horizon: horizon.ok_or_else(|| missing("horizon"))?,
                dt: dt.ok_or_else(|| missing("dt"))?,
                rule4_enabled: rule4.ok_or_else(|| missing("rule4"))?,
            },
        ))
    }
}

type Matrix = Vec<Vec<f64>>;

fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// `exp(A)` by Taylor series; only used with `‖A‖ ≤ 1e-4`, where a handful
/// of terms reach machine precision.
fn expm_small(a: &Matrix) -> Matrix {
    let n = a.len();
    let mut result: Matrix = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut term = result.clone();
    for order in 1..=12 {
        term = mat_mul(&term, a);
        let scale = 1.0 / order as f64;
        let mut largest: f64 = 0.0;
        for (row, res_row) in term.iter_mut().zip(result.iter_mut()) {
            for (t, r) in row.iter_mut().zip(res_row.iter_mut()) {
                *t *= scale;
                *r += *t;
                largest = largest.max(t.abs());
            }
        }
        if largest < 1e-20 {
            break;
        }
    }
    result
}

pub fn first_hit_oracle(
    graph: &CouplingGraph,
    rule4_enabled: bool,
    horizon: f64,
    dt: f64,
) -> Result<FirstHitDistribution, AnalysisError> {
    let report = graph.validate();
    if !report.is_ok() {
        return Err(AnalysisError::InvalidGraph(report));
    }
    if !(dt > 0.0) || !(horizon > dt) {
        return Err(AnalysisError::BadResolution(format!("dt = {dt}, horizon = {horizon}")));
    }
    let n = graph.len();
    let table = BrainTable::from_graph(graph);
    let hittable: Vec<bool> = (0..n).map(|c| table.has_ready(c)).collect();
    let edges: Vec<_> = active_edges(graph, rule4_enabled)
        .into_iter()
        .filter(|e| e.coupling.k > 0.0)
        .collect();

    if let Some(k_max) = edges.iter().map(|e| e.coupling.k).reduce(f64::max) {
        let k_min = edges.iter().map(|e| e.coupling.k).fold(f64::INFINITY, f64::min);
        // Slack for dt computed as 1e-4 / k.
        if dt * k_max > MAX_RATE_STEP * (1.0 + 1e-9) {
            return Err(AnalysisError::BadResolution(format!(
                "dt = {dt} exceeds {MAX_RATE_STEP} / k_max = {}",
                MAX_RATE_STEP / k_max
            )));
        }
        if horizon * k_min < MIN_RATE_HORIZON * (1.0 - 1e-9) {
            return Err(AnalysisError::BadResolution(format!(
                "horizon = {horizon} is shorter than {MIN_RATE_HORIZON} / k_min = {}",
                MIN_RATE_HORIZON / k_min
            )));
        }
    }

    // Rate matrix of the pre-hit flow: column = source.
    let mut q: Matrix = vec![vec![0.0; n]; n];
    let mut inflow_rates: Vec<(usize, usize, f64)> = Vec::new();
    for e in &edges {
        let k = match e.coupling.model {
            CurrentModel::RateLinear => e.coupling.k,
        };
        q[e.src][e.src] -= k;
        q[e.dst][e.src] += k;
        if hittable[e.dst] {
            inflow_rates.push((e.src, e.dst, k));
        }
    }
    let scaled: Matrix = q.iter().map(|row| row.iter().map(|v| v * dt).collect()).collect();
    let propagator = expm_small(&scaled);

    let mut m = vec![0.0; n];
    m[graph.initial_component()] = 1.0;
    let intensities = |m: &[f64], out: &mut [f64]| -> bool {
        out.fill(0.0);
        let free: f64 = m.iter().zip(&hittable).filter(|(_, h)| !**h).map(|(v, _)| v).sum();
        let mut any = false;
        for &(src, dst, k) in &inflow_rates {
            out[dst] += k * m[src];
            any |= k * m[src] > 0.0;
        }
        if any && free <= 0.0 {
            return false;
        }
        if free > 0.0 {
            for v in out.iter_mut() {
                *v /= free;
            }
        }
        true
    };

    let steps = (horizon / dt).round() as usize;
    let mut lambda = vec![0.0; n];
    let mut lambda_next = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut probabilities = vec![0.0; n];
    let mut cumulative: f64 = 0.0;
    intensities(&m, &mut lambda);
    for _ in 0..steps {
        for (i, row) in propagator.iter().enumerate() {
            next[i] = row.iter().zip(&m).map(|(p, v)| p * v).sum();
        }
        std::mem::swap(&mut m, &mut next);
        let survival = (-cumulative).exp();
        if !intensities(&m, &mut lambda_next) {
            // Every remaining modulus sits in ready components: whatever
            // survival is left is hit at once, split by the current inflows.
            let weights: Vec<f64> = (0..n)
                .map(|c| {
                    inflow_rates
                        .iter()
                        .filter(|(_, d, _)| *d == c)
                        .map(|(s, _, k)| k * m[*s])
                        .sum()
                })
                .collect();
            let total: f64 = weights.iter().sum();
            for (p, w) in probabilities.iter_mut().zip(&weights) {
                *p += survival * w / total;
            }
            cumulative = f64::INFINITY;
            break;
        }
        let total_now: f64 = lambda.iter().sum();
        let total_next: f64 = lambda_next.iter().sum();
        let cumulative_next = cumulative + 0.5 * dt * (total_now + total_next);
        let survival_next = (-cumulative_next).exp();
        for c in 0..n {
            probabilities[c] += 0.5 * dt * (lambda[c] * survival + lambda_next[c] * survival_next);
        }
        cumulative = cumulative_next;
        std::mem::swap(&mut lambda, &mut lambda_next);
    }

    Ok(FirstHitDistribution {
        probabilities,
        no_hit: (-cumulative).exp(),
        horizon,
        dt,
        rule4_enabled,
    })
}
