//! Text reports: `key = value` lines followed by `[section]` CSV blocks.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{skip_rate, AnalysisError, ComparisonReport, EnsembleStats, PathCounts, TrajectoryFailure, Z_THRESHOLD};

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

impl EnsembleStats {
    pub fn to_report(&self) -> String {
        let mut s = String::from("# reduction-sim ensemble report\nformat = 1\n");
        let _ = writeln!(s, "n_requested = {}", self.n_requested);
        let _ = writeln!(s, "n_trajectories = {}", self.n_trajectories);
        let _ = writeln!(s, "n_components = {}", self.n_components);
        let _ = writeln!(s, "rule4 = {}", on_off(self.rule4_enabled));
        let terminals: Vec<String> = self.terminal_components.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "terminal_components = {}", terminals.join(" "));
        let _ = writeln!(s, "absorption_count = {}", self.absorption_count);
        let _ = writeln!(s, "max_time_count = {}", self.max_time_count);
        let _ = writeln!(s, "quiescent_count = {}", self.quiescent_count);
        match self.mean_absorption_time {
            Some(t) => {
                let _ = writeln!(s, "mean_absorption_time = {t}");
            }
            None => s.push_str("mean_absorption_time = none\n"),
        }
        let _ = writeln!(s, "no_hit_count = {}", self.no_hit_count);
        let _ = writeln!(s, "skip_count = {}", self.skip_count);
        let _ = writeln!(s, "skip_rate = {}", skip_rate(self));
        let _ = writeln!(s, "mask_violations = {}", self.mask_violations);
        let _ = writeln!(s, "failure_count = {}", self.failures.len());
        if let Some(p) = &self.path_counts {
            let _ = writeln!(s, "path_clockwise = {}", p.clockwise);
            let _ = writeln!(s, "path_counterclockwise = {}", p.counterclockwise);
            let _ = writeln!(s, "path_direct = {}", p.direct);
        }

        s.push_str("\n[visit_order_histogram]\nsequence,count\n");
        for (k, v) in &self.visit_order_histogram {
            let _ = writeln!(s, "{k},{v}");
        }
        s.push_str("\n[first_hit_counts]\ncomponent,count\n");
        for (c, v) in self.first_hit_counts.iter().enumerate() {
            let _ = writeln!(s, "{c},{v}");
        }
        s.push_str("\n[absorption_counts]\ncomponent,count\n");
        for (c, v) in &self.absorption_counts {
            let _ = writeln!(s, "{c},{v}");
        }
        s.push_str("\n[failures]\nindex,message\n");
        for f in &self.failures {
            let _ = writeln!(s, "{},{}", f.index, f.message.replace('\n', " "));
        }
        s
    }
}

impl ComparisonReport {
    pub fn to_report(&self, label_a: &str, label_b: &str) -> String {
        let mut s = String::from(
            "# reduction-sim comparison report\n\
             # assumption: endpoint statistics are the marginals of the absorbing component \
             (plus unabsorbed); visit orders are reported separately and may legitimately differ\n\
             format = 1\n",
        );
        let _ = writeln!(s, "label_a = {label_a}");
        let _ = writeln!(s, "label_b = {label_b}");
        let _ = writeln!(s, "n_a = {}", self.n_a);
        let _ = writeln!(s, "n_b = {}", self.n_b);
        let _ = writeln!(s, "z_threshold = {Z_THRESHOLD}");
        let _ = writeln!(s, "endpoint_tv = {}", self.endpoint_tv);
        let _ = writeln!(s, "endpoint_max_abs_z = {}", self.max_abs_endpoint_z());
        let _ = writeln!(s, "endpoint_discrepancy = {}", self.endpoint_discrepancy);
        let _ = writeln!(s, "order_tv = {}", self.order_tv);
        let _ = writeln!(s, "orders_differ = {}", self.orders_differ());
        let _ = writeln!(s, "orders_only_in_a = {}", self.orders_only_in_a.join(" "));
        let _ = writeln!(s, "orders_only_in_b = {}", self.orders_only_in_b.join(" "));
        for (title, cells) in [("endpoint_marginals", &self.endpoint_cells), ("visit_orders", &self.order_cells)] {
            let _ = write!(s, "\n[{title}]\ncell,count_a,count_b,p_a,p_b,z\n");
            for c in cells {
                let _ = writeln!(s, "{},{},{},{},{},{}", c.cell, c.count_a, c.count_b, c.p_a, c.p_b, c.z);
            }
        }
        s
    }
}

/// Parse a report written by [`EnsembleStats::to_report`].
pub fn parse_report(text: &str) -> Result<EnsembleStats, AnalysisError> {
    let mut scalars: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut blocks: BTreeMap<String, Vec<(usize, String)>> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(name) = trimmed.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = Some(name.to_string());
            blocks.entry(name.to_string()).or_default();
            continue;
        }
        match &section {
            Some(name) => blocks.get_mut(name).expect("section created").push((line, trimmed.to_string())),
            None => {
                let (k, v) = trimmed.split_once('=').ok_or(AnalysisError::Parse {
                    line,
                    message: format!("expected key = value, got {trimmed:?}"),
                })?;
                scalars.insert(k.trim().to_string(), (line, v.trim().to_string()));
            }
        }
    }

    let raw = |key: &str| -> Result<(usize, String), AnalysisError> {
        scalars.get(key).cloned().ok_or(AnalysisError::Parse {
            line: 0,
            message: format!("missing key {key}"),
        })
    };
    let num = |key: &str| -> Result<u64, AnalysisError> {
        let (line, v) = raw(key)?;
        v.parse().map_err(|e| AnalysisError::Parse {
            line,
            message: format!("{key}: {e}"),
        })
    };
    if raw("format")?.1 != "1" {
        return Err(AnalysisError::Parse {
            line: raw("format")?.0,
            message: "unsupported report format".into(),
        });
    }

    // Data rows of a CSV block, header dropped, split at the first comma.
    let rows = |name: &str| -> Result<Vec<(usize, String, String)>, AnalysisError> {
        let block = blocks.get(name).ok_or(AnalysisError::Parse {
            line: 0,
            message: format!("missing section [{name}]"),
        })?;
        block
            .iter()
            .skip(1)
            .map(|(line, l)| {
                l.split_once(',')
                    .map(|(a, b)| (*line, a.to_string(), b.to_string()))
                    .ok_or(AnalysisError::Parse {
                        line: *line,
                        message: format!("expected two columns in [{name}]"),
                    })
            })
            .collect()
    };
    let int = |line: usize, v: &str| -> Result<u64, AnalysisError> {
        v.parse().map_err(|e| AnalysisError::Parse {
            line,
            message: format!("{e}"),
        })
    };

    let n_components = num("n_components")? as usize;
    let mut first_hit_counts = vec![0; n_components];
    for (line, c, v) in rows("first_hit_counts")? {
        let c = int(line, &c)? as usize;
        if c >= n_components {
            return Err(AnalysisError::Parse {
                line,
                message: format!("component {c} out of range"),
            });
        }
        first_hit_counts[c] = int(line, &v)?;
    }
    let mut visit_order_histogram = BTreeMap::new();
    for (line, k, v) in rows("visit_order_histogram")? {
        visit_order_histogram.insert(k, int(line, &v)?);
    }
    let mut absorption_counts = BTreeMap::new();
    for (line, c, v) in rows("absorption_counts")? {
        absorption_counts.insert(int(line, &c)? as usize, int(line, &v)?);
    }
    let mut failures = Vec::new();
    for (line, idx, message) in rows("failures")? {
        failures.push(TrajectoryFailure {
            index: int(line, &idx)?,
            message,
        });
    }

    let path_counts = if scalars.contains_key("path_clockwise") {
        Some(PathCounts {
            clockwise: num("path_clockwise")?,
            counterclockwise: num("path_counterclockwise")?,
            direct: num("path_direct")?,
        })
    } else {
        None
    };
    let (line, rule4) = raw("rule4")?;
    let rule4_enabled = match rule4.as_str() {
        "on" => true,
        "off" => false,
        other => {
            return Err(AnalysisError::Parse {
                line,
                message: format!("rule4 must be on or off, got {other}"),
            })
        }
    };
    let (line, terminals) = raw("terminal_components")?;
    let terminal_components = terminals
        .split_whitespace()
        .map(|t| int(line, t).map(|v| v as usize))
        .collect::<Result<_, _>>()?;
    let (line, mean) = raw("mean_absorption_time")?;
    let mean_absorption_time = match mean.as_str() {
        "none" => None,
        v => Some(v.parse().map_err(|e| AnalysisError::Parse {
            line,
            message: format!("mean_absorption_time: {e}"),
        })?),
    };

    Ok(EnsembleStats {
        n_requested: num("n_requested")? as usize,
        n_trajectories: num("n_trajectories")? as usize,
        n_components,
        rule4_enabled,
        terminal_components,
        visit_order_histogram,
        first_hit_counts,
        no_hit_count: num("no_hit_count")?,
        skip_count: num("skip_count")?,
        path_counts,
        absorption_count: num("absorption_count")?,
        absorption_counts,
        max_time_count: num("max_time_count")?,
        quiescent_count: num("quiescent_count")?,
        mean_absorption_time,
        mask_violations: num("mask_violations")?,
        failures,
    })
}
