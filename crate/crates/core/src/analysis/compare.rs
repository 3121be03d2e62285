use std::collections::BTreeSet;

use super::{AnalysisError, EnsembleStats};

/// Cells with `|z|` above this are flagged as discrepancies.
pub const Z_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CellComparison {
    pub cell: String,
    pub count_a: u64,
    pub count_b: u64,
    pub p_a: f64,
    pub p_b: f64,
    /// Two-proportion z statistic; 0 when both samples are degenerate and equal.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub n_a: usize,
    pub n_b: usize,
    /// Absorbing-component marginals plus an `unabsorbed` cell.
    pub endpoint_cells: Vec<CellComparison>,
    pub endpoint_tv: f64,
    pub endpoint_discrepancy: bool,
    pub order_cells: Vec<CellComparison>,
    pub order_tv: f64,
    pub orders_only_in_a: Vec<String>,
    pub orders_only_in_b: Vec<String>,
}

impl ComparisonReport {
    pub fn max_abs_endpoint_z(&self) -> f64 {
        self.endpoint_cells.iter().map(|c| c.z.abs()).fold(0.0, f64::max)
    }

    /// Whether the two ensembles observed different sets of visit orders.
    pub fn orders_differ(&self) -> bool {
        !self.orders_only_in_a.is_empty() || !self.orders_only_in_b.is_empty()
    }
}

fn two_proportion_z(x_a: u64, n_a: usize, x_b: u64, n_b: usize) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    let p_a = x_a as f64 / na;
    let p_b = x_b as f64 / nb;
    let pooled = (x_a + x_b) as f64 / (na + nb);
    let se = (pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb)).sqrt();
    if se == 0.0 {
        0.0
    } else {
        (p_a - p_b) / se
    }
}

fn cell(name: String, count_a: u64, n_a: usize, count_b: u64, n_b: usize) -> CellComparison {
    CellComparison {
        cell: name,
        count_a,
        count_b,
        p_a: count_a as f64 / n_a as f64,
        p_b: count_b as f64 / n_b as f64,
        z: two_proportion_z(count_a, n_a, count_b, n_b),
    }
}

fn total_variation(cells: &[CellComparison]) -> f64 {
    0.5 * cells.iter().map(|c| (c.p_a - c.p_b).abs()).sum::<f64>()
}

/// Compare two ensembles over the same graph family.
///
/// The endpoint marginals (which absorbing component is reached, or none)
/// are tested cell by cell with a two-proportion z statistic. Visit orders
/// are compared separately; they are expected to differ when one ensemble
/// runs with the selection rule and the other without.
pub fn compare_statistics(a: &EnsembleStats, b: &EnsembleStats) -> Result<ComparisonReport, AnalysisError> {
    if a.n_components != b.n_components {
        return Err(AnalysisError::IncomparableStats(format!(
            "{} vs {} components",
            a.n_components, b.n_components
        )));
    }
    if a.terminal_components != b.terminal_components {
        return Err(AnalysisError::IncomparableStats(format!(
            "terminal components {:?} vs {:?}",
            a.terminal_components, b.terminal_components
        )));
    }
    if a.n_trajectories == 0 || b.n_trajectories == 0 {
        return Err(AnalysisError::IncomparableStats("empty ensemble".into()));
    }
    let (n_a, n_b) = (a.n_trajectories, b.n_trajectories);

    let mut endpoint_cells: Vec<CellComparison> = a
        .terminal_components
        .iter()
        .map(|c| {
            let ca = a.absorption_counts.get(c).copied().unwrap_or(0);
            let cb = b.absorption_counts.get(c).copied().unwrap_or(0);
            cell(format!("absorbed:{c}"), ca, n_a, cb, n_b)
        })
        .collect();
    endpoint_cells.push(cell(
        "unabsorbed".into(),
        n_a as u64 - a.absorption_count,
        n_a,
        n_b as u64 - b.absorption_count,
        n_b,
    ));
    let endpoint_tv = total_variation(&endpoint_cells);
    let endpoint_discrepancy = endpoint_cells.iter().any(|c| c.z.abs() > Z_THRESHOLD);

    let orders: BTreeSet<&String> = a
        .visit_order_histogram
        .keys()
        .chain(b.visit_order_histogram.keys())
        .collect();
    let order_cells: Vec<CellComparison> = orders
        .into_iter()
        .map(|k| {
            let ca = a.visit_order_histogram.get(k).copied().unwrap_or(0);
            let cb = b.visit_order_histogram.get(k).copied().unwrap_or(0);
            cell(k.clone(), ca, n_a, cb, n_b)
        })
        .collect();
    let order_tv = total_variation(&order_cells);
    let orders_only_in_a = order_cells
        .iter()
        .filter(|c| c.count_b == 0)
        .map(|c| c.cell.clone())
        .collect();
    let orders_only_in_b = order_cells
        .iter()
        .filter(|c| c.count_a == 0)
        .map(|c| c.cell.clone())
        .collect();

    Ok(ComparisonReport {
        n_a,
        n_b,
        endpoint_cells,
        endpoint_tv,
        endpoint_discrepancy,
        order_cells,
        order_tv,
        orders_only_in_a,
        orders_only_in_b,
    })
}
