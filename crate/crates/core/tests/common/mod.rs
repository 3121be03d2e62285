#![allow(dead_code)]

use std::path::PathBuf;

use reduction_sim::analysis::{first_hit_oracle, FirstHitDistribution};
use reduction_sim::scenarios::{hammer_chain, parallel_diamond, series_chain_uniform};
use reduction_sim::CouplingGraph;

pub const ORACLE_DT: f64 = 1e-5;
pub const ORACLE_HORIZON: f64 = 20.0;

/// Golden oracle fixtures: file name, description, graph, rule-4 setting.
pub fn fixture_cases() -> Vec<(&'static str, &'static str, CouplingGraph, bool)> {
    vec![
        ("series2_rule4_on.txt", "series_chain n=2 k=1", series_chain_uniform(2, 1.0).unwrap(), true),
        ("series3_rule4_off.txt", "series_chain n=3 k=1", series_chain_uniform(3, 1.0).unwrap(), false),
        ("series4_rule4_on.txt", "series_chain n=4 k=1", series_chain_uniform(4, 1.0).unwrap(), true),
        ("series4_rule4_off.txt", "series_chain n=4 k=1", series_chain_uniform(4, 1.0).unwrap(), false),
        (
            "diamond_rule4_on.txt",
            "parallel_diamond k=1,1,1,1",
            parallel_diamond(1.0, 1.0, 1.0, 1.0).unwrap(),
            true,
        ),
        (
            "diamond_rule4_off.txt",
            "parallel_diamond k=1,1,1,1",
            parallel_diamond(1.0, 1.0, 1.0, 1.0).unwrap(),
            false,
        ),
        ("hammer8_rule4_on.txt", "hammer_chain n_angles=8 k_decay=1 k_angle=1", hammer_chain(8, 1.0, 1.0).unwrap(), true),
        ("hammer8_rule4_off.txt", "hammer_chain n_angles=8 k_decay=1 k_angle=1", hammer_chain(8, 1.0, 1.0).unwrap(), false),
    ]
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn load_fixture(name: &str) -> FirstHitDistribution {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    FirstHitDistribution::parse_fixture(&text).unwrap().1
}

pub fn compute(graph: &CouplingGraph, rule4: bool) -> FirstHitDistribution {
    first_hit_oracle(graph, rule4, ORACLE_HORIZON, ORACLE_DT).unwrap()
}
