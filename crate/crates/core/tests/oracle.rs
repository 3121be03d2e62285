//! The first-hit oracle against closed forms, and the golden fixtures
//! against a fresh oracle run.

mod common;

use reduction_sim::analysis::first_hit_oracle;
use reduction_sim::scenarios::{parallel_diamond, series_chain_uniform};
use statrs::function::erf::erfc;

use common::{compute, fixture_cases, fixture_path, load_fixture};

/// Composite Simpson rule on [a, b].
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let h = (b - a) / intervals as f64;
    let mut sum = f(a) + f(b);
    for i in 1..intervals {
        let x = a + i as f64 * h;
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    sum * h / 3.0
}

#[test]
fn three_chain_skip_probability_closed_form() {
    // Intensities 1 (into 1) and t (into 2); P(first = 2) = ∫ t exp(-t - t²/2) dt.
    let exact = 1.0 - (std::f64::consts::PI / 2.0).sqrt() * 0.5f64.exp() * erfc(1.0 / 2f64.sqrt());
    let by_quadrature = simpson(|t| t * (-t - t * t / 2.0).exp(), 0.0, 20.0, 200_000);
    assert!((exact - by_quadrature).abs() < 1e-10);

    let d = first_hit_oracle(&series_chain_uniform(3, 1.0).unwrap(), false, 20.0, 1e-5).unwrap();
    assert!((d.probabilities[2] - exact).abs() < 1e-8, "{} vs {exact}", d.probabilities[2]);
    assert!((d.probabilities[1] - (1.0 - exact)).abs() < 1e-8);
    assert!(d.no_hit < 1e-80);
}

#[test]
fn diamond_direct_probability_closed_form() {
    // With unit rates the intensity into f is 2(e^t - 1); substituting
    // v = e^t - 1 gives P(first = f) = ∫ 2v/(1+v) e^{-2v} dv.
    let exact = simpson(|v| 2.0 * v / (1.0 + v) * (-2.0 * v).exp(), 0.0, 40.0, 400_000);
    let d = first_hit_oracle(&parallel_diamond(1.0, 1.0, 1.0, 1.0).unwrap(), false, 20.0, 1e-5).unwrap();
    assert!((d.probabilities[3] - exact).abs() < 1e-8, "{} vs {exact}", d.probabilities[3]);
    assert!((d.probabilities[1] - d.probabilities[2]).abs() < 1e-12);
}

#[test]
fn isolated_pair_hit_is_certain() {
    for k in [0.5, 1.0, 4.0] {
        let d = first_hit_oracle(&series_chain_uniform(2, k).unwrap(), true, 20.0 / k, 1e-4 / k).unwrap();
        assert!(d.probabilities[1] >= 0.999, "k = {k}: {}", d.probabilities[1]);
    }
}

#[test]
fn fixtures_match_fresh_oracle() {
    for (name, _, graph, rule4) in fixture_cases() {
        let golden = load_fixture(name);
        let fresh = compute(&graph, rule4);
        assert_eq!(golden.rule4_enabled, rule4, "{name}");
        assert_eq!(golden.dt, fresh.dt, "{name}");
        assert_eq!(golden.horizon, fresh.horizon, "{name}");
        for (g, f) in golden.probabilities.iter().zip(&fresh.probabilities) {
            assert!((g - f).abs() < 1e-12, "{name}: {g} vs {f}");
        }
    }
}

/// Rewrites the golden fixtures: `cargo test --test oracle -- --ignored`.
#[test]
#[ignore]
fn regenerate_fixtures() {
    for (name, description, graph, rule4) in fixture_cases() {
        let d = compute(&graph, rule4);
        std::fs::write(fixture_path(name), d.to_fixture(description)).unwrap();
    }
}
