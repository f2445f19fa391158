mod common;

use std::f64::consts::PI;

use common::{arb_graph, fixture, random_lengths, triangle_pendant};
use proptest::prelude::*;
use qgraph_core::discrete::{
    discrete_spectrum, equilateral_compare, equilateral_map, is_excluded, kirchhoff_defect, DiscreteLaplacian,
};
use qgraph_core::graph::MetricGraph;
use qgraph_core::spectrum::{eigenvalues, DEFAULT_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kirchhoff_identity_error(g: &MetricGraph, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lap = DiscreteLaplacian::metric_weighted(g);
    let m = g.vertex_masses();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let f: Vec<f64> = (0..g.vertex_count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let delta = lap.apply(&f).unwrap();
        for v in 0..g.vertex_count() {
            let defect = kirchhoff_defect(g, &f, v).unwrap();
            worst = worst.max((defect + m[v] * delta[v]).abs());
        }
    }
    worst
}

#[test]
fn kirchhoff_defect_is_weighted_laplacian() {
    let graphs = [
        fixture("triangle"),
        fixture("k4"),
        fixture("star3"),
        fixture("petersen"),
        triangle_pendant(),
    ];
    for (i, g) in graphs.iter().enumerate() {
        let g = random_lengths(g, 100 + i as u64);
        assert!(kirchhoff_identity_error(&g, i as u64) < 1e-12);
    }
}

#[test]
fn petersen_normalized_spectrum() {
    // adjacency spectrum 3, 1 (x5), -2 (x4) and mu = 1 - a / 3
    let s = discrete_spectrum(&DiscreteLaplacian::normalized(&fixture("petersen")));
    let want = [(0.0, 1), (2.0 / 3.0, 5), (5.0 / 3.0, 4)];
    assert_eq!(s.len(), 3);
    for (d, (v, m)) in s.iter().zip(want) {
        assert!((d.value - v).abs() < 1e-12);
        assert_eq!(d.multiplicity, m);
    }
}

#[test]
fn cycle_normalized_spectrum() {
    let n = 7;
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let g = MetricGraph::from_edges((0..n).map(|i| (ids[i].as_str(), names[i].as_str(), names[(i + 1) % n].as_str(), 1.0))).unwrap();
    let s = discrete_spectrum(&DiscreteLaplacian::normalized(&g));
    for j in 0..=n / 2 {
        let mu = 1.0 - (2.0 * PI * j as f64 / n as f64).cos();
        let d = s.iter().find(|d| (d.value - mu).abs() < 1e-12).unwrap();
        assert_eq!(d.multiplicity, if j == 0 { 1 } else { 2 });
    }
}

#[test]
fn equilateral_compare_on_unit_graphs() {
    for g in [fixture("triangle"), fixture("star3"), fixture("k4"), triangle_pendant()] {
        let r = equilateral_compare(&g, 20.0).unwrap();
        assert!(r.pass, "{:?}", r.mismatches);
    }
}

#[test]
fn map_round_trips_solver_eigenvalues() {
    for name in ["k4", "petersen", "star3"] {
        let ev = eigenvalues(&fixture(name), 20.0, DEFAULT_TOL).unwrap();
        for e in ev.entries().iter().filter(|e| !is_excluded(e.k)) {
            let mu = 1.0 - e.k.cos();
            let back = equilateral_map(mu.clamp(0.0, 2.0), 21.0 * 21.0).unwrap();
            assert!(back.iter().any(|m| (m.k - e.k).abs() < 1e-8), "{name}: {}", e.k);
        }
    }
}

proptest! {
    #![proptest_config(common::proptest_config(64))]

    #[test]
    fn spectra_in_range(g in arb_graph(7)) {
        for (lap, upper) in [
            (DiscreteLaplacian::normalized(&g), 2.0 + 1e-12),
            (DiscreteLaplacian::metric_weighted(&g), f64::INFINITY),
        ] {
            let d = lap.symmetrized();
            prop_assert!((&d - d.transpose()).abs().max() < 1e-12);
            let s = discrete_spectrum(&lap);
            prop_assert!(s[0].value.abs() < 1e-10 && s[0].multiplicity == 1);
            prop_assert!(s.iter().all(|x| x.value >= -1e-12 && x.value <= upper));
            let total: usize = s.iter().map(|x| x.multiplicity).sum();
            prop_assert_eq!(total, g.vertex_count());
            // constants in the kernel
            let ones = vec![1.0; g.vertex_count()];
            prop_assert!(lap.apply(&ones).unwrap().iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn kirchhoff_identity_random(g in arb_graph(6), seed in any::<u64>()) {
        prop_assert!(kirchhoff_identity_error(&g, seed) < 1e-12);
    }
}
