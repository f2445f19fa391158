#![allow(dead_code)]

pub mod oracle;

use std::path::PathBuf;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use qgraph_core::graph::MetricGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/graphs")
        .join(format!("{name}.json"))
}

pub fn fixture(name: &str) -> MetricGraph {
    MetricGraph::from_file(fixture_path(name)).unwrap()
}

pub fn unit_graph(edges: &[(&str, &str)]) -> MetricGraph {
    lengths_graph(edges, &vec![1.0; edges.len()])
}

pub fn lengths_graph(edges: &[(&str, &str)], lengths: &[f64]) -> MetricGraph {
    let ids: Vec<String> = edges.iter().map(|(a, b)| format!("{a}{b}")).collect();
    MetricGraph::from_edges(
        edges
            .iter()
            .zip(&ids)
            .zip(lengths)
            .map(|(((a, b), id), &l)| (id.as_str(), *a, *b, l)),
    )
    .unwrap()
}

/// Triangle with a pendant edge at `a`.
pub fn triangle_pendant() -> MetricGraph {
    unit_graph(&[("a", "b"), ("b", "c"), ("c", "a"), ("a", "d")])
}

const NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

/// Connected simple graph: a spanning path plus the chords selected by `mask`.
pub fn build_graph(n: usize, mask: u64, lengths: &[f64]) -> MetricGraph {
    let mut pairs = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (mask >> bit) & 1 == 1 {
                pairs.push((NAMES[i], NAMES[j]));
            }
            bit += 1;
        }
    }
    let ls: Vec<f64> = (0..pairs.len()).map(|i| lengths[i % lengths.len()]).collect();
    lengths_graph(&pairs, &ls)
}

pub fn arb_graph(max_vertices: usize) -> impl Strategy<Value = MetricGraph> {
    (2..=max_vertices, any::<u64>(), prop::collection::vec(0.1f64..10.0, 1..=28))
        .prop_map(|(n, mask, ls)| build_graph(n, mask, &ls))
}

pub fn random_graph(seed: u64, n: usize) -> MetricGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mask: u64 = rng.random();
    let ls: Vec<f64> = (0..28).map(|_| rng.random_range(0.1..10.0)).collect();
    build_graph(n, mask, &ls)
}

pub fn random_lengths(g: &MetricGraph, seed: u64) -> MetricGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(String, String, String, f64)> = g
        .edges()
        .iter()
        .map(|e| {
            (
                e.id.clone(),
                g.vertex_ids()[e.tail].clone(),
                g.vertex_ids()[e.head].clone(),
                rng.random_range(0.1..10.0),
            )
        })
        .collect();
    MetricGraph::from_edges(edges.iter().map(|(i, a, b, l)| (i.as_str(), a.as_str(), b.as_str(), *l))).unwrap()
}

/// Property-test config with a pinned seed, so every run draws the same cases.
pub fn proptest_config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_0f_9a7e),
        ..ProptestConfig::default()
    }
}
