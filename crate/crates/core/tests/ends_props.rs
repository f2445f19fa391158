mod common;

use common::fixture_path;
use proptest::prelude::*;
use qgraph_core::ends::{
    classify, count_ends, markovian_uniqueness, total_volume, Criterion, EndCount, EndGadget, EndedGraph,
    SelfAdjointness, SequenceLaw, Volume,
};
use qgraph_core::graph::GraphSpec;

fn load(name: &str) -> EndedGraph {
    EndedGraph::from_file(fixture_path(name)).unwrap()
}

fn point() -> GraphSpec {
    GraphSpec {
        vertices: vec!["o".into()],
        edges: vec![],
    }
}

/// `ln law(j)` without forming `law(j)`, which underflows long before
/// `b^(j+1) law(j)` becomes negligible.
fn ln_length(law: &SequenceLaw, j: usize) -> f64 {
    match law {
        SequenceLaw::Constant { a } => a.ln(),
        SequenceLaw::Geometric { a, q } => a.ln() + j as f64 * q.ln(),
        SequenceLaw::Power { a, s } => a.ln() - s * ((j + 1) as f64).ln(),
        SequenceLaw::Prefix { prefix, tail } => match prefix.get(j) {
            Some(x) => x.ln(),
            None => ln_length(tail, j - prefix.len()),
        },
    }
}

fn partial(law: &SequenceLaw, b: u32, n: usize) -> f64 {
    (0..n)
        .map(|j| ((j + 1) as f64 * (b as f64).ln() + ln_length(law, j)).exp())
        .sum()
}

/// Upper bound on `sum_{j >= n} b^(j+1) law(j)` for convergent laws.
fn tail_bound(law: &SequenceLaw, b: u32, n: usize) -> f64 {
    let bf = b as f64;
    match law {
        SequenceLaw::Constant { .. } => f64::INFINITY,
        SequenceLaw::Geometric { a, q } => a * bf * (bf * q).powi(n as i32) / (1.0 - bf * q),
        // sum_{m > n} m^(-s) <= n^(1-s) / (s - 1)
        SequenceLaw::Power { a, s } => a * (n as f64).powf(1.0 - s) / (s - 1.0),
        SequenceLaw::Prefix { prefix, tail } => bf.powi(prefix.len() as i32) * tail_bound(tail, b, n - prefix.len()),
    }
}

fn arb_base_law() -> impl Strategy<Value = SequenceLaw> {
    prop_oneof![
        (0.1f64..5.0).prop_map(|a| SequenceLaw::Constant { a }),
        (0.1f64..5.0, 0.05f64..1.5).prop_map(|(a, q)| SequenceLaw::Geometric { a, q }),
        (0.1f64..5.0, 0.5f64..3.0).prop_map(|(a, s)| SequenceLaw::Power { a, s }),
    ]
}

fn arb_law() -> impl Strategy<Value = SequenceLaw> {
    prop_oneof![
        arb_base_law(),
        (prop::collection::vec(0.1f64..5.0, 1..4), arb_base_law()).prop_map(|(prefix, tail)| SequenceLaw::Prefix {
            prefix,
            tail: Box::new(tail)
        }),
    ]
}

fn arb_gadget() -> impl Strategy<Value = EndGadget> {
    prop_oneof![
        arb_law().prop_map(|law| EndGadget::Ray { attach: "o".into(), law }),
        (2u32..5, arb_law()).prop_map(|(branching, law)| EndGadget::Tree {
            attach: "o".into(),
            branching,
            law
        }),
    ]
}

#[test]
fn fixture_verdicts() {
    let z = classify(&load("z_ray2")).unwrap();
    assert_eq!(z.end_count, EndCount::Finite(2));
    assert!(z.markovian_unique);
    assert_eq!(z.self_adjoint, SelfAdjointness::Yes { criterion: Criterion::Ii });

    let g = classify(&load("ray_geometric")).unwrap();
    assert_eq!(g.end_count, EndCount::Finite(1));
    assert_eq!(g.gadgets[0].end_volume, Volume::Finite(2.0));
    assert!(!g.markovian_unique);
    assert!(matches!(g.self_adjoint, SelfAdjointness::No { .. }));

    let h = classify(&load("ray_harmonic")).unwrap();
    assert!(h.markovian_unique);
    assert_eq!(h.self_adjoint, SelfAdjointness::Yes { criterion: Criterion::Iii });

    let t = classify(&load("tree3")).unwrap();
    assert_eq!(t.end_count, EndCount::Infinite);
    assert!(t.markovian_unique);
    assert_eq!(t.self_adjoint, SelfAdjointness::Yes { criterion: Criterion::Ii });
}

#[test]
fn core_plus_ray_volume() {
    let core = GraphSpec {
        vertices: vec!["a".into(), "b".into()],
        edges: vec![qgraph_core::graph::EdgeSpec::new("e", "a", "b", 3.0)],
    };
    let d = EndedGraph::new(
        core,
        vec![EndGadget::Ray {
            attach: "b".into(),
            law: SequenceLaw::Geometric { a: 1.0, q: 0.5 },
        }],
    )
    .unwrap();
    assert_eq!(total_volume(&d), Volume::Finite(5.0));
    assert_eq!(count_ends(&d), EndCount::Finite(1));
}

#[test]
fn divergent_laws_exceed_bounds() {
    assert!(partial(&SequenceLaw::Constant { a: 1.0 }, 1, 1000) > 100.0);
    assert!(partial(&SequenceLaw::Power { a: 1.0, s: 1.0 }, 1, 100_000) > 10.0);
    assert!(partial(&SequenceLaw::Geometric { a: 1.0, q: 0.5 }, 3, 60) > 1e9);
}

#[test]
fn zeta_sum_between_integral_bounds() {
    for s in [1.2, 1.5, 2.0, 3.7] {
        let n = 100_000;
        let head = partial(&SequenceLaw::Power { a: 1.0, s }, 1, n);
        let lo = head + ((n + 1) as f64).powf(1.0 - s) / (s - 1.0);
        let hi = head + (n as f64).powf(1.0 - s) / (s - 1.0);
        let v = SequenceLaw::Power { a: 1.0, s }.sum().finite().unwrap();
        assert!(v >= lo - 1e-10 && v <= hi + 1e-10, "s = {s}: {lo} {v} {hi}");
    }
}

proptest! {
    #![proptest_config(common::proptest_config(256))]

    #[test]
    fn finite_sums_match_partial_sums(law in arb_law(), b in 1u32..4) {
        if let Volume::Finite(v) = law.weighted_sum(b) {
            let n = 4000;
            let p = partial(&law, b, n);
            let tail = tail_bound(&law, b, n);
            prop_assert!(p <= v * (1.0 + 1e-12), "{:?} b={} v={} p={}", law, b, v, p);
            prop_assert!(v - p <= tail + 1e-10 * v, "{:?} b={} v={} p={} tail={}", law, b, v, p, tail);
        }
    }

    #[test]
    fn bounded_below_implies_divergent(law in arb_law()) {
        if law.infimum() > 0.0 {
            prop_assert!(law.sum().is_infinite());
        }
        let inf = law.infimum();
        prop_assert!((0..50).all(|j| law.length(j) >= inf));
    }

    #[test]
    fn classification_is_consistent(gadgets in prop::collection::vec(arb_gadget(), 0..4)) {
        let d = EndedGraph::new(point(), gadgets).unwrap();
        let r = classify(&d).unwrap();
        let all_infinite = r.gadgets.iter().all(|g| g.end_volume.is_infinite());
        prop_assert_eq!(r.markovian_unique, all_infinite);
        prop_assert_eq!(markovian_uniqueness(&d).0, r.markovian_unique);
        if matches!(r.self_adjoint, SelfAdjointness::Yes { .. }) {
            prop_assert!(r.markovian_unique);
        }
        if !r.markovian_unique {
            let is_no = matches!(r.self_adjoint, SelfAdjointness::No { .. });
            prop_assert!(is_no);
        }
        let trees = d.gadgets().iter().any(|g| matches!(g, EndGadget::Tree { .. }));
        prop_assert_eq!(r.end_count == EndCount::Infinite, trees);
    }

    #[test]
    fn one_end_corollary(law in arb_law()) {
        let d = EndedGraph::new(point(), vec![EndGadget::Ray { attach: "o".into(), law }]).unwrap();
        let r = classify(&d).unwrap();
        prop_assert_eq!(r.markovian_unique, r.total_volume.is_infinite());
    }
}
