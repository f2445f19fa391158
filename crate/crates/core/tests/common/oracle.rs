//! Brute-force closed-walk oracle for orbit enumeration.

use std::collections::BTreeMap;

use qgraph_core::graph::MetricGraph;
use qgraph_core::orbits::{enumerate_orbits, ScatteringTable};

pub const STEPS: usize = 8;

/// Directed traversal of an edge, from the edge list alone.
#[derive(Clone, Copy, PartialEq)]
struct Step {
    edge: usize,
    forward: bool,
}

fn ends(g: &MetricGraph, s: Step) -> (usize, usize) {
    let e = g.edge(s.edge);
    if s.forward {
        (e.tail, e.head)
    } else {
        (e.head, e.tail)
    }
}

fn label(g: &MetricGraph, s: Step) -> String {
    format!("{}{}", g.edge(s.edge).id, if s.forward { '+' } else { '-' })
}

fn least_rotation(labels: &[String]) -> Vec<String> {
    (0..labels.len())
        .map(|r| labels[r..].iter().chain(&labels[..r]).cloned().collect::<Vec<_>>())
        .min()
        .unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub length: f64,
    pub primitive_length: f64,
    pub repetition: usize,
    pub scattering: f64,
}

pub fn oracle(g: &MetricGraph) -> BTreeMap<Vec<String>, Record> {
    let deg: Vec<usize> = (0..g.vertex_count())
        .map(|v| g.edges().iter().filter(|e| e.tail == v || e.head == v).count())
        .collect();
    let all: Vec<Step> = (0..g.edge_count())
        .flat_map(|edge| [true, false].map(|forward| Step { edge, forward }))
        .collect();
    let mut out = BTreeMap::new();
    let mut walk: Vec<Step> = Vec::new();
    fn extend(g: &MetricGraph, all: &[Step], deg: &[usize], walk: &mut Vec<Step>, out: &mut BTreeMap<Vec<String>, Record>) {
        if !walk.is_empty() && ends(g, *walk.last().unwrap()).1 == ends(g, walk[0]).0 {
            record(g, deg, walk, out);
        }
        if walk.len() == STEPS {
            return;
        }
        for &s in all {
            if walk.last().is_none_or(|&p| ends(g, p).1 == ends(g, s).0) {
                walk.push(s);
                extend(g, all, deg, walk, out);
                walk.pop();
            }
        }
    }
    extend(g, &all, &deg, &mut walk, &mut out);
    out
}

fn record(g: &MetricGraph, deg: &[usize], walk: &[Step], out: &mut BTreeMap<Vec<String>, Record>) {
    let n = walk.len();
    let labels: Vec<String> = walk.iter().map(|&s| label(g, s)).collect();
    let key = least_rotation(&labels);
    let length: f64 = walk.iter().map(|s| g.edge(s.edge).length).sum();
    let period = (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| labels[i] == labels[(i + p) % n]))
        .unwrap();
    let (mut num, mut den) = (1i64, 1i64);
    for i in 0..n {
        let (a, b) = (walk[i], walk[(i + 1) % n]);
        let v = ends(g, a).1;
        let back = a.edge == b.edge && a.forward != b.forward;
        let d = deg[v] as i64;
        num *= if back { 2 - d } else { 2 };
        den *= d;
    }
    out.insert(
        key,
        Record {
            length,
            primitive_length: length / (n / period) as f64,
            repetition: n / period,
            scattering: num as f64 / den as f64,
        },
    );
}

pub fn enumerated(g: &MetricGraph) -> BTreeMap<Vec<String>, Record> {
    let lmax = STEPS as f64 * g.max_length();
    let table = ScatteringTable::new(g);
    enumerate_orbits(g, lmax)
        .unwrap()
        .into_iter()
        .filter(|o| o.bonds().len() <= STEPS)
        .map(|o| {
            let labels: Vec<String> = o.bonds().iter().map(|b| b.label(g)).collect();
            (
                least_rotation(&labels),
                Record {
                    length: o.length(),
                    primitive_length: o.primitive_length(),
                    repetition: o.repetition(),
                    scattering: o.scattering(&table),
                },
            )
        })
        .collect()
}
