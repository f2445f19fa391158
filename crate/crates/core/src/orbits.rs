//! Periodic orbits on a metric graph.
//!
//! An orbit is a closed walk over directed bonds (an edge together with a
//! direction of traversal), up to cyclic rotation. Backtracking is allowed.
//! Reversed orbits are distinct orbits.
//!
//! Each orbit is stored as the lexicographically minimal rotation of its bond
//! sequence, with bonds ordered by `(edge index, direction)` and edges in id
//! order.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::MetricGraph;

pub const DEFAULT_MAX_ORBITS: usize = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum OrbitError {
    #[error("lmax must be positive and finite, got {0}")]
    BadLMax(f64),
    #[error("more than {0} orbits below lmax; lower lmax or raise the budget")]
    BudgetExceeded(usize),
    #[error("bond sequence is empty or not closed")]
    NotClosed,
}

/// An edge traversed in a fixed direction. Index `2 * edge + 0` runs
/// tail to head, `2 * edge + 1` head to tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bond(usize);

impl Bond {
    pub fn new(edge: usize, forward: bool) -> Self {
        Bond(2 * edge + usize::from(!forward))
    }

    pub fn from_index(index: usize) -> Self {
        Bond(index)
    }

    pub fn index(self) -> usize {
        self.0
    }

    pub fn edge(self) -> usize {
        self.0 / 2
    }

    pub fn is_forward(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn reversed(self) -> Self {
        Bond(self.0 ^ 1)
    }

    pub fn tail(self, g: &MetricGraph) -> usize {
        let e = g.edge(self.edge());
        if self.is_forward() {
            e.tail
        } else {
            e.head
        }
    }

    pub fn head(self, g: &MetricGraph) -> usize {
        self.reversed().tail(g)
    }

    pub fn label(self, g: &MetricGraph) -> String {
        format!("{}{}", g.edge(self.edge()).id, if self.is_forward() { '+' } else { '-' })
    }
}

/// Vertex scattering coefficients `S_v(e, e') = 2 / deg(v) - delta(e, e')`.
#[derive(Debug, Clone)]
pub struct ScatteringTable {
    degrees: Vec<usize>,
    heads: Vec<usize>,
    incidence: Vec<Vec<usize>>,
}

impl ScatteringTable {
    pub fn new(g: &MetricGraph) -> Self {
        let heads = (0..2 * g.edge_count()).map(|i| Bond(i).head(g)).collect();
        ScatteringTable {
            degrees: (0..g.vertex_count()).map(|v| g.degree(v)).collect(),
            heads,
            incidence: (0..g.vertex_count()).map(|v| g.incident(v).to_vec()).collect(),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn coefficient(&self, v: usize, e: usize, e_prime: usize) -> f64 {
        2.0 / self.degrees[v] as f64 - if e == e_prime { 1.0 } else { 0.0 }
    }

    /// `S_v` as a `deg(v) x deg(v)` matrix over the incident edges in order.
    pub fn matrix(&self, v: usize) -> DMatrix<f64> {
        let inc = &self.incidence[v];
        DMatrix::from_fn(inc.len(), inc.len(), |i, j| self.coefficient(v, inc[i], inc[j]))
    }

    /// Factor picked up when leaving `from` into `to` at `head(from)`.
    pub fn transition(&self, from: Bond, to: Bond) -> f64 {
        self.coefficient(self.heads[from.0], from.edge(), to.edge())
    }

    fn factor_key(&self, from: Bond, to: Bond) -> (usize, bool) {
        (self.degrees[self.heads[from.0]], from.edge() == to.edge())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    bonds: Vec<Bond>,
    length: f64,
    repetition: usize,
}

impl PeriodicOrbit {
    /// Canonicalizes a closed bond walk `b_1 .. b_N` with
    /// `head(b_i) = tail(b_{i+1})` cyclically.
    pub fn from_walk(g: &MetricGraph, walk: &[Bond]) -> Result<Self, OrbitError> {
        if walk.is_empty() {
            return Err(OrbitError::NotClosed);
        }
        let n = walk.len();
        for i in 0..n {
            if walk[i].head(g) != walk[(i + 1) % n].tail(g) {
                return Err(OrbitError::NotClosed);
            }
        }
        Ok(Self::from_canonical(g, minimal_rotation(walk)))
    }

    fn from_canonical(g: &MetricGraph, bonds: Vec<Bond>) -> Self {
        let repetition = bonds.len() / smallest_period(&bonds);
        let length = walk_length(g, &bonds);
        PeriodicOrbit {
            bonds,
            length,
            repetition,
        }
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn repetition(&self) -> usize {
        self.repetition
    }

    pub fn is_primitive(&self) -> bool {
        self.repetition == 1
    }

    pub fn primitive_length(&self) -> f64 {
        self.length / self.repetition as f64
    }

    pub fn primitive_part(&self, g: &MetricGraph) -> PeriodicOrbit {
        if self.repetition == 1 {
            return self.clone();
        }
        let p = self.bonds.len() / self.repetition;
        PeriodicOrbit::from_canonical(g, self.bonds[..p].to_vec())
    }

    /// Space-separated bond labels of the canonical rotation, e.g. `ab+ bc+ ca+`.
    pub fn canonical_id(&self, g: &MetricGraph) -> String {
        let labels: Vec<String> = self.bonds.iter().map(|b| b.label(g)).collect();
        labels.join(" ")
    }

    /// `s(p)`: product of `S_v` over the turns of the orbit.
    pub fn scattering(&self, table: &ScatteringTable) -> f64 {
        scattering_of_walk(&self.bonds, table)
    }
}

impl fmt::Display for PeriodicOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.bonds.iter().map(|b| b.0.to_string()).collect();
        write!(f, "[{}] len={} r={}", idx.join(","), self.length, self.repetition)
    }
}

/// Product of scattering factors along any rotation of a closed walk.
///
/// Factors are grouped by `(degree, backtrack)` and multiplied as an integer
/// ratio, so the result does not depend on the starting bond.
pub fn scattering_of_walk(walk: &[Bond], table: &ScatteringTable) -> f64 {
    let n = walk.len();
    let mut counts: BTreeMap<(usize, bool), i32> = BTreeMap::new();
    for i in 0..n {
        *counts.entry(table.factor_key(walk[i], walk[(i + 1) % n])).or_default() += 1;
    }
    let mut num = 1.0f64;
    let mut den = 1.0f64;
    for (&(deg, back), &c) in &counts {
        let top = if back { 2.0 - deg as f64 } else { 2.0 };
        num *= top.powi(c);
        den *= (deg as f64).powi(c);
    }
    num / den
}

fn walk_length(g: &MetricGraph, walk: &[Bond]) -> f64 {
    let mut counts = vec![0u32; g.edge_count()];
    for b in walk {
        counts[b.edge()] += 1;
    }
    counts
        .iter()
        .zip(g.edges())
        .filter(|(c, _)| **c > 0)
        .map(|(&c, e)| c as f64 * e.length)
        .sum()
}

fn rotation_less(walk: &[Bond], r: usize) -> std::cmp::Ordering {
    let n = walk.len();
    for i in 0..n {
        match walk[(i + r) % n].cmp(&walk[i]) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

fn is_minimal_rotation(walk: &[Bond]) -> bool {
    (1..walk.len()).all(|r| rotation_less(walk, r) != std::cmp::Ordering::Less)
}

pub(crate) fn minimal_rotation(walk: &[Bond]) -> Vec<Bond> {
    let n = walk.len();
    let best = (1..n).fold(0, |best, r| {
        let rotated: Vec<Bond> = (0..n).map(|i| walk[(i + r) % n]).collect();
        let current: Vec<Bond> = (0..n).map(|i| walk[(i + best) % n]).collect();
        if rotated < current {
            r
        } else {
            best
        }
    });
    (0..n).map(|i| walk[(i + best) % n]).collect()
}

fn smallest_period(seq: &[Bond]) -> usize {
    let n = seq.len();
    (1..=n)
        .find(|&p| n % p == 0 && (p..n).all(|i| seq[i] == seq[i - p]))
        .unwrap_or(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConfig {
    pub max_orbits: usize,
    /// Skip orbits containing a zero scattering factor (backtracking through a
    /// degree-two vertex). These contribute nothing to trace-formula sums.
    pub nonzero_only: bool,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        OrbitConfig {
            max_orbits: DEFAULT_MAX_ORBITS,
            nonzero_only: false,
        }
    }
}

struct Search<'a> {
    g: &'a MetricGraph,
    table: ScatteringTable,
    successors: Vec<Vec<Bond>>,
    lengths: Vec<f64>,
    limit: f64,
    nonzero_only: bool,
}

impl<'a> Search<'a> {
    fn new(g: &'a MetricGraph, l_max: f64, nonzero_only: bool) -> Self {
        let table = ScatteringTable::new(g);
        let nb = 2 * g.edge_count();
        let successors = (0..nb)
            .map(|i| {
                let b = Bond(i);
                (0..nb)
                    .map(Bond)
                    .filter(|n| n.tail(g) == b.head(g))
                    .filter(|n| !nonzero_only || table.transition(b, *n) != 0.0)
                    .collect()
            })
            .collect();
        Search {
            g,
            table,
            successors,
            lengths: (0..nb).map(|i| g.edge(i / 2).length).collect(),
            limit: l_max * (1.0 + 1e-12),
            nonzero_only,
        }
    }

    // Depth-first search over walks that start at `start` and use only bonds
    // >= start; every orbit is reached from its minimal bond, and a closed walk
    // is emitted only when it already is its canonical rotation.
    fn from_start(&self, start: Bond, visit: &mut dyn FnMut(PeriodicOrbit) -> bool) -> bool {
        let mut walk = vec![start];
        self.extend(&mut walk, self.lengths[start.0], visit)
    }

    fn closes(&self, last: Bond, start: Bond) -> bool {
        last.head(self.g) == start.tail(self.g) && (!self.nonzero_only || self.table.transition(last, start) != 0.0)
    }

    fn extend(&self, walk: &mut Vec<Bond>, len: f64, visit: &mut dyn FnMut(PeriodicOrbit) -> bool) -> bool {
        let start = walk[0];
        let last = *walk.last().expect("walk is never empty");
        if self.closes(last, start) && is_minimal_rotation(walk) {
            let orbit = PeriodicOrbit::from_canonical(self.g, walk.clone());
            if orbit.length <= self.limit && !visit(orbit) {
                return false;
            }
        }
        for &next in &self.successors[last.0] {
            if next < start {
                continue;
            }
            let l = len + self.lengths[next.0];
            if l > self.limit {
                continue;
            }
            walk.push(next);
            let keep_going = self.extend(walk, l, visit);
            walk.pop();
            if !keep_going {
                return false;
            }
        }
        true
    }
}

fn check_lmax(l_max: f64) -> Result<(), OrbitError> {
    if l_max > 0.0 && l_max.is_finite() {
        Ok(())
    } else {
        Err(OrbitError::BadLMax(l_max))
    }
}

/// Streams every orbit with `length <= l_max` to `visit`, each exactly once,
/// without materializing the set. Returns the number of orbits visited.
pub fn for_each_orbit(
    g: &MetricGraph,
    l_max: f64,
    cfg: &OrbitConfig,
    mut visit: impl FnMut(PeriodicOrbit),
) -> Result<usize, OrbitError> {
    check_lmax(l_max)?;
    let search = Search::new(g, l_max, cfg.nonzero_only);
    let mut count = 0usize;
    let mut over = false;
    for s in 0..2 * g.edge_count() {
        let ok = search.from_start(Bond(s), &mut |o| {
            count += 1;
            if count > cfg.max_orbits {
                over = true;
                return false;
            }
            visit(o);
            true
        });
        if !ok || over {
            return Err(OrbitError::BudgetExceeded(cfg.max_orbits));
        }
    }
    Ok(count)
}

/// All periodic orbits with `length <= l_max`, sorted by length and then by
/// canonical bond sequence.
pub fn enumerate_orbits(g: &MetricGraph, l_max: f64) -> Result<Vec<PeriodicOrbit>, OrbitError> {
    enumerate_orbits_with(g, l_max, &OrbitConfig::default())
}

pub fn enumerate_orbits_with(g: &MetricGraph, l_max: f64, cfg: &OrbitConfig) -> Result<Vec<PeriodicOrbit>, OrbitError> {
    check_lmax(l_max)?;
    let search = Search::new(g, l_max, cfg.nonzero_only);
    let total = AtomicUsize::new(0);
    let over = AtomicBool::new(false);
    let parts: Vec<Vec<PeriodicOrbit>> = (0..2 * g.edge_count())
        .into_par_iter()
        .map(|s| {
            let mut found = Vec::new();
            search.from_start(Bond(s), &mut |o| {
                if total.fetch_add(1, Ordering::Relaxed) >= cfg.max_orbits || over.load(Ordering::Relaxed) {
                    over.store(true, Ordering::Relaxed);
                    return false;
                }
                found.push(o);
                true
            });
            found
        })
        .collect();
    if over.load(Ordering::Relaxed) {
        return Err(OrbitError::BudgetExceeded(cfg.max_orbits));
    }
    let mut all: Vec<PeriodicOrbit> = parts.into_iter().flatten().collect();
    all.sort_by(|a, b| a.length.total_cmp(&b.length).then_with(|| a.bonds.cmp(&b.bonds)));
    Ok(all)
}
