//! Finite metric graphs: a simple connected combinatorial graph whose edges
//! carry positive lengths.
//!
//! Vertex and edge ids are opaque strings. Internally both are indexed in
//! sorted id order, so every traversal (and every emitted table) is
//! reproducible. Each edge has a fixed orientation `tail -> head` which only
//! serves as the coordinate `x in [0, length]` along the edge.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use petgraph::algo::dijkstra;
use petgraph::graph::{NodeIndex, UnGraph};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid metric graph: {0}")]
    Invalid(ValidationReport),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("subdivision point {t} is not strictly inside edge `{edge}` of length {length}")]
    SubdivisionOutOfRange { edge: String, t: f64, length: f64 },
    #[error("offset {offset} is outside edge `{edge}` of length {length}")]
    OffsetOutOfRange { edge: String, offset: f64, length: f64 },
    #[error("scale factor must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("malformed graph JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read graph file: {0}")]
    Io(#[from] std::io::Error),
}

/// Serialized form of a metric graph, as read from / written to JSON.
///
/// `{"vertices":["a","b"],"edges":[{"id":"e1","ends":["a","b"],"length":1.0}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    /// `[tail, head]`
    pub ends: [String; 2],
    pub length: f64,
}

impl EdgeSpec {
    pub fn new(id: impl Into<String>, tail: impl Into<String>, head: impl Into<String>, length: f64) -> Self {
        EdgeSpec {
            id: id.into(),
            ends: [tail.into(), head.into()],
            length,
        }
    }
}

impl GraphSpec {
    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoVertices,
    NoEdges,
    DuplicateVertex(String),
    DuplicateEdge(String),
    UnknownEndpoint { edge: String, vertex: String },
    Loop(String),
    MultiEdge { first: String, second: String },
    NonPositiveLength { edge: String, length: f64 },
    NonFiniteLength { edge: String },
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoVertices => write!(f, "graph has no vertices"),
            Violation::NoEdges => write!(f, "graph has no edges (zero volume)"),
            Violation::DuplicateVertex(v) => write!(f, "duplicate vertex `{v}`"),
            Violation::DuplicateEdge(e) => write!(f, "duplicate edge id `{e}`"),
            Violation::UnknownEndpoint { edge, vertex } => {
                write!(f, "edge `{edge}` references unknown vertex `{vertex}`")
            }
            Violation::Loop(e) => write!(f, "edge `{e}` is a loop"),
            Violation::MultiEdge { first, second } => {
                write!(f, "edges `{first}` and `{second}` join the same vertices (multi-edge)")
            }
            Violation::NonPositiveLength { edge, length } => {
                write!(f, "edge `{edge}` has nonpositive length {length}")
            }
            Violation::NonFiniteLength { edge } => write!(f, "edge `{edge}` has non-finite length"),
            Violation::Disconnected { components } => {
                write!(f, "graph is disconnected ({components} components)")
            }
        }
    }
}

/// Outcome of [`validate`]. Carries the basic invariants even when some
/// checks fail, so that callers can print a full diagnosis.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub volume: f64,
    pub betti: i64,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid (vol = {}, betti = {})", self.volume, self.betti);
        }
        let msgs: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", msgs.join("; "))
    }
}

/// Checks simplicity, connectedness and length positivity of a graph spec.
pub fn validate(spec: &GraphSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if spec.vertices.is_empty() {
        violations.push(Violation::NoVertices);
    }
    if spec.edges.is_empty() {
        violations.push(Violation::NoEdges);
    }

    let mut vertex_set = BTreeSet::new();
    for v in &spec.vertices {
        if !vertex_set.insert(v.as_str()) {
            violations.push(Violation::DuplicateVertex(v.clone()));
        }
    }

    let mut edge_ids = BTreeSet::new();
    let mut pairs: HashMap<(String, String), String> = HashMap::new();
    let mut volume = 0.0;
    for e in &spec.edges {
        if !edge_ids.insert(e.id.as_str()) {
            violations.push(Violation::DuplicateEdge(e.id.clone()));
        }
        for end in &e.ends {
            if !vertex_set.contains(end.as_str()) {
                violations.push(Violation::UnknownEndpoint {
                    edge: e.id.clone(),
                    vertex: end.clone(),
                });
            }
        }
        if e.ends[0] == e.ends[1] {
            violations.push(Violation::Loop(e.id.clone()));
        } else {
            let key = if e.ends[0] < e.ends[1] {
                (e.ends[0].clone(), e.ends[1].clone())
            } else {
                (e.ends[1].clone(), e.ends[0].clone())
            };
            if let Some(first) = pairs.get(&key) {
                violations.push(Violation::MultiEdge {
                    first: first.clone(),
                    second: e.id.clone(),
                });
            } else {
                pairs.insert(key, e.id.clone());
            }
        }
        if !e.length.is_finite() {
            violations.push(Violation::NonFiniteLength { edge: e.id.clone() });
        } else if e.length <= 0.0 {
            violations.push(Violation::NonPositiveLength {
                edge: e.id.clone(),
                length: e.length,
            });
        } else {
            volume += e.length;
        }
    }

    let components = count_components(spec, &vertex_set);
    if components > 1 {
        violations.push(Violation::Disconnected { components });
    }

    ValidationReport {
        vertex_count: vertex_set.len(),
        edge_count: spec.edges.len(),
        volume,
        betti: spec.edges.len() as i64 - vertex_set.len() as i64 + components.max(1) as i64,
        violations,
    }
}

fn count_components(spec: &GraphSpec, vertices: &BTreeSet<&str>) -> usize {
    let index: HashMap<&str, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut parent: Vec<usize> = (0..index.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for e in &spec.edges {
        if let (Some(&a), Some(&b)) = (index.get(e.ends[0].as_str()), index.get(e.ends[1].as_str())) {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            parent[ra] = rb;
        }
    }
    (0..index.len()).filter(|&i| find(&mut parent, i) == i).count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: f64,
}

impl Edge {
    /// The endpoint opposite to `v`.
    pub fn other(&self, v: usize) -> usize {
        if v == self.tail {
            self.head
        } else {
            self.tail
        }
    }
}

/// A point on the metric graph: an edge and an offset measured from its tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub edge: usize,
    pub offset: f64,
}

/// A validated finite metric graph. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<usize>>,
}

impl MetricGraph {
    pub fn from_spec(spec: &GraphSpec) -> Result<Self, GraphError> {
        let report = validate(spec);
        if !report.is_valid() {
            return Err(GraphError::Invalid(report));
        }
        let mut vertices = spec.vertices.clone();
        vertices.sort();
        let vindex: HashMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut edges: Vec<Edge> = spec
            .edges
            .iter()
            .map(|e| Edge {
                id: e.id.clone(),
                tail: vindex[e.ends[0].as_str()],
                head: vindex[e.ends[1].as_str()],
                length: e.length,
            })
            .collect();
        edges.sort_by(|a, b| a.id.cmp(&b.id));
        let mut incidence = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.tail].push(i);
            incidence[e.head].push(i);
        }
        Ok(MetricGraph {
            vertices,
            edges,
            incidence,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        Self::from_spec(&GraphSpec::from_json(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds a graph from `(id, tail, head, length)` tuples; vertices are
    /// collected from the edge list.
    pub fn from_edges<'a>(edges: impl IntoIterator<Item = (&'a str, &'a str, &'a str, f64)>) -> Result<Self, GraphError> {
        let mut vertices = BTreeSet::new();
        let mut specs = Vec::new();
        for (id, a, b, len) in edges {
            vertices.insert(a.to_string());
            vertices.insert(b.to_string());
            specs.push(EdgeSpec::new(id, a, b, len));
        }
        Self::from_spec(&GraphSpec {
            vertices: vertices.into_iter().collect(),
            edges: specs,
        })
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec::new(e.id.clone(), self.vertices[e.tail].clone(), self.vertices[e.head].clone(), e.length))
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("graph spec serializes")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    /// Indices of the edges incident to vertex `v`, in edge-id order.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incidence[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incidence[v].len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.binary_search_by(|e| e.id.as_str().cmp(id)).ok()
    }

    pub fn volume(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    /// First Betti number `#E - #V + 1`.
    pub fn betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn max_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(0.0, f64::max)
    }

    pub fn min_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.to_spec())
    }

    /// Same combinatorics with every length multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self, GraphError> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(GraphError::BadScale(c));
        }
        let mut g = self.clone();
        for e in &mut g.edges {
            e.length *= c;
        }
        Ok(g)
    }

    /// Same metric graph with the coordinate direction of `edge` reversed.
    pub fn with_flipped(&self, edge: &str) -> Result<Self, GraphError> {
        let i = self.edge_index(edge).ok_or_else(|| GraphError::UnknownEdge(edge.to_string()))?;
        let mut g = self.clone();
        let e = &mut g.edges[i];
        std::mem::swap(&mut e.tail, &mut e.head);
        Ok(g)
    }

    /// Splits `edge` at distance `t` from its tail by a fresh degree-two
    /// vertex. The result is another model of the same metric space.
    pub fn subdivide(&self, edge: &str, t: f64) -> Result<Self, GraphError> {
        let i = self.edge_index(edge).ok_or_else(|| GraphError::UnknownEdge(edge.to_string()))?;
        let e = &self.edges[i];
        if !(t > 0.0 && t < e.length) {
            return Err(GraphError::SubdivisionOutOfRange {
                edge: edge.to_string(),
                t,
                length: e.length,
            });
        }
        let mut spec = self.to_spec();
        let taken_v: BTreeSet<&str> = self.vertices.iter().map(String::as_str).collect();
        let taken_e: BTreeSet<&str> = self.edges.iter().map(|e| e.id.as_str()).collect();
        let fresh_v = fresh_id(&format!("{edge}~mid"), &taken_v);
        let first = fresh_id(&format!("{edge}~0"), &taken_e);
        let second = fresh_id(&format!("{edge}~1"), &taken_e);
        let (tail, head) = (self.vertices[e.tail].clone(), self.vertices[e.head].clone());
        let pos = spec.edges.iter().position(|s| s.id == edge).expect("edge present in spec");
        spec.edges.remove(pos);
        spec.edges.push(EdgeSpec::new(first, tail, fresh_v.clone(), t));
        spec.edges.push(EdgeSpec::new(second, fresh_v.clone(), head, e.length - t));
        spec.vertices.push(fresh_v);
        Self::from_spec(&spec)
    }

    pub fn point(&self, edge: &str, offset: f64) -> Result<GraphPoint, GraphError> {
        let i = self.edge_index(edge).ok_or_else(|| GraphError::UnknownEdge(edge.to_string()))?;
        let length = self.edges[i].length;
        if !(0.0..=length).contains(&offset) {
            return Err(GraphError::OffsetOutOfRange {
                edge: edge.to_string(),
                offset,
                length,
            });
        }
        Ok(GraphPoint { edge: i, offset })
    }

    /// The point representing vertex `id` (offset 0 or `length` on its first
    /// incident edge).
    pub fn vertex_point(&self, id: &str) -> Result<GraphPoint, GraphError> {
        let v = self.vertex_index(id).ok_or_else(|| GraphError::UnknownVertex(id.to_string()))?;
        let ei = self.incidence[v][0];
        let e = &self.edges[ei];
        let offset = if e.tail == v { 0.0 } else { e.length };
        Ok(GraphPoint { edge: ei, offset })
    }

    fn skeleton(&self, lengths: &[f64]) -> UnGraph<(), f64> {
        let mut sk = UnGraph::with_capacity(self.vertices.len(), self.edges.len());
        for _ in &self.vertices {
            sk.add_node(());
        }
        for (e, &len) in self.edges.iter().zip(lengths) {
            sk.add_edge(NodeIndex::new(e.tail), NodeIndex::new(e.head), len);
        }
        sk
    }

    /// Natural path metric between two points: shortest arc length of a
    /// continuous path, computed exactly over the vertex skeleton.
    pub fn path_metric(&self, x: GraphPoint, y: GraphPoint) -> f64 {
        let lengths: Vec<f64> = self.edges.iter().map(|e| e.length).collect();
        let sk = self.skeleton(&lengths);
        let ex = &self.edges[x.edge];
        let ey = &self.edges[y.edge];
        let mut best = if x.edge == y.edge {
            (x.offset - y.offset).abs()
        } else {
            f64::INFINITY
        };
        let x_ends = [(ex.tail, x.offset), (ex.head, ex.length - x.offset)];
        let y_ends = [(ey.tail, y.offset), (ey.head, ey.length - y.offset)];
        for &(a, da) in &x_ends {
            let dist = dijkstra(&sk, NodeIndex::new(a), None, |r| *r.weight());
            for &(b, db) in &y_ends {
                if let Some(&d) = dist.get(&NodeIndex::new(b)) {
                    best = best.min(da + d + db);
                }
            }
        }
        best
    }

    /// Star-metric edge lengths `m(u) + m(v)`, where `m(v)` is the total
    /// length of the edges at `v`. Indexed like [`MetricGraph::edges`].
    pub fn star_lengths(&self) -> Vec<f64> {
        let m = self.vertex_masses();
        self.edges.iter().map(|e| m[e.tail] + m[e.head]).collect()
    }

    /// `m(v) = sum of lengths of edges incident to v`.
    pub fn vertex_masses(&self) -> Vec<f64> {
        self.incidence
            .iter()
            .map(|es| es.iter().map(|&i| self.edges[i].length).sum())
            .collect()
    }

    /// Star lengths keyed by edge id.
    pub fn star_length_map(&self) -> BTreeMap<String, f64> {
        self.edges.iter().map(|e| e.id.clone()).zip(self.star_lengths()).collect()
    }
}

fn fresh_id(base: &str, taken: &BTreeSet<&str>) -> String {
    if !taken.contains(base) {
        return base.to_string();
    }
    (1..)
        .map(|n| format!("{base}{n}"))
        .find(|c| !taken.contains(c.as_str()))
        .expect("unbounded id space")
}
