//! Infinite metric graphs described as a finite core with rays and regular
//! trees attached. Ends, end volumes, Markovian uniqueness and sufficient
//! criteria for self-adjointness are decided from the closed-form length laws.
//!
//! Length laws are indexed from `j = 0`. A ray's `j`-th edge has length
//! `law(j)`. A tree of branching `b` has `b^(j+1)` edges at level `j`, each
//! of length `law(j)`; the attachment vertex has `b` children and so does
//! every vertex below it.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::graph::{EdgeSpec, GraphError, GraphSpec, MetricGraph};

#[derive(Debug, Error)]
pub enum EndsError {
    #[error("invalid length law: {0}")]
    BadLaw(String),
    #[error("gadget {index}: attach vertex {vertex:?} is not in the core")]
    UnknownAttach { index: usize, vertex: String },
    #[error("gadget {index}: branching must be at least 2, got {branching}")]
    BadBranching { index: usize, branching: u32 },
    #[error("a core without edges must have exactly one vertex, got {0}")]
    EmptyCore(usize),
    #[error("inconsistent classification: self-adjointness claimed without Markovian uniqueness")]
    Inconsistent,
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SequenceLaw {
    /// `a`
    Constant { a: f64 },
    /// `a q^j`
    Geometric { a: f64, q: f64 },
    /// `a (j + 1)^(-s)`
    Power { a: f64, s: f64 },
    /// explicit values, then `tail` re-indexed from 0
    Prefix { prefix: Vec<f64>, tail: Box<SequenceLaw> },
}

/// Value of a series whose convergence is decided exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Volume {
    Finite(f64),
    Infinite,
}

impl Volume {
    pub fn is_infinite(self) -> bool {
        matches!(self, Volume::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Volume::Finite(v) => Some(v),
            Volume::Infinite => None,
        }
    }

    fn scale(self, c: f64) -> Volume {
        match self {
            Volume::Finite(v) => Volume::Finite(c * v),
            Volume::Infinite => Volume::Infinite,
        }
    }
}

impl std::ops::Add for Volume {
    type Output = Volume;
    fn add(self, other: Volume) -> Volume {
        match (self, other) {
            (Volume::Finite(a), Volume::Finite(b)) => Volume::Finite(a + b),
            _ => Volume::Infinite,
        }
    }
}

impl Serialize for Volume {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Volume::Finite(v) => s.serialize_f64(*v),
            Volume::Infinite => s.serialize_str("infinite"),
        }
    }
}

impl fmt::Display for Volume {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Volume::Finite(v) => write!(f, "{v}"),
            Volume::Infinite => f.write_str("infinite"),
        }
    }
}

// Euler-Maclaurin cut for sum_{n >= 1} n^(-s)
const ZETA_CUT: usize = 1000;

fn zeta(s: f64) -> f64 {
    let n = ZETA_CUT as f64;
    let head: f64 = (1..ZETA_CUT).rev().map(|k| (k as f64).powf(-s)).sum();
    head + n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0
}

impl SequenceLaw {
    pub fn validate(&self) -> Result<(), EndsError> {
        let positive = |name: &str, x: f64| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(EndsError::BadLaw(format!("{name} must be positive and finite, got {x}")))
            }
        };
        match self {
            SequenceLaw::Constant { a } => positive("a", *a),
            SequenceLaw::Geometric { a, q } => positive("a", *a).and(positive("q", *q)),
            SequenceLaw::Power { a, s } => positive("a", *a).and(positive("s", *s)),
            SequenceLaw::Prefix { prefix, tail } => {
                for &x in prefix {
                    positive("prefix entry", x)?;
                }
                tail.validate()
            }
        }
    }

    pub fn length(&self, j: usize) -> f64 {
        match self {
            SequenceLaw::Constant { a } => *a,
            SequenceLaw::Geometric { a, q } => a * q.powi(j as i32),
            SequenceLaw::Power { a, s } => a * ((j + 1) as f64).powf(-s),
            SequenceLaw::Prefix { prefix, tail } => match prefix.get(j) {
                Some(&x) => x,
                None => tail.length(j - prefix.len()),
            },
        }
    }

    /// `inf_j law(j)`
    pub fn infimum(&self) -> f64 {
        match self {
            SequenceLaw::Constant { a } => *a,
            SequenceLaw::Geometric { a, q } => {
                if *q >= 1.0 {
                    *a
                } else {
                    0.0
                }
            }
            SequenceLaw::Power { .. } => 0.0,
            SequenceLaw::Prefix { prefix, tail } => prefix.iter().copied().fold(tail.infimum(), f64::min),
        }
    }

    /// `sum_j law(j)`
    pub fn sum(&self) -> Volume {
        self.weighted_sum(1)
    }

    /// `sum_j b^(j+1) law(j)`; `b = 1` gives the plain sum.
    pub fn weighted_sum(&self, b: u32) -> Volume {
        let bf = b as f64;
        match self {
            SequenceLaw::Constant { .. } => Volume::Infinite,
            SequenceLaw::Geometric { a, q } => {
                if bf * q < 1.0 {
                    Volume::Finite(a * bf / (1.0 - bf * q))
                } else {
                    Volume::Infinite
                }
            }
            SequenceLaw::Power { a, s } => {
                if b == 1 && *s > 1.0 {
                    Volume::Finite(a * zeta(*s))
                } else {
                    Volume::Infinite
                }
            }
            SequenceLaw::Prefix { prefix, tail } => {
                let head: f64 = prefix.iter().enumerate().map(|(j, x)| bf.powi(j as i32 + 1) * x).sum();
                Volume::Finite(head) + tail.weighted_sum(b).scale(bf.powi(prefix.len() as i32))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum EndGadget {
    Ray { attach: String, law: SequenceLaw },
    Tree { attach: String, branching: u32, law: SequenceLaw },
}

impl EndGadget {
    pub fn attach(&self) -> &str {
        match self {
            EndGadget::Ray { attach, .. } | EndGadget::Tree { attach, .. } => attach,
        }
    }

    pub fn law(&self) -> &SequenceLaw {
        match self {
            EndGadget::Ray { law, .. } | EndGadget::Tree { law, .. } => law,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            EndGadget::Ray { .. } => "ray",
            EndGadget::Tree { .. } => "tree",
        }
    }

    pub fn ends(&self) -> EndCount {
        match self {
            EndGadget::Ray { .. } => EndCount::Finite(1),
            EndGadget::Tree { .. } => EndCount::Infinite,
        }
    }

    /// Volume of the neighbourhoods of the gadget's ends: the whole ray, or
    /// the subtree below one edge at the attachment vertex.
    pub fn end_volume(&self) -> Volume {
        match self {
            EndGadget::Ray { law, .. } => law.sum(),
            EndGadget::Tree { branching, law, .. } => law.weighted_sum(*branching).scale(1.0 / *branching as f64),
        }
    }

    /// Total length of the gadget's edges.
    pub fn volume(&self) -> Volume {
        match self {
            EndGadget::Ray { law, .. } => law.sum(),
            EndGadget::Tree { branching, law, .. } => law.weighted_sum(*branching),
        }
    }

    /// Length of any path from the attachment vertex to an end.
    pub fn escape_length(&self) -> Volume {
        self.law().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCount {
    Finite(usize),
    Infinite,
}

impl Serialize for EndCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            EndCount::Finite(n) => s.serialize_u64(*n as u64),
            EndCount::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndedGraphSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub gadgets: Vec<EndGadget>,
}

/// A finite core with end gadgets.
#[derive(Debug, Clone)]
pub struct EndedGraph {
    vertices: Vec<String>,
    core: Option<MetricGraph>,
    gadgets: Vec<EndGadget>,
}

impl EndedGraph {
    pub fn new(core: GraphSpec, gadgets: Vec<EndGadget>) -> Result<Self, EndsError> {
        let graph = if core.edges.is_empty() {
            if core.vertices.len() != 1 {
                return Err(EndsError::EmptyCore(core.vertices.len()));
            }
            None
        } else {
            Some(MetricGraph::from_spec(&core)?)
        };
        for (index, g) in gadgets.iter().enumerate() {
            if !core.vertices.iter().any(|v| v == g.attach()) {
                return Err(EndsError::UnknownAttach {
                    index,
                    vertex: g.attach().to_string(),
                });
            }
            if let EndGadget::Tree { branching, .. } = g {
                if *branching < 2 {
                    return Err(EndsError::BadBranching {
                        index,
                        branching: *branching,
                    });
                }
            }
            g.law().validate()?;
        }
        Ok(EndedGraph {
            vertices: core.vertices,
            core: graph,
            gadgets,
        })
    }

    pub fn from_spec(spec: EndedGraphSpec) -> Result<Self, EndsError> {
        Self::new(
            GraphSpec {
                vertices: spec.vertices,
                edges: spec.edges,
            },
            spec.gadgets,
        )
    }

    pub fn from_json(text: &str) -> Result<Self, EndsError> {
        let spec: EndedGraphSpec = serde_json::from_str(text).map_err(GraphError::from)?;
        Self::from_spec(spec)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, EndsError> {
        let text = std::fs::read_to_string(path).map_err(GraphError::from)?;
        Self::from_json(&text)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn core(&self) -> Option<&MetricGraph> {
        self.core.as_ref()
    }

    pub fn gadgets(&self) -> &[EndGadget] {
        &self.gadgets
    }

    pub fn core_volume(&self) -> f64 {
        self.core.as_ref().map_or(0.0, |g| g.volume())
    }
}

pub fn count_ends(d: &EndedGraph) -> EndCount {
    let mut n = 0;
    for g in d.gadgets() {
        match g.ends() {
            EndCount::Finite(k) => n += k,
            EndCount::Infinite => return EndCount::Infinite,
        }
    }
    EndCount::Finite(n)
}

pub fn total_volume(d: &EndedGraph) -> Volume {
    d.gadgets()
        .iter()
        .fold(Volume::Finite(d.core_volume()), |acc, g| acc + g.volume())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GadgetReport {
    pub index: usize,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub attach: String,
    pub ends: EndCount,
    pub end_volume: Volume,
    pub volume: Volume,
    pub infimum_length: f64,
    pub escape_length: Volume,
}

fn gadget_report(index: usize, g: &EndGadget) -> GadgetReport {
    GadgetReport {
        index,
        kind: g.kind(),
        attach: g.attach().to_string(),
        ends: g.ends(),
        end_volume: g.end_volume(),
        volume: g.volume(),
        infimum_length: g.law().infimum(),
        escape_length: g.escape_length(),
    }
}

/// Markovian uniqueness holds iff every end has infinite volume.
pub fn markovian_uniqueness(d: &EndedGraph) -> (bool, Vec<GadgetReport>) {
    let evidence: Vec<GadgetReport> = d.gadgets().iter().enumerate().map(|(i, g)| gadget_report(i, g)).collect();
    (evidence.iter().all(|r| r.end_volume.is_infinite()), evidence)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// finite graph
    I,
    /// edge lengths bounded below
    Ii,
    /// complete in the path metric
    Iii,
    /// complete in the star metric
    Iv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum SelfAdjointness {
    Yes { criterion: Criterion },
    No { reason: String },
    Inconclusive,
}

/// Star-metric length `m(v_j) + m(v_{j+1})` of level `j` diverges along
/// the levels iff the law's plain sum does (branching is bounded).
fn star_escape_length(g: &EndGadget) -> Volume {
    g.law().sum()
}

/// Sufficient criteria, checked in order (i) to (iv).
pub fn self_adjointness(d: &EndedGraph) -> SelfAdjointness {
    if d.gadgets().is_empty() {
        return SelfAdjointness::Yes { criterion: Criterion::I };
    }
    let core_inf = d.core().map_or(f64::INFINITY, |g| g.min_length());
    let inf = d.gadgets().iter().map(|g| g.law().infimum()).fold(core_inf, f64::min);
    if inf > 0.0 {
        return SelfAdjointness::Yes { criterion: Criterion::Ii };
    }
    if d.gadgets().iter().all(|g| g.escape_length().is_infinite()) {
        return SelfAdjointness::Yes { criterion: Criterion::Iii };
    }
    if d.gadgets().iter().all(|g| star_escape_length(g).is_infinite()) {
        return SelfAdjointness::Yes { criterion: Criterion::Iv };
    }
    if !markovian_uniqueness(d).0 {
        return SelfAdjointness::No {
            reason: "Markovian uniqueness fails".into(),
        };
    }
    SelfAdjointness::Inconclusive
}

pub const TREE_CONVENTION: &str =
    "tree level j >= 0 has branching^(j+1) edges of length law(j); end volume of a tree is the volume below one edge at the attachment vertex";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub end_count: EndCount,
    pub gadgets: Vec<GadgetReport>,
    pub markovian_unique: bool,
    pub self_adjoint: SelfAdjointness,
    pub total_volume: Volume,
    pub core_volume: f64,
    pub convention: &'static str,
}

pub fn classify(d: &EndedGraph) -> Result<ClassificationReport, EndsError> {
    let (markovian_unique, gadgets) = markovian_uniqueness(d);
    let self_adjoint = self_adjointness(d);
    if matches!(self_adjoint, SelfAdjointness::Yes { .. }) && !markovian_unique {
        return Err(EndsError::Inconsistent);
    }
    Ok(ClassificationReport {
        end_count: count_ends(d),
        gadgets,
        markovian_unique,
        self_adjoint,
        total_volume: total_volume(d),
        core_volume: d.core_volume(),
        convention: TREE_CONVENTION,
    })
}
