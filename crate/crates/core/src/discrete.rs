//! Weighted discrete Laplacians on the vertex set and the equilateral
//! correspondence `lambda in sigma(H) <=> 1 - cos(sqrt(lambda)) in sigma(Delta)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::graph::{GraphError, MetricGraph};
use crate::spectrum::{eigenvalues, SolverError, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum DiscreteError {
    #[error("mu = {0} lies outside [0, 2]")]
    MuOutOfRange(f64),
    #[error("graph is not equilateral: edge {edge} has length {length}, expected {expected}")]
    NotEquilateral { edge: String, length: f64, expected: f64 },
    #[error("vertex function has {got} values, graph has {expected} vertices")]
    WrongLength { got: usize, expected: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    /// `m = deg`, `b = 1`
    Normalized,
    /// `m(v) = sum of incident lengths`, `b(e) = 1 / l(e)`
    MetricWeighted,
}

/// `(Delta f)(v) = (1 / m(v)) sum_{u ~ v} b(e_uv) (f(v) - f(u))`
#[derive(Debug, Clone)]
pub struct DiscreteLaplacian {
    vertex_weights: Vec<f64>,
    // (u, v, b)
    edge_weights: Vec<(usize, usize, f64)>,
    weighting: Weighting,
}

impl DiscreteLaplacian {
    pub fn new(g: &MetricGraph, weighting: Weighting) -> Self {
        let vertex_weights = match weighting {
            Weighting::Normalized => (0..g.vertex_count()).map(|v| g.degree(v) as f64).collect(),
            Weighting::MetricWeighted => g.vertex_masses(),
        };
        let edge_weights = g
            .edges()
            .iter()
            .map(|e| {
                let b = match weighting {
                    Weighting::Normalized => 1.0,
                    Weighting::MetricWeighted => 1.0 / e.length,
                };
                (e.tail, e.head, b)
            })
            .collect();
        DiscreteLaplacian {
            vertex_weights,
            edge_weights,
            weighting,
        }
    }

    pub fn normalized(g: &MetricGraph) -> Self {
        Self::new(g, Weighting::Normalized)
    }

    pub fn metric_weighted(g: &MetricGraph) -> Self {
        Self::new(g, Weighting::MetricWeighted)
    }

    pub fn weighting(&self) -> Weighting {
        self.weighting
    }

    pub fn vertex_weights(&self) -> &[f64] {
        &self.vertex_weights
    }

    pub fn dimension(&self) -> usize {
        self.vertex_weights.len()
    }

    /// The (non-symmetric) matrix of the action.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut a = DMatrix::zeros(n, n);
        for &(u, v, b) in &self.edge_weights {
            a[(u, u)] += b / self.vertex_weights[u];
            a[(v, v)] += b / self.vertex_weights[v];
            a[(u, v)] -= b / self.vertex_weights[u];
            a[(v, u)] -= b / self.vertex_weights[v];
        }
        a
    }

    /// `M^{1/2} A M^{-1/2}`
    pub fn symmetrized(&self) -> DMatrix<f64> {
        let a = self.matrix();
        let s: Vec<f64> = self.vertex_weights.iter().map(|m| m.sqrt()).collect();
        DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| s[i] * a[(i, j)] / s[j])
    }

    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>, DiscreteError> {
        check_len(f, self.dimension())?;
        let mut out = vec![0.0; f.len()];
        for &(u, v, b) in &self.edge_weights {
            out[u] += b * (f[u] - f[v]);
            out[v] += b * (f[v] - f[u]);
        }
        for (o, m) in out.iter_mut().zip(&self.vertex_weights) {
            *o /= m;
        }
        Ok(out)
    }
}

fn check_len(f: &[f64], n: usize) -> Result<(), DiscreteError> {
    if f.len() != n {
        return Err(DiscreteError::WrongLength {
            got: f.len(),
            expected: n,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscreteEigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

pub fn cluster_tolerance(lambda: f64) -> f64 {
    1e-10 * (1.0 + lambda.abs())
}

/// Eigenvalues of the symmetrized matrix, ascending, clustered into
/// multiplicities.
pub fn discrete_spectrum(l: &DiscreteLaplacian) -> Vec<DiscreteEigenvalue> {
    let eig = SymmetricEigen::new(l.symmetrized());
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for v in values {
        match out.last_mut() {
            Some((first, n, sum)) if v - *first <= cluster_tolerance(*first) => {
                *n += 1;
                *sum += v;
            }
            _ => out.push((v, 1, v)),
        }
    }
    out.into_iter()
        .map(|(_, n, sum)| DiscreteEigenvalue {
            value: sum / n as f64,
            multiplicity: n,
        })
        .collect()
}

/// Tolerance in `sqrt(lambda)` for membership in `{(pi n)^2}`.
pub const EXCLUDED_TOL: f64 = 1e-8;

/// Whether `k^2` lies in `{(pi n)^2 : n >= 1}`.
pub fn is_excluded(k: f64) -> bool {
    let n = (k / PI).round();
    n >= 1.0 && (k - n * PI).abs() <= EXCLUDED_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MappedValue {
    pub lambda: f64,
    pub k: f64,
    pub excluded: bool,
}

/// All `lambda in [0, lambda_max]` with `1 - cos(sqrt(lambda)) = mu`.
pub fn equilateral_map(mu: f64, lambda_max: f64) -> Result<Vec<MappedValue>, DiscreteError> {
    if !(0.0..=2.0).contains(&mu) {
        return Err(DiscreteError::MuOutOfRange(mu));
    }
    let theta = (1.0 - mu).acos();
    let k_max = lambda_max.max(0.0).sqrt();
    let mut ks = Vec::new();
    let mut n = 0.0;
    while n * 2.0 * PI - theta <= k_max {
        for k in [n * 2.0 * PI - theta, n * 2.0 * PI + theta] {
            if (0.0..=k_max).contains(&k) {
                ks.push(k);
            }
        }
        n += 1.0;
    }
    ks.sort_by(f64::total_cmp);
    ks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
    Ok(ks
        .into_iter()
        .map(|k| MappedValue {
            lambda: k * k,
            k,
            excluded: is_excluded(k),
        })
        .collect())
}

// arccos is ill-conditioned at 1 - mu = +-1
fn snap_endpoints(mu: f64) -> f64 {
    if mu.abs() <= cluster_tolerance(0.0) {
        0.0
    } else if (mu - 2.0).abs() <= cluster_tolerance(2.0) {
        2.0
    } else {
        mu.clamp(0.0, 2.0)
    }
}

/// Matching tolerance between solver and discrete values.
pub const MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverValue {
    pub lambda: f64,
    pub k: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappedEigenvalue {
    pub mu: f64,
    pub multiplicity: usize,
    pub preimages: Vec<MappedValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mismatch {
    /// Solver eigenvalue with no discrete partner.
    Unmatched { lambda: f64, mu: f64 },
    /// Discrete preimage missing from the solver output.
    Missing { lambda: f64, mu: f64 },
    Multiplicity { lambda: f64, solver: usize, discrete: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilateralReport {
    pub edge_length: f64,
    pub k_max: f64,
    pub discrete_spectrum: Vec<DiscreteEigenvalue>,
    pub mapped: Vec<MappedEigenvalue>,
    pub solver: Vec<SolverValue>,
    pub mismatches: Vec<Mismatch>,
    pub excluded_hits: Vec<SolverValue>,
    pub pass: bool,
}

/// Common edge length, or an error naming the first edge that differs.
pub fn equilateral_length(g: &MetricGraph) -> Result<f64, DiscreteError> {
    let a = g.edges()[0].length;
    for e in g.edges() {
        if (e.length - a).abs() > 1e-12 * a {
            return Err(DiscreteError::NotEquilateral {
                edge: e.id.clone(),
                length: e.length,
                expected: a,
            });
        }
    }
    Ok(a)
}

/// Compares the solver spectrum with the mapped normalized spectrum in both
/// directions. Graphs of common length `a` are rescaled to unit length; the
/// reported eigenvalues are in the original scale. Values are matched in
/// `sqrt(lambda)`.
pub fn equilateral_compare(g: &MetricGraph, k_max: f64) -> Result<EquilateralReport, DiscreteError> {
    let a = equilateral_length(g)?;
    let unit = g.scaled(1.0 / a)?;
    let k_unit = k_max * a;
    let ev = eigenvalues(&unit, k_unit, DEFAULT_TOL)?;
    let disc = discrete_spectrum(&DiscreteLaplacian::normalized(&unit));

    let mut mismatches = Vec::new();
    let mut excluded_hits = Vec::new();
    let mut solver = Vec::new();
    let rescale = |k: f64, m: usize| SolverValue {
        lambda: (k / a) * (k / a),
        k: k / a,
        multiplicity: m,
    };
    for e in ev.entries() {
        solver.push(rescale(e.k, e.multiplicity));
        if is_excluded(e.k) {
            excluded_hits.push(rescale(e.k, e.multiplicity));
            continue;
        }
        let mu = 1.0 - e.k.cos();
        match disc.iter().find(|d| (d.value - mu).abs() <= MATCH_TOL) {
            None => mismatches.push(Mismatch::Unmatched {
                lambda: rescale(e.k, 1).lambda,
                mu,
            }),
            Some(d) if d.multiplicity != e.multiplicity => mismatches.push(Mismatch::Multiplicity {
                lambda: rescale(e.k, 1).lambda,
                solver: e.multiplicity,
                discrete: d.multiplicity,
            }),
            Some(_) => {}
        }
    }

    let mut mapped = Vec::new();
    for d in &disc {
        let mu = snap_endpoints(d.value);
        let pre = equilateral_map(mu, k_unit * k_unit)?;
        for p in pre.iter().filter(|p| !p.excluded) {
            if !ev.entries().iter().any(|e| (e.k - p.k).abs() <= MATCH_TOL) {
                mismatches.push(Mismatch::Missing {
                    lambda: p.lambda / (a * a),
                    mu: d.value,
                });
            }
        }
        mapped.push(MappedEigenvalue {
            mu: d.value,
            multiplicity: d.multiplicity,
            preimages: pre
                .into_iter()
                .map(|p| MappedValue {
                    lambda: p.lambda / (a * a),
                    k: p.k / a,
                    excluded: p.excluded,
                })
                .collect(),
        });
    }

    Ok(EquilateralReport {
        edge_length: a,
        k_max,
        discrete_spectrum: disc,
        mapped,
        solver,
        pass: mismatches.is_empty(),
        mismatches,
        excluded_hits,
    })
}

/// Piecewise-affine interpolation of a vertex function.
#[derive(Debug, Clone)]
pub struct AffineInterpolant<'g> {
    graph: &'g MetricGraph,
    values: Vec<f64>,
}

pub fn interpolate_affine<'g>(g: &'g MetricGraph, f: &[f64]) -> Result<AffineInterpolant<'g>, DiscreteError> {
    check_len(f, g.vertex_count())?;
    Ok(AffineInterpolant {
        graph: g,
        values: f.to_vec(),
    })
}

impl AffineInterpolant<'_> {
    /// Value at `offset` from the tail of `edge`.
    pub fn value(&self, edge: usize, offset: f64) -> f64 {
        let e = self.graph.edge(edge);
        self.values[e.tail] + self.slope(edge) * offset
    }

    /// Derivative along the edge orientation (tail to head).
    pub fn slope(&self, edge: usize) -> f64 {
        let e = self.graph.edge(edge);
        (self.values[e.head] - self.values[e.tail]) / e.length
    }

    /// Derivative at `v` pointing into the edge.
    pub fn outward_derivative(&self, edge: usize, v: usize) -> f64 {
        let e = self.graph.edge(edge);
        if e.tail == v {
            self.slope(edge)
        } else {
            -self.slope(edge)
        }
    }
}

/// `sum_{e at v} F'_e(v)` for the affine interpolant `F` of `f`.
pub fn kirchhoff_defect(g: &MetricGraph, f: &[f64], v: usize) -> Result<f64, DiscreteError> {
    let interp = interpolate_affine(g, f)?;
    Ok(g.incident(v).iter().map(|&e| interp.outward_derivative(e, v)).sum())
}
