//! Python bindings for `qgraph-core`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use qgraph_core::discrete::{discrete_spectrum, equilateral_compare, DiscreteLaplacian, Weighting};
use qgraph_core::ends::{classify as classify_ended, EndedGraph};
use qgraph_core::graph::MetricGraph as CoreGraph;
use qgraph_core::orbits::{enumerate_orbits_with, OrbitConfig, ScatteringTable};
use qgraph_core::spectrum::{eigenvalues, eigenvalues_with, weyl_fit, SolverConfig};
use qgraph_core::trace::{poisson_demo as core_poisson, trace_check, GaussianTest, TraceConfig};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

// serde report -> plain Python objects
fn to_py<'py>(py: Python<'py>, report: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(report).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A compact metric graph.
#[pyclass(module = "qgraph", frozen)]
struct MetricGraph {
    inner: CoreGraph,
}

#[pymethods]
impl MetricGraph {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreGraph::from_json(text).map(|inner| MetricGraph { inner }).map_err(err)
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        CoreGraph::from_file(path).map(|inner| MetricGraph { inner }).map_err(err)
    }

    /// `edges` is a list of `(id, tail, head, length)`.
    #[staticmethod]
    fn from_edges(edges: Vec<(String, String, String, f64)>) -> PyResult<Self> {
        CoreGraph::from_edges(edges.iter().map(|(i, a, b, l)| (i.as_str(), a.as_str(), b.as_str(), *l)))
            .map(|inner| MetricGraph { inner })
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn volume(&self) -> f64 {
        self.inner.volume()
    }

    #[getter]
    fn betti(&self) -> usize {
        self.inner.betti()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn scaled(&self, c: f64) -> PyResult<Self> {
        self.inner.scaled(c).map(|inner| MetricGraph { inner }).map_err(err)
    }

    fn subdivide(&self, edge: &str, t: f64) -> PyResult<Self> {
        self.inner.subdivide(edge, t).map(|inner| MetricGraph { inner }).map_err(err)
    }

    /// `(lambda, k, multiplicity)` for all eigenvalues with `k <= kmax`.
    #[pyo3(signature = (kmax, tol = 1e-8))]
    fn eigenvalues(&self, kmax: f64, tol: f64) -> PyResult<Vec<(f64, f64, usize)>> {
        let ev = eigenvalues(&self.inner, kmax, tol).map_err(err)?;
        Ok(ev.entries().iter().map(|e| (e.lambda, e.k, e.multiplicity)).collect())
    }

    fn weyl_fit<'py>(&self, py: Python<'py>, kmax: f64) -> PyResult<Bound<'py, PyAny>> {
        let cfg = SolverConfig {
            check: false,
            ..SolverConfig::default()
        };
        let ev = eigenvalues_with(&self.inner, kmax, &cfg).map_err(err)?;
        to_py(py, &weyl_fit(&ev).map_err(err)?)
    }

    /// `(length, primitive_length, repetition, scattering, canonical_id)` per orbit.
    #[pyo3(signature = (lmax, nonzero_only = false))]
    fn orbits(&self, lmax: f64, nonzero_only: bool) -> PyResult<Vec<(f64, f64, usize, f64, String)>> {
        let cfg = OrbitConfig {
            nonzero_only,
            ..OrbitConfig::default()
        };
        let orbits = enumerate_orbits_with(&self.inner, lmax, &cfg).map_err(err)?;
        let table = ScatteringTable::new(&self.inner);
        Ok(orbits
            .iter()
            .map(|o| {
                (
                    o.length(),
                    o.primitive_length(),
                    o.repetition(),
                    o.scattering(&table),
                    o.canonical_id(&self.inner),
                )
            })
            .collect())
    }

    #[pyo3(signature = (sigma, kmax, lmax, center = 0.0, tol = 1e-6))]
    fn trace_check<'py>(
        &self,
        py: Python<'py>,
        sigma: f64,
        kmax: f64,
        lmax: f64,
        center: f64,
        tol: f64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let f = GaussianTest::new(center, sigma).map_err(err)?;
        let cfg = TraceConfig {
            k_max: kmax,
            l_max: lmax,
            tol,
        };
        to_py(py, &trace_check(&self.inner, &f, &cfg).map_err(err)?)
    }

    /// `(value, multiplicity)`; `mode` is `"normalized"` or `"metric-weighted"`.
    #[pyo3(signature = (mode = "normalized"))]
    fn discrete_spectrum(&self, mode: &str) -> PyResult<Vec<(f64, usize)>> {
        let w = match mode {
            "normalized" => Weighting::Normalized,
            "metric-weighted" => Weighting::MetricWeighted,
            other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
        };
        Ok(discrete_spectrum(&DiscreteLaplacian::new(&self.inner, w))
            .into_iter()
            .map(|d| (d.value, d.multiplicity))
            .collect())
    }

    fn equilateral_compare<'py>(&self, py: Python<'py>, kmax: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &equilateral_compare(&self.inner, kmax).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!(
            "MetricGraph(vertices={}, edges={}, volume={})",
            self.inner.vertex_count(),
            self.inner.edge_count(),
            self.inner.volume()
        )
    }
}

/// Classification report for an ended-graph JSON description.
#[pyfunction]
fn classify<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    let d = EndedGraph::from_json(text).map_err(err)?;
    to_py(py, &classify_ended(&d).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (n, sigma, kmax, lmax, center = 0.0, tol = 1e-6))]
fn poisson_demo<'py>(
    py: Python<'py>,
    n: usize,
    sigma: f64,
    kmax: f64,
    lmax: f64,
    center: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let f = GaussianTest::new(center, sigma).map_err(err)?;
    let cfg = TraceConfig {
        k_max: kmax,
        l_max: lmax,
        tol,
    };
    to_py(py, &core_poisson(n, &f, &cfg).map_err(err)?)
}

#[pymodule]
fn qgraph(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MetricGraph>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(poisson_demo, m)?)?;
    Ok(())
}
