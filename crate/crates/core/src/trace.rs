//! Both sides of the periodic-orbit trace formula, paired with Gaussian test
//! functions.
//!
//! Spectral side: `(betti + 1) f^(0) + sum_k f^(k_j) + f^(-k_j)` over the
//! wavenumbers `k_j = sqrt(lambda_j)`.
//! Orbit side: `2 vol f(0) + sum_p s(p) l(prim p) (f(l(p)) + f(-l(p)))`.
//! The Fourier transform is `f^(xi) = int exp(-i xi x) f(x) dx`.
//!
//! Both sums are truncated (at `kmax` and `lmax` respectively) and reported
//! together with an estimate of the neglected tail.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::graph::{GraphError, MetricGraph};
use crate::orbits::{for_each_orbit, OrbitConfig, OrbitError, PeriodicOrbit, ScatteringTable};
use crate::spectrum::{eigenvalues, EigenvalueList, SolverError, DEFAULT_TOL};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("Gaussian width must be positive and finite, got {0}")]
    BadWidth(f64),
    #[error("spectral tail bound {tail:e} exceeds tolerance {tol:e}; increase kmax")]
    IncreaseKMax { tail: f64, tol: f64 },
    #[error("orbit tail estimate {tail:e} exceeds tolerance {tol:e}; increase lmax")]
    IncreaseLMax { tail: f64, tol: f64 },
    #[error("window {window} too narrow for kmax = {k_max}: need at least {min} (peak resolution ~ {resolution})")]
    WindowTooNarrow {
        window: f64,
        k_max: f64,
        min: f64,
        resolution: f64,
    },
    #[error("cycle needs at least 3 vertices, got {0}")]
    CycleTooSmall(usize),
    #[error("scan range must be positive, got {0}")]
    BadRange(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// `f(x) = exp(-(x - c)^2 / (2 w^2))`.
///
/// Pairings use `f(x) + f(-x)` when the center is nonzero so that both sides
/// of the formula are real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianTest {
    pub center: f64,
    pub width: f64,
}

impl GaussianTest {
    pub fn new(center: f64, width: f64) -> Result<Self, TraceError> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(TraceError::BadWidth(width));
        }
        Ok(GaussianTest { center, width })
    }

    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.center) / self.width;
        (-0.5 * z * z).exp()
    }

    /// `f^(xi)` as `(re, im)`: `w sqrt(2 pi) exp(-w^2 xi^2 / 2) exp(-i xi c)`.
    pub fn transform(&self, xi: f64) -> (f64, f64) {
        let amp = self.width * (2.0 * PI).sqrt() * (-0.5 * (self.width * xi).powi(2)).exp();
        let (s, c) = (xi * self.center).sin_cos();
        (amp * c, -amp * s)
    }

    pub fn is_symmetrized(&self) -> bool {
        self.center != 0.0
    }

    /// The function actually paired: `f(x) + f(-x)` or `f` when centered.
    pub fn paired_value(&self, x: f64) -> f64 {
        if self.is_symmetrized() {
            self.value(x) + self.value(-x)
        } else {
            self.value(x)
        }
    }

    /// Transform of [`GaussianTest::paired_value`]; always real.
    pub fn paired_transform(&self, xi: f64) -> f64 {
        let (re, _) = self.transform(xi);
        if self.is_symmetrized() {
            2.0 * re
        } else {
            re
        }
    }

    // bound on |paired_transform| integrated over [k, inf)
    fn transform_tail(&self, k: f64) -> f64 {
        let mult = if self.is_symmetrized() { 2.0 } else { 1.0 };
        mult * PI * erfc(self.width * k / std::f64::consts::SQRT_2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: f64,
    pub mass: u64,
}

/// Counting measure of the wave spectrum:
/// `(betti + 1) delta_0 + sum_j delta_{k_j} + delta_{-k_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMeasure {
    atoms: Vec<Atom>,
    betti: usize,
    volume: f64,
    k_max: f64,
}

impl SpectralMeasure {
    pub fn new(ev: &EigenvalueList, betti: usize) -> Self {
        let mut atoms = vec![Atom {
            position: 0.0,
            mass: betti as u64 + 1,
        }];
        for e in ev.entries().iter().filter(|e| e.k > 0.0) {
            let mass = e.multiplicity as u64;
            atoms.push(Atom { position: e.k, mass });
            atoms.push(Atom { position: -e.k, mass });
        }
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        let m = SpectralMeasure {
            atoms,
            betti,
            volume: ev.volume(),
            k_max: ev.k_max(),
        };
        assert_eq!(m.mass_at_zero(), betti as u64 + 1);
        assert!(m.is_symmetric());
        m
    }

    pub fn from_graph(g: &MetricGraph, k_max: f64) -> Result<Self, TraceError> {
        Ok(Self::new(&eigenvalues(g, k_max, DEFAULT_TOL)?, g.betti()))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn betti(&self) -> usize {
        self.betti
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn mass_at_zero(&self) -> u64 {
        self.atoms.iter().filter(|a| a.position == 0.0).map(|a| a.mass).sum()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.atoms.len();
        (0..n).all(|i| {
            let (a, b) = (self.atoms[i], self.atoms[n - 1 - i]);
            a.position == -b.position && a.mass == b.mass
        })
    }

    /// `int phi dmu`, compensated.
    pub fn pair(&self, phi: impl Fn(f64) -> f64) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass as f64 * phi(a.position))
            .collect::<CompensatedSum>()
            .value()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideValue {
    pub value: f64,
    pub tail_bound: f64,
}

pub const DEFAULT_SAFETY: f64 = 2.0;

/// Spectral side. The tail uses the Weyl density `vol / pi` for the
/// eigenvalues beyond the computed range.
pub fn lhs(mu: &SpectralMeasure, f: &GaussianTest, safety: f64) -> SideValue {
    let value = mu.pair(|x| f.paired_transform(x));
    let tail = safety * (mu.volume / PI) * 2.0 * f.transform_tail(mu.k_max);
    SideValue { value, tail_bound: tail }
}

/// Accumulates the orbit side from a stream of orbits with `length <= lmax`.
#[derive(Debug, Clone)]
pub struct OrbitSide {
    sum: CompensatedSum,
    weight_half: f64,
    weight_full: f64,
    count: usize,
    l_max: f64,
}

impl OrbitSide {
    pub fn new(l_max: f64) -> Self {
        OrbitSide {
            sum: CompensatedSum::default(),
            weight_half: 0.0,
            weight_full: 0.0,
            count: 0,
            l_max,
        }
    }

    pub fn add(&mut self, orbit: &PeriodicOrbit, table: &ScatteringTable, f: &GaussianTest) {
        let s = orbit.scattering(table);
        let l = orbit.length();
        let w = s * orbit.primitive_length();
        self.sum.add(w * (f.paired_value(l) + f.paired_value(-l)));
        self.weight_full += w.abs();
        if l <= self.l_max / 2.0 {
            self.weight_half += w.abs();
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Adds `2 vol f(0)` and estimates the tail beyond `lmax`.
    ///
    /// The estimate is heuristic: the cumulative orbit weight
    /// `W(L) = sum |s(p)| l(prim p)` is assumed to grow like `exp(h L)` with
    /// `h` fitted from `W(lmax / 2)` and `W(lmax)`.
    pub fn finish(&self, volume: f64, f: &GaussianTest, safety: f64) -> SideValue {
        let mut total = self.sum;
        total.add(2.0 * volume * f.paired_value(0.0));
        let h = if self.weight_half > 0.0 && self.weight_full > self.weight_half {
            (self.weight_full / self.weight_half).ln() / (self.l_max / 2.0)
        } else {
            0.0
        };
        let w = self.weight_full.max(1.0);
        // density dW/dL continued past lmax
        let density = |t: f64| {
            if h > 0.0 {
                h * w * (h * (t - self.l_max)).exp()
            } else {
                w / self.l_max
            }
        };
        let peak = (f.center.abs() + h * f.width * f.width).max(self.l_max);
        let upper = peak + 40.0 * f.width;
        let n = 4000;
        let dt = (upper - self.l_max) / n as f64;
        let integrand = |t: f64| density(t) * (f.paired_value(t).abs() + f.paired_value(-t).abs());
        // Simpson
        let mut acc = integrand(self.l_max) + integrand(upper);
        for i in 1..n {
            let t = self.l_max + i as f64 * dt;
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(t);
        }
        SideValue {
            value: total.value(),
            tail_bound: safety * acc * dt / 3.0,
        }
    }
}

/// Orbit side from an explicit orbit list (all orbits with `length <= l_max`).
pub fn rhs<'a>(
    g: &MetricGraph,
    orbits: impl IntoIterator<Item = &'a PeriodicOrbit>,
    l_max: f64,
    f: &GaussianTest,
) -> SideValue {
    let table = ScatteringTable::new(g);
    let mut side = OrbitSide::new(l_max);
    for o in orbits {
        side.add(o, &table, f);
    }
    side.finish(g.volume(), f, DEFAULT_SAFETY)
}

/// Orbit side, streaming the orbits with nonzero scattering coefficient.
pub fn rhs_streaming(g: &MetricGraph, l_max: f64, f: &GaussianTest, cfg: &OrbitConfig) -> Result<(SideValue, usize), TraceError> {
    let table = ScatteringTable::new(g);
    let mut side = OrbitSide::new(l_max);
    let cfg = OrbitConfig {
        nonzero_only: true,
        ..*cfg
    };
    for_each_orbit(g, l_max, &cfg, |o| side.add(&o, &table, f))?;
    let count = side.count();
    Ok((side.finish(g.volume(), f, DEFAULT_SAFETY), count))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConfig {
    pub k_max: f64,
    pub l_max: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceReport {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    pub pass: bool,
    pub eigenvalue_count: usize,
    pub orbit_count: usize,
}

pub fn trace_check(g: &MetricGraph, f: &GaussianTest, cfg: &TraceConfig) -> Result<TraceReport, TraceError> {
    let ev = eigenvalues(g, cfg.k_max, DEFAULT_TOL)?;
    let mu = SpectralMeasure::new(&ev, g.betti());
    let left = lhs(&mu, f, DEFAULT_SAFETY);
    if left.tail_bound > cfg.tol {
        return Err(TraceError::IncreaseKMax {
            tail: left.tail_bound,
            tol: cfg.tol,
        });
    }
    let (right, orbit_count) = rhs_streaming(g, cfg.l_max, f, &OrbitConfig::default())?;
    if right.tail_bound > cfg.tol {
        return Err(TraceError::IncreaseLMax {
            tail: right.tail_bound,
            tol: cfg.tol,
        });
    }
    let diff = (left.value - right.value).abs();
    Ok(TraceReport {
        lhs: left.value,
        rhs: right.value,
        diff,
        lhs_tail: left.tail_bound,
        rhs_tail: right.tail_bound,
        pass: diff <= cfg.tol + left.tail_bound + right.tail_bound,
        eigenvalue_count: ev.total_count(),
        orbit_count,
    })
}

/// The `n`-cycle with all lengths `1 / n`, a model of the unit circle.
pub fn unit_circle(n: usize) -> Result<MetricGraph, TraceError> {
    if n < 3 {
        return Err(TraceError::CycleTooSmall(n));
    }
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    let ids: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let len = 1.0 / n as f64;
    let edges: Vec<(&str, &str, &str, f64)> = (0..n)
        .map(|i| (ids[i].as_str(), names[i].as_str(), names[(i + 1) % n].as_str(), len))
        .collect();
    Ok(MetricGraph::from_edges(edges)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonReport {
    pub n: usize,
    /// `sum_k f^(2 pi k)`
    pub fourier_sum: f64,
    /// `sum_k f(k)`
    pub direct_sum: f64,
    pub poisson_diff: f64,
    pub poisson_pass: bool,
    pub trace: TraceReport,
}

pub const POISSON_TOL: f64 = 1e-10;

/// Runs the trace check on the unit circle and checks Poisson summation
/// `sum_k f^(2 pi k) = sum_k f(k)` directly.
pub fn poisson_demo(n: usize, f: &GaussianTest, cfg: &TraceConfig) -> Result<PoissonReport, TraceError> {
    let g = unit_circle(n)?;
    let trace = trace_check(&g, f, cfg)?;

    let kf = (40.0 / (2.0 * PI * f.width)).ceil() as i64 + 1;
    let fourier_sum = (-kf..=kf)
        .map(|k| f.transform(2.0 * PI * k as f64).0)
        .collect::<CompensatedSum>()
        .value();
    let lo = (f.center - 40.0 * f.width).floor() as i64;
    let hi = (f.center + 40.0 * f.width).ceil() as i64;
    let direct_sum = (lo..=hi).map(|k| f.value(k as f64)).collect::<CompensatedSum>().value();
    let poisson_diff = (fourier_sum - direct_sum).abs();
    Ok(PoissonReport {
        n,
        fourier_sum,
        direct_sum,
        poisson_diff,
        poisson_pass: poisson_diff <= POISSON_TOL,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub samples: Vec<(f64, f64)>,
    pub peaks: Vec<Peak>,
    pub noise_floor: f64,
    /// `~ 1 / kmax`
    pub resolution: f64,
}

/// Smallest admissible `window * kmax`.
pub const MIN_WINDOW_PRODUCT: f64 = 5.0;

/// Default window for a spectrum computed up to `k_max`.
pub fn default_window(k_max: f64) -> f64 {
    6.0 / k_max
}

/// Smoothed transform `F(t) = sum mass w(x) cos(x t)` over the atoms, with
/// `w(x) = exp(-window^2 x^2 / 2)`, sampled on `[0, range]`; peaks of `|F|`
/// sit at the orbit lengths.
pub fn recover_orbit_lengths(mu: &SpectralMeasure, window: f64, range: f64) -> Result<Recovery, TraceError> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(TraceError::BadRange(range));
    }
    let min = MIN_WINDOW_PRODUCT / mu.k_max;
    if !(window >= min && window.is_finite()) {
        return Err(TraceError::WindowTooNarrow {
            window,
            k_max: mu.k_max,
            min,
            resolution: 1.0 / mu.k_max,
        });
    }
    let step = window.min(0.01);
    let n = (range / step).round() as usize;
    let weights: Vec<(f64, f64)> = mu
        .atoms
        .iter()
        .map(|a| (a.position, a.mass as f64 * (-0.5 * (window * a.position).powi(2)).exp()))
        .collect();
    let samples: Vec<(f64, f64)> = (0..=n)
        .map(|i| {
            let t = i as f64 * step;
            let v = weights.iter().map(|&(x, w)| w * (x * t).cos()).collect::<CompensatedSum>().value();
            (t, v)
        })
        .collect();
    let mut mags: Vec<f64> = samples.iter().map(|s| s.1.abs()).collect();
    mags.sort_by(f64::total_cmp);
    let median = if mags.is_empty() { 0.0 } else { mags[mags.len() / 2] };
    let floor = 3.0 * median;

    let mut peaks = Vec::new();
    for w in samples.windows(3) {
        let (a, b, c) = (w[0].1.abs(), w[1].1.abs(), w[2].1.abs());
        if b > a && b >= c && b > floor {
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * step * (a - c) / denom } else { 0.0 };
            peaks.push(Peak {
                position: w[1].0 + shift.clamp(-step, step),
                height: b,
            });
        }
    }
    Ok(Recovery {
        samples,
        peaks,
        noise_floor: floor,
        resolution: 1.0 / mu.k_max,
    })
}
