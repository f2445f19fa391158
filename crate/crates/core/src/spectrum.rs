//! Kirchhoff Laplacian eigenvalues of a finite metric graph.
//!
//! On every edge an eigenfunction at `lambda = k^2 > 0` is
//! `a_e cos(k x) + b_e sin(k x)`. Continuity and the zero-sum derivative
//! condition at the vertices give a real `2E x 2E` system `M(k) (a, b) = 0`.
//! Eigenvalues are the wavenumbers where `M(k)` is singular and the
//! multiplicity is the nullity of `M(k)` there.
//!
//! Roots are located by scanning the relative smallest singular value
//! `sigma_min / sigma_max` over a uniform grid, then refining every discrete
//! local minimum by golden-section search. Singular values are used instead
//! of `det M(k)` because even-multiplicity roots do not change the sign of
//! the determinant.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::MetricGraph;

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("wavenumber must be positive, got {0}")]
    NonPositiveWavenumber(f64),
    #[error("kmax must be positive and finite, got {0}")]
    BadKMax(f64),
    #[error("tolerance must lie in (0, 1e-4], got {0}")]
    BadTolerance(f64),
    #[error("grid resolution failure: {0}")]
    GridResolution(WeylReport),
    #[error("value {value} lies beyond the computed range kmax = {k_max}")]
    OutOfRange { value: f64, k_max: f64 },
    #[error("need at least {needed} eigenvalues, have {have}")]
    InsufficientEigenvalues { needed: usize, have: usize },
}

/// Secular matrix `M(k)` for the Kirchhoff conditions.
///
/// Columns are `(a_e, b_e)` per edge in edge order. For each vertex in order,
/// `deg - 1` continuity rows equate the endpoint value on each incident edge
/// with the value on the first incident edge, followed by one Kirchhoff row
/// summing inward derivatives divided by `k`.
pub fn secular_matrix(g: &MetricGraph, k: f64) -> Result<DMatrix<f64>, SolverError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(SolverError::NonPositiveWavenumber(k));
    }
    Ok(assemble(g, k))
}

// value and inward derivative / k of edge `ei` at vertex `v`, as coefficient
// pairs on (a_e, b_e)
fn endpoint_rows(g: &MetricGraph, ei: usize, v: usize, k: f64) -> ([f64; 2], [f64; 2]) {
    let e = g.edge(ei);
    if v == e.tail {
        ([1.0, 0.0], [0.0, 1.0])
    } else {
        let (s, c) = (k * e.length).sin_cos();
        ([c, s], [s, -c])
    }
}

fn assemble(g: &MetricGraph, k: f64) -> DMatrix<f64> {
    let n = 2 * g.edge_count();
    let mut m = DMatrix::zeros(n, n);
    let mut row = 0;
    for v in 0..g.vertex_count() {
        let inc = g.incident(v);
        let (ref_val, _) = endpoint_rows(g, inc[0], v, k);
        for &ei in &inc[1..] {
            let (val, _) = endpoint_rows(g, ei, v, k);
            m[(row, 2 * ei)] += val[0];
            m[(row, 2 * ei + 1)] += val[1];
            m[(row, 2 * inc[0])] -= ref_val[0];
            m[(row, 2 * inc[0] + 1)] -= ref_val[1];
            row += 1;
        }
        for &ei in inc {
            let (_, der) = endpoint_rows(g, ei, v, k);
            m[(row, 2 * ei)] += der[0];
            m[(row, 2 * ei + 1)] += der[1];
        }
        row += 1;
    }
    debug_assert_eq!(row, n);
    m
}

/// Singular values of `M(k)`, sorted descending.
pub fn singular_values(g: &MetricGraph, k: f64) -> Vec<f64> {
    let sv = assemble(g, k).singular_values();
    let mut v: Vec<f64> = sv.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// `sigma_min / sigma_max` of `M(k)`.
pub fn relative_sigma_min(g: &MetricGraph, k: f64) -> f64 {
    let sv = singular_values(g, k);
    sv[sv.len() - 1] / sv[0]
}

/// Number of singular values below `tol * sigma_max`.
pub fn nullity(g: &MetricGraph, k: f64, tol: f64) -> usize {
    let sv = singular_values(g, k);
    let top = sv[0];
    sv.iter().filter(|&&s| s < tol * top).count()
}

/// Grid step of the root scan: `pi / (8 * max length * max(1, 2E))`.
pub fn grid_step(g: &MetricGraph) -> f64 {
    PI / (8.0 * g.max_length() * (2 * g.edge_count()).max(1) as f64)
}

/// `(k, sigma_min / sigma_max)` on the scan grid `k = i * step`, `i >= 1`,
/// up to one step past `k_max`.
pub fn sigma_scan(g: &MetricGraph, k_max: f64) -> Vec<(f64, f64)> {
    let step = grid_step(g);
    let n = (k_max / step).ceil() as usize + 1;
    (1..=n)
        .into_par_iter()
        .map(|i| {
            let k = i as f64 * step;
            (k, relative_sigma_min(g, k))
        })
        .collect()
}

const GOLDEN: f64 = 0.618_033_988_749_894_8;

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= width {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Relative singular values `sigma_i / sigma_max`, ascending.
fn relative_singular_values(g: &MetricGraph, k: f64) -> Vec<f64> {
    let mut sv = singular_values(g, k);
    let top = sv[0];
    sv.reverse();
    sv.iter_mut().for_each(|s| *s /= top);
    sv
}

const CLUSTER_ETA: f64 = 0.05;
const CLUSTER_SAMPLES: usize = 256;

// Roots closer than one grid step show up as a single dip of sigma_min. Near
// an accepted root with a small next singular value, the product of the
// smallest singular values divided by the known root factors |k - r|^m stays
// away from zero unless another root is hiding in the window.
fn resolve_clusters(g: &MetricGraph, roots: &mut Vec<(f64, usize)>, step: f64, k_max: f64, tol: f64) {
    let mut i = 0;
    while i < roots.len() {
        let (r, m) = roots[i];
        let sv = relative_singular_values(g, r);
        if m < sv.len() && sv[m] < CLUSTER_ETA {
            let (lo, hi) = ((r - 4.0 * step).max(0.25 * step), (r + 4.0 * step).min(k_max));
            for _ in 0..4 {
                let local: Vec<(f64, usize)> = roots.iter().copied().filter(|&(k, _)| k >= lo && k <= hi).collect();
                let order: usize = local.iter().map(|p| p.1).sum::<usize>() + 1;
                if order > sv.len() {
                    break;
                }
                let deflated = |k: f64| {
                    let s = relative_singular_values(g, k);
                    let prod: f64 = s[..order].iter().product();
                    let known: f64 = local.iter().map(|&(c, mc)| (k - c).abs().powi(mc as i32)).product();
                    prod / known
                };
                let h = (hi - lo) / CLUSTER_SAMPLES as f64;
                let samples: Vec<(f64, f64)> = (0..=CLUSTER_SAMPLES)
                    .map(|j| {
                        let k = lo + (j as f64 + 0.37) * h;
                        (k, deflated(k))
                    })
                    .filter(|p| p.1.is_finite())
                    .collect();
                let mut found = None;
                for w in samples.windows(3) {
                    if w[1].1 <= w[0].1 && w[1].1 <= w[2].1 {
                        let (k, _) = golden_min(&deflated, w[0].0, w[2].0, 1e-13 * w[2].0.max(1.0));
                        let new = !roots.iter().any(|&(c, _)| (c - k).abs() < 1e-9 * k.max(1.0));
                        if new && k <= k_max && relative_sigma_min(g, k) < tol {
                            found = Some(k);
                            break;
                        }
                    }
                }
                match found {
                    Some(k) => {
                        roots.push((k, nullity(g, k, tol).max(1)));
                        roots.sort_by(|a, b| a.0.total_cmp(&b.0));
                    }
                    None => break,
                }
            }
        }
        i += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    /// `lambda = k^2`
    pub lambda: f64,
    /// wavenumber `k = sqrt(lambda)`
    pub k: f64,
    pub multiplicity: usize,
}

/// Distinct eigenvalues in ascending order, starting with the simple
/// eigenvalue 0, together with the wavenumber range they were computed on.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenvalueList {
    entries: Vec<Eigenvalue>,
    k_max: f64,
    volume: f64,
}

impl EigenvalueList {
    /// Assembles a list from wavenumbers and multiplicities; the zero
    /// eigenvalue is prepended. Entries must be strictly increasing in `k`.
    pub fn from_wavenumbers(roots: impl IntoIterator<Item = (f64, usize)>, k_max: f64, volume: f64) -> Self {
        let mut entries = vec![Eigenvalue {
            lambda: 0.0,
            k: 0.0,
            multiplicity: 1,
        }];
        entries.extend(roots.into_iter().map(|(k, m)| Eigenvalue {
            lambda: k * k,
            k,
            multiplicity: m,
        }));
        debug_assert!(entries.windows(2).all(|w| w[0].k < w[1].k));
        EigenvalueList { entries, k_max, volume }
    }

    pub fn entries(&self) -> &[Eigenvalue] {
        &self.entries
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Number of eigenvalues counted with multiplicity.
    pub fn total_count(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Wavenumbers repeated by multiplicity, ascending.
    pub fn wavenumbers_with_multiplicity(&self) -> Vec<f64> {
        self.entries
            .iter()
            .flat_map(|e| std::iter::repeat_n(e.k, e.multiplicity))
            .collect()
    }

    /// Copy with one unit of multiplicity removed from entry `index`.
    pub fn without_one(&self, index: usize) -> Self {
        let mut out = self.clone();
        if out.entries[index].multiplicity > 1 {
            out.entries[index].multiplicity -= 1;
        } else {
            out.entries.remove(index);
        }
        out
    }

    fn count_unchecked(&self, k: f64) -> usize {
        let idx = self.entries.partition_point(|e| e.k <= k);
        self.entries[..idx].iter().map(|e| e.multiplicity).sum()
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Multiplicity / acceptance threshold relative to `sigma_max`.
    pub tol: f64,
    pub weyl: WeylCheckConfig,
    /// Run the Weyl consistency check and fail on flags.
    pub check: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: DEFAULT_TOL,
            weyl: WeylCheckConfig::default(),
            check: true,
        }
    }
}

/// All eigenvalues `lambda = k^2` with `0 < k <= k_max`, plus `lambda = 0`.
pub fn eigenvalues(g: &MetricGraph, k_max: f64, tol: f64) -> Result<EigenvalueList, SolverError> {
    eigenvalues_with(
        g,
        k_max,
        &SolverConfig {
            tol,
            ..SolverConfig::default()
        },
    )
}

pub fn eigenvalues_with(g: &MetricGraph, k_max: f64, cfg: &SolverConfig) -> Result<EigenvalueList, SolverError> {
    if !(k_max > 0.0 && k_max.is_finite()) {
        return Err(SolverError::BadKMax(k_max));
    }
    if !(cfg.tol > 0.0 && cfg.tol <= 1e-4) {
        return Err(SolverError::BadTolerance(cfg.tol));
    }
    let scan = sigma_scan(g, k_max);
    let candidates: Vec<(f64, f64)> = scan
        .windows(3)
        .filter(|w| w[1].1 <= w[0].1 && w[1].1 <= w[2].1)
        .map(|w| (w[0].0, w[2].0))
        .collect();

    let refined: Vec<(f64, f64)> = candidates
        .par_iter()
        .map(|&(a, b)| golden_min(|k| relative_sigma_min(g, k), a, b, 1e-13 * b.max(1.0)))
        .collect();

    let step = grid_step(g);
    let mut roots: Vec<(f64, usize)> = Vec::new();
    for (k, s) in refined {
        if s >= cfg.tol || k > k_max || k < 0.25 * step {
            continue;
        }
        // two adjacent grid minima bracketing the same root
        if let Some(last) = roots.last() {
            if (k - last.0).abs() < 1e-9 * k.max(1.0) {
                continue;
            }
        }
        roots.push((k, nullity(g, k, cfg.tol).max(1)));
    }
    resolve_clusters(g, &mut roots, step, k_max, cfg.tol);
    let list = EigenvalueList::from_wavenumbers(roots, k_max, g.volume());
    if cfg.check {
        let report = weyl_check(&list, g, &cfg.weyl);
        if !report.flags.is_empty() {
            return Err(SolverError::GridResolution(report));
        }
    }
    Ok(list)
}

/// `N(k)`: eigenvalues (with multiplicity) whose square root is at most `k`.
pub fn counting_function(ev: &EigenvalueList, k: f64) -> Result<usize, SolverError> {
    if k > ev.k_max {
        return Err(SolverError::OutOfRange {
            value: k,
            k_max: ev.k_max,
        });
    }
    Ok(ev.count_unchecked(k))
}

/// Samples `(k, N(k), vol k / pi)` at `n` evenly spaced points in `[0, kmax]`.
pub fn weyl_samples(ev: &EigenvalueList, n: usize) -> Vec<(f64, usize, f64)> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let k = ev.k_max * i as f64 / (n - 1) as f64;
            (k, ev.count_unchecked(k), ev.volume * k / PI)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylFit {
    pub slope: f64,
    pub intercept: f64,
    /// `vol / pi`
    pub expected_slope: f64,
    pub rel_error: f64,
}

pub const WEYL_MIN_EIGENVALUES: usize = 50;
const WEYL_FIT_SAMPLES: usize = 8192;

/// Least-squares line through `N(k)` sampled uniformly on the computed range.
pub fn weyl_fit(ev: &EigenvalueList) -> Result<WeylFit, SolverError> {
    let have = ev.total_count();
    if have < WEYL_MIN_EIGENVALUES {
        return Err(SolverError::InsufficientEigenvalues {
            needed: WEYL_MIN_EIGENVALUES,
            have,
        });
    }
    let n = WEYL_FIT_SAMPLES;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let k = ev.k_max * (i as f64 + 0.5) / n as f64;
            (k, ev.count_unchecked(k) as f64)
        })
        .collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let expected = ev.volume / PI;
    Ok(WeylFit {
        slope,
        intercept: my - slope * mx,
        expected_slope: expected,
        rel_error: (slope - expected).abs() / expected,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeylCheckConfig {
    /// Pointwise bound on `|N(k) - vol k / pi|`; `None` means `2 + 2 #V`.
    pub bound: Option<f64>,
    /// Allowed deviation of a window mean of `N(k) - vol k / pi` from the
    /// mean value `(1 - betti) / 2`.
    pub drift_bound: f64,
    /// Window length in units of `pi / min edge length`.
    pub window_periods: f64,
}

impl Default for WeylCheckConfig {
    fn default() -> Self {
        WeylCheckConfig {
            bound: None,
            drift_bound: 0.5,
            window_periods: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeylFlag {
    InsufficientData,
    /// `|N(k) - vol k / pi|` exceeds the bound at `k`.
    Excess { k: f64, remainder: f64 },
    /// Mean remainder over `[start, end]` drifted away from `(1 - betti) / 2`.
    Drift { start: f64, end: f64, mean: f64, expected: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylReport {
    pub bound: f64,
    pub max_abs_remainder: f64,
    pub window_means: Vec<(f64, f64, f64)>,
    pub expected_mean: f64,
    pub flags: Vec<WeylFlag>,
}

impl std::fmt::Display for WeylReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} Weyl flag(s)", self.flags.len())?;
        for flag in self.flags.iter().take(3) {
            match flag {
                WeylFlag::InsufficientData => write!(f, "; no eigenvalues computed")?,
                WeylFlag::Excess { k, remainder } => write!(f, "; remainder {remainder:.3} at k = {k:.6}")?,
                WeylFlag::Drift { start, end, mean, expected } => {
                    write!(f, "; mean remainder {mean:.3} on [{start:.3}, {end:.3}] (expected {expected:.3})")?
                }
            }
        }
        Ok(())
    }
}

/// Missed/spurious root detector based on Weyl's law.
///
/// Two tests: the remainder `N(k) - vol k / pi` must stay within the
/// pointwise bound, and its average over windows must stay near
/// `(1 - betti) / 2`, the mean value of the remainder on a compact graph.
/// A single missed simple root shifts every later window mean by one.
pub fn weyl_check(ev: &EigenvalueList, g: &MetricGraph, cfg: &WeylCheckConfig) -> WeylReport {
    let bound = cfg.bound.unwrap_or(2.0 + 2.0 * g.vertex_count() as f64);
    let slope = g.volume() / PI;
    let expected = (1.0 - g.betti() as f64) / 2.0;
    let mut flags = Vec::new();
    let entries = ev.entries();
    if entries.len() <= 1 {
        flags.push(WeylFlag::InsufficientData);
    }

    // just before and at each jump
    let mut max_abs: f64 = 0.0;
    let mut count = 0usize;
    for e in entries {
        let before = count as f64 - slope * e.k;
        count += e.multiplicity;
        let after = count as f64 - slope * e.k;
        for r in [before, after] {
            max_abs = max_abs.max(r.abs());
            if r.abs() > bound {
                flags.push(WeylFlag::Excess { k: e.k, remainder: r });
            }
        }
    }
    let tail = count as f64 - slope * ev.k_max();
    max_abs = max_abs.max(tail.abs());
    if tail.abs() > bound {
        flags.push(WeylFlag::Excess {
            k: ev.k_max(),
            remainder: tail,
        });
    }

    let window = cfg.window_periods * PI / g.min_length();
    let n_windows = (ev.k_max() / window).floor() as usize;
    let mut window_means = Vec::new();
    if entries.len() > 1 {
        for w in 0..n_windows {
            let (a, b) = (w as f64 * window, (w + 1) as f64 * window);
            let mean = remainder_integral(ev, slope, a, b) / (b - a) - expected;
            window_means.push((a, b, mean + expected));
            if mean.abs() > cfg.drift_bound {
                flags.push(WeylFlag::Drift {
                    start: a,
                    end: b,
                    mean: mean + expected,
                    expected,
                });
            }
        }
    }
    WeylReport {
        bound,
        max_abs_remainder: max_abs,
        window_means,
        expected_mean: expected,
        flags,
    }
}

// exact integral of N(k) - slope * k over [a, b]
fn remainder_integral(ev: &EigenvalueList, slope: f64, a: f64, b: f64) -> f64 {
    let mut integral = 0.0;
    let mut left = a;
    let mut count = ev.count_unchecked(a) as f64;
    for e in ev.entries().iter().filter(|e| e.k > a && e.k <= b) {
        integral += count * (e.k - left);
        count += e.multiplicity as f64;
        left = e.k;
    }
    integral += count * (b - left);
    integral - slope * (b * b - a * a) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> MetricGraph {
        MetricGraph::from_edges([("e", "a", "b", 1.0)]).unwrap()
    }

    fn circle3() -> MetricGraph {
        let t = 1.0 / 3.0;
        MetricGraph::from_edges([("e1", "a", "b", t), ("e2", "b", "c", t), ("e3", "c", "a", t)]).unwrap()
    }

    #[test]
    fn matrix_is_square_with_expected_rows() {
        let g = circle3();
        let m = secular_matrix(&g, 1.3).unwrap();
        assert_eq!(m.shape(), (6, 6));
        assert!(matches!(secular_matrix(&g, 0.0), Err(SolverError::NonPositiveWavenumber(_))));
        assert!(matches!(secular_matrix(&g, -1.0), Err(SolverError::NonPositiveWavenumber(_))));
    }

    #[test]
    fn neumann_interval_singular_at_n_pi() {
        let g = interval();
        for n in 1..6 {
            assert_eq!(nullity(&g, n as f64 * PI, 1e-8), 1);
            assert_eq!(nullity(&g, (n as f64 + 0.5) * PI, 1e-8), 0);
        }
    }

    #[test]
    fn triangle_has_kernel_at_two_pi() {
        let g = MetricGraph::from_edges([("ab", "a", "b", 1.0), ("bc", "b", "c", 1.0), ("ca", "c", "a", 1.0)]).unwrap();
        assert!(nullity(&g, 2.0 * PI, 1e-8) >= 1);
        assert_eq!(nullity(&g, 1.0, 1e-8), 0);
    }

    #[test]
    fn interval_spectrum() {
        let ev = eigenvalues(&interval(), 20.0, 1e-8).unwrap();
        let ks: Vec<f64> = ev.entries().iter().map(|e| e.k).collect();
        assert_eq!(ks.len(), 7);
        for (n, e) in ev.entries().iter().enumerate() {
            assert!((e.k - n as f64 * PI).abs() < 1e-9, "{e:?}");
            assert_eq!(e.multiplicity, 1);
        }
    }

    #[test]
    fn circle_double_eigenvalues() {
        let ev = eigenvalues(&circle3(), 20.0, 1e-8).unwrap();
        assert_eq!(ev.entries()[0].multiplicity, 1);
        for (n, e) in ev.entries().iter().enumerate().skip(1) {
            assert!((e.k - 2.0 * PI * n as f64).abs() < 1e-9);
            assert_eq!(e.multiplicity, 2);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let g = interval();
        assert!(matches!(eigenvalues(&g, -1.0, 1e-8), Err(SolverError::BadKMax(_))));
        assert!(matches!(eigenvalues(&g, 5.0, 1e-3), Err(SolverError::BadTolerance(_))));
        assert!(matches!(eigenvalues(&g, 5.0, 0.0), Err(SolverError::BadTolerance(_))));
    }

    #[test]
    fn counting_function_examples() {
        let ev = eigenvalues(&circle3(), 10.0, 1e-8).unwrap();
        assert_eq!(counting_function(&ev, 0.0).unwrap(), 1);
        assert_eq!(counting_function(&ev, 2.0 * PI + 0.1).unwrap(), 3);
        assert!(matches!(counting_function(&ev, 11.0), Err(SolverError::OutOfRange { .. })));
        let mut prev = 0;
        for i in 0..100 {
            let n = counting_function(&ev, i as f64 * 0.1).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn weyl_fit_needs_enough_eigenvalues() {
        let ev = eigenvalues(&interval(), 10.0, 1e-8).unwrap();
        assert!(matches!(weyl_fit(&ev), Err(SolverError::InsufficientEigenvalues { .. })));
    }

    #[test]
    fn weyl_check_flags() {
        let g = circle3();
        let ev = eigenvalues(&g, 400.0, 1e-8).unwrap();
        let cfg = WeylCheckConfig::default();
        assert!(weyl_check(&ev, &g, &cfg).flags.is_empty());

        let corrupted = ev.without_one(5);
        let report = weyl_check(&corrupted, &g, &cfg);
        assert!(report
            .flags
            .iter()
            .any(|f| matches!(f, WeylFlag::Drift { start, .. } if *start > 100.0)));

        let empty = EigenvalueList::from_wavenumbers([], 1.0, g.volume());
        assert_eq!(weyl_check(&empty, &g, &cfg).flags[0], WeylFlag::InsufficientData);
    }

    #[test]
    fn golden_section_finds_v_minimum() {
        let (x, fx) = golden_min(|x| (x - 0.3).abs(), 0.0, 1.0, 1e-13);
        assert!((x - 0.3).abs() < 1e-12);
        assert!(fx < 1e-12);
    }
}
