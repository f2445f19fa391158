//! Command-line front end. Table commands emit CSV (default) or JSON; check
//! and report commands emit JSON.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::discrete::{discrete_spectrum, equilateral_compare, DiscreteLaplacian, Weighting};
use crate::ends::{classify, EndedGraph, EndedGraphSpec};
use crate::graph::{GraphSpec, MetricGraph};
use crate::orbits::{enumerate_orbits_with, OrbitConfig, ScatteringTable, DEFAULT_MAX_ORBITS};
use crate::spectrum::{
    eigenvalues, eigenvalues_with, sigma_scan, weyl_check, weyl_fit, weyl_samples, SolverConfig, SolverError, DEFAULT_TOL,
};
use crate::trace::{
    default_window, poisson_demo, recover_orbit_lengths, trace_check, GaussianTest, SpectralMeasure, TraceConfig,
    TraceError,
};

#[derive(Debug, Clone, Parser)]
#[command(name = "qgraph", version, about = "Spectra, periodic orbits and trace formulas of compact metric graphs")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format; defaults to csv for tables and json for reports.
    #[arg(long = "out", global = true, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Normalized,
    MetricWeighted,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Kirchhoff eigenvalues up to kmax.
    Spectrum(SpectrumArgs),
    /// Counting function samples, Weyl fit and remainder check.
    Weyl(WeylArgs),
    /// Periodic orbits up to length lmax.
    Orbits(OrbitArgs),
    /// Compare both sides of the trace formula for a Gaussian test function.
    TraceCheck(TraceArgs),
    /// Trace formula on the unit circle plus a direct Poisson summation check.
    Poisson(PoissonArgs),
    /// Equilateral correspondence with the normalized Laplacian.
    Equilateral(EquilateralArgs),
    /// Spectrum of a discrete Laplacian on the vertex set.
    DiscreteSpectrum(DiscreteArgs),
    /// Ends, end volumes, Markovian uniqueness and self-adjointness.
    Classify(ClassifyArgs),
    /// Orbit lengths from peaks of the smoothed spectral transform.
    RecoverLengths(RecoverArgs),
}

fn positive(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be positive and finite, got {x}"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be finite, got {x}"))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = positive)]
    pub kmax: f64,
    #[arg(long, value_parser = positive, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Emit the relative smallest singular value on the scan grid instead.
    #[arg(long)]
    pub scan: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WeylArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = positive)]
    pub kmax: f64,
    #[arg(long, value_parser = positive, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 512)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OrbitArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = positive)]
    pub lmax: f64,
    /// Skip orbits with vanishing scattering coefficient.
    #[arg(long)]
    pub nonzero_only: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_ORBITS)]
    pub max_orbits: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = positive)]
    pub sigma: f64,
    #[arg(long, value_parser = finite, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center: f64,
    #[arg(long, value_parser = positive)]
    pub kmax: f64,
    #[arg(long, value_parser = positive)]
    pub lmax: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PoissonArgs {
    /// Number of vertices of the cycle model.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, value_parser = positive)]
    pub sigma: f64,
    #[arg(long, value_parser = finite, default_value_t = 0.0, allow_hyphen_values = true)]
    pub center: f64,
    #[arg(long, value_parser = positive)]
    pub kmax: f64,
    #[arg(long, value_parser = positive)]
    pub lmax: f64,
    #[arg(long, value_parser = positive, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct EquilateralArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = positive)]
    pub kmax: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DiscreteArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Normalized)]
    pub mode: Mode,
}

#[derive(Debug, Clone, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct RecoverArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_parser = positive)]
    pub kmax: f64,
    /// Upper end of the scan range.
    #[arg(long, value_parser = positive)]
    pub lmax: f64,
    /// Window width; defaults to 6 / kmax.
    #[arg(long, value_parser = positive)]
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Fail => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifact: String,
    pub status: Status,
}

#[derive(Debug, Clone)]
pub struct CliError {
    pub message: String,
    pub code: i32,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            message: message.into(),
            code: 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::GridResolution(_) => CliError {
                message: e.to_string(),
                code: 1,
            },
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        match e {
            TraceError::Solver(s) => s.into(),
            other => CliError::input(other.to_string()),
        }
    }
}

/// `x` with 12 significant digits, `%g` style.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap();
            let r: f64 = fmt_num(x).parse().unwrap();
            *v = json!(r);
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to 12 significant digits.
pub fn to_json(report: &impl Serialize) -> String {
    let mut v = serde_json::to_value(report).expect("reports serialize");
    round_value(&mut v);
    let mut s = serde_json::to_string_pretty(&v).unwrap();
    s.push('\n');
    s
}

fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CliError::input(format!("{}: field `{field}`: {}", path.display(), e.inner()))
    })
}

fn load_graph(path: &Path) -> Result<MetricGraph, CliError> {
    let spec: GraphSpec = read_json(path)?;
    MetricGraph::from_spec(&spec).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn load_ended(path: &Path) -> Result<EndedGraph, CliError> {
    let spec: EndedGraphSpec = read_json(path)?;
    EndedGraph::from_spec(spec).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn report_only(cfg: &RunConfig, name: &str) -> Result<(), CliError> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::input(format!("{name} emits json only")));
    }
    Ok(())
}

fn ok(artifact: String) -> Outcome {
    Outcome {
        artifact,
        status: Status::Ok,
    }
}

fn verdict(artifact: String, pass: bool) -> Outcome {
    Outcome {
        artifact,
        status: if pass { Status::Ok } else { Status::Fail },
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let table_json = cfg.format == Some(Format::Json);
    match &cfg.command {
        Command::Spectrum(a) => {
            let g = load_graph(&a.graph)?;
            if a.scan {
                let rows = sigma_scan(&g, a.kmax);
                return Ok(ok(if table_json {
                    to_json(&json!({ "k_max": a.kmax, "scan": rows }))
                } else {
                    csv(&["k", "sigma_rel"], rows.iter().map(|(k, s)| vec![fmt_num(*k), fmt_num(*s)]))
                }));
            }
            let ev = eigenvalues(&g, a.kmax, a.tol)?;
            Ok(ok(if table_json {
                to_json(&json!({ "k_max": a.kmax, "volume": g.volume(), "eigenvalues": ev.entries() }))
            } else {
                csv(
                    &["lambda", "sqrt_lambda", "multiplicity"],
                    ev.entries()
                        .iter()
                        .map(|e| vec![fmt_num(e.lambda), fmt_num(e.k), e.multiplicity.to_string()]),
                )
            }))
        }
        Command::Weyl(a) => {
            let g = load_graph(&a.graph)?;
            let solver = SolverConfig {
                tol: a.tol,
                check: false,
                ..SolverConfig::default()
            };
            let ev = eigenvalues_with(&g, a.kmax, &solver)?;
            let report = weyl_check(&ev, &g, &solver.weyl);
            let samples = weyl_samples(&ev, a.samples);
            let pass = report.flags.is_empty();
            let artifact = if table_json {
                let fit = weyl_fit(&ev).ok();
                to_json(&json!({ "k_max": a.kmax, "volume": g.volume(), "eigenvalue_count": ev.total_count(),
                    "fit": fit, "check": report, "samples": samples }))
            } else {
                csv(
                    &["lambda", "N", "vol_over_pi_lambda"],
                    samples.iter().map(|(k, n, w)| vec![fmt_num(*k), n.to_string(), fmt_num(*w)]),
                )
            };
            Ok(verdict(artifact, pass))
        }
        Command::Orbits(a) => {
            let g = load_graph(&a.graph)?;
            let oc = OrbitConfig {
                max_orbits: a.max_orbits,
                nonzero_only: a.nonzero_only,
            };
            let orbits = enumerate_orbits_with(&g, a.lmax, &oc).map_err(|e| CliError::input(e.to_string()))?;
            let table = ScatteringTable::new(&g);
            let rows: Vec<(f64, f64, usize, f64, String)> = orbits
                .iter()
                .map(|o| (o.length(), o.primitive_length(), o.repetition(), o.scattering(&table), o.canonical_id(&g)))
                .collect();
            Ok(ok(if table_json {
                let list: Vec<Value> = rows
                    .iter()
                    .map(|(l, p, r, s, b)| json!({ "length": l, "primitive_length": p, "repetition": r, "scattering": s, "canonical_id": b }))
                    .collect();
                to_json(&json!({ "l_max": a.lmax, "count": rows.len(), "orbits": list }))
            } else {
                csv(
                    &["canonical_id", "length", "primitive_length", "repetition", "scattering"],
                    rows.iter()
                        .map(|(l, p, r, s, b)| vec![b.clone(), fmt_num(*l), fmt_num(*p), r.to_string(), fmt_num(*s)]),
                )
            }))
        }
        Command::TraceCheck(a) => {
            report_only(cfg, "trace-check")?;
            let g = load_graph(&a.graph)?;
            let f = GaussianTest::new(a.center, a.sigma)?;
            let r = trace_check(
                &g,
                &f,
                &TraceConfig {
                    k_max: a.kmax,
                    l_max: a.lmax,
                    tol: a.tol,
                },
            )?;
            Ok(verdict(to_json(&r), r.pass))
        }
        Command::Poisson(a) => {
            report_only(cfg, "poisson")?;
            let f = GaussianTest::new(a.center, a.sigma)?;
            let r = poisson_demo(
                a.n,
                &f,
                &TraceConfig {
                    k_max: a.kmax,
                    l_max: a.lmax,
                    tol: a.tol,
                },
            )?;
            let pass = r.poisson_pass && r.trace.pass;
            Ok(verdict(to_json(&r), pass))
        }
        Command::Equilateral(a) => {
            report_only(cfg, "equilateral")?;
            let g = load_graph(&a.graph)?;
            let r = equilateral_compare(&g, a.kmax).map_err(|e| match e {
                crate::discrete::DiscreteError::Solver(s) => CliError::from(s),
                other => CliError::input(other.to_string()),
            })?;
            Ok(verdict(to_json(&r), r.pass))
        }
        Command::DiscreteSpectrum(a) => {
            let g = load_graph(&a.graph)?;
            let weighting = match a.mode {
                Mode::Normalized => Weighting::Normalized,
                Mode::MetricWeighted => Weighting::MetricWeighted,
            };
            let spec = discrete_spectrum(&DiscreteLaplacian::new(&g, weighting));
            Ok(ok(if table_json {
                to_json(&json!({ "mode": weighting, "eigenvalues": spec }))
            } else {
                csv(
                    &["value", "multiplicity"],
                    spec.iter().map(|d| vec![fmt_num(d.value), d.multiplicity.to_string()]),
                )
            }))
        }
        Command::Classify(a) => {
            report_only(cfg, "classify")?;
            let d = load_ended(&a.graph)?;
            let r = classify(&d).map_err(|e| CliError::input(e.to_string()))?;
            Ok(ok(to_json(&r)))
        }
        Command::RecoverLengths(a) => {
            let g = load_graph(&a.graph)?;
            let mu = SpectralMeasure::from_graph(&g, a.kmax)?;
            let window = a.sigma.unwrap_or_else(|| default_window(a.kmax));
            let r = recover_orbit_lengths(&mu, window, a.lmax)?;
            Ok(ok(if table_json {
                to_json(&json!({ "window": window, "noise_floor": r.noise_floor, "resolution": r.resolution,
                    "samples": r.samples, "peaks": r.peaks }))
            } else {
                let mut s = String::from("kind,t,value\n");
                for (t, v) in &r.samples {
                    writeln!(s, "sample,{},{}", fmt_num(*t), fmt_num(*v)).unwrap();
                }
                for p in &r.peaks {
                    writeln!(s, "peak,{},{}", fmt_num(p.position), fmt_num(p.height)).unwrap();
                }
                s
            }))
        }
    }
}
