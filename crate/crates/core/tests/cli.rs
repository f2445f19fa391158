mod common;

use std::path::PathBuf;
use std::process::{Command, Output};

use common::fixture_path;
use serde_json::Value;

fn qgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgraph")).args(args).output().unwrap()
}

fn fx(name: &str) -> String {
    fixture_path(name).to_string_lossy().into_owned()
}

fn schema(name: &str) -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(format!("{name}.schema.json"));
    let s: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&s).unwrap()
}

fn assert_valid(name: &str, text: &str) {
    let v: Value = serde_json::from_str(text).unwrap();
    let errors: Vec<String> = schema(name).iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// (schema, arguments) for a json run of every command.
fn json_runs() -> Vec<(&'static str, Vec<String>)> {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    vec![
        ("spectrum", s(&["spectrum", "--graph", &fx("triangle"), "--kmax", "20", "--out", "json"])),
        ("spectrum", s(&["spectrum", "--graph", &fx("star3"), "--kmax", "3", "--scan", "--out", "json"])),
        ("weyl", s(&["weyl", "--graph", &fx("circle3"), "--kmax", "400", "--samples", "64", "--out", "json"])),
        ("orbits", s(&["orbits", "--graph", &fx("star3"), "--lmax", "5", "--out", "json"])),
        (
            "trace-check",
            s(&["trace-check", "--graph", &fx("circle3"), "--sigma", "0.2", "--kmax", "40", "--lmax", "8", "--tol", "1e-6"]),
        ),
        ("poisson", s(&["poisson", "--sigma", "0.2", "--kmax", "40", "--lmax", "8"])),
        ("equilateral", s(&["equilateral", "--graph", &fx("k4"), "--kmax", "20"])),
        ("discrete-spectrum", s(&["discrete-spectrum", "--graph", &fx("petersen"), "--out", "json"])),
        (
            "discrete-spectrum",
            s(&["discrete-spectrum", "--graph", &fx("triangle"), "--mode", "metric-weighted", "--out", "json"]),
        ),
        ("classify", s(&["classify", "--graph", &fx("z_ray2")])),
        ("classify", s(&["classify", "--graph", &fx("ray_geometric")])),
        ("classify", s(&["classify", "--graph", &fx("tree3")])),
        (
            "recover-lengths",
            s(&["recover-lengths", "--graph", &fx("circle3"), "--kmax", "60", "--lmax", "3", "--out", "json"]),
        ),
    ]
}

#[test]
fn json_outputs_match_schemas_and_are_deterministic() {
    for (name, args) in json_runs() {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = qgraph(&args);
        assert_eq!(first.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&first.stderr));
        let second = qgraph(&args);
        assert_eq!(first.stdout, second.stdout, "{args:?} not deterministic");
        assert_valid(name, &stdout(&first));
    }
}

#[test]
fn csv_outputs_have_headers() {
    let runs: Vec<(Vec<String>, &str)> = vec![
        (vec!["spectrum".into(), "--graph".into(), fx("interval"), "--kmax".into(), "10".into()], "lambda,sqrt_lambda,multiplicity"),
        (vec!["spectrum".into(), "--graph".into(), fx("interval"), "--kmax".into(), "2".into(), "--scan".into()], "k,sigma_rel"),
        (vec!["weyl".into(), "--graph".into(), fx("interval"), "--kmax".into(), "30".into()], "lambda,N,vol_over_pi_lambda"),
        (
            vec!["orbits".into(), "--graph".into(), fx("triangle"), "--lmax".into(), "4".into(), "--nonzero-only".into()],
            "canonical_id,length,primitive_length,repetition,scattering",
        ),
        (vec!["discrete-spectrum".into(), "--graph".into(), fx("k4")], "value,multiplicity"),
        (
            vec!["recover-lengths".into(), "--graph".into(), fx("interval"), "--kmax".into(), "60".into(), "--lmax".into(), "5".into()],
            "kind,t,value",
        ),
    ];
    for (args, header) in runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = qgraph(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(stdout(&a).lines().next(), Some(header));
        assert_eq!(a.stdout, qgraph(&args).stdout);
    }
}

#[test]
fn golden_triangle_spectrum() {
    let out = qgraph(&["spectrum", "--graph", &fx("triangle"), "--kmax", "10"]);
    let want = "lambda,sqrt_lambda,multiplicity\n\
                0,0,1\n\
                4.38649084493,2.09439510239,2\n\
                17.5459633797,4.18879020479,2\n\
                39.4784176044,6.28318530718,2\n\
                70.1838535189,8.37758040957,2\n";
    assert_eq!(stdout(&out), want);
}

#[test]
fn orbit_listing() {
    let out = stdout(&qgraph(&["orbits", "--graph", &fx("interval"), "--lmax", "4.5"]));
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows, ["canonical_id,length,primitive_length,repetition,scattering", "e+ e-,2,2,1,1", "e+ e- e+ e-,4,2,2,1"]);
}

#[test]
fn exit_codes() {
    let pass = qgraph(&["trace-check", "--graph", &fx("circle3"), "--sigma", "0.2", "--kmax", "60", "--lmax", "8"]);
    assert_eq!(pass.status.code(), Some(0));
    // rounding noise alone exceeds a tolerance of 1e-17
    let fail = qgraph(&["trace-check", "--graph", &fx("circle3"), "--sigma", "0.2", "--kmax", "60", "--lmax", "8", "--tol", "1e-17"]);
    assert_eq!(fail.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&fail)).unwrap();
    assert_eq!(v["pass"], Value::Bool(false));

    let tails = qgraph(&["trace-check", "--graph", &fx("circle3"), "--sigma", "0.02", "--kmax", "20", "--lmax", "8"]);
    assert_eq!(tails.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&tails.stderr).contains("increase kmax"));

    assert_eq!(qgraph(&["spectrum", "--graph", &fx("triangle"), "--kmax", "3", "--bogus"]).status.code(), Some(2));
    assert_eq!(qgraph(&["spectrum", "--graph", &fx("triangle"), "--kmax", "-3"]).status.code(), Some(2));
    assert_eq!(qgraph(&["spectrum", "--graph", "/nonexistent.json", "--kmax", "3"]).status.code(), Some(2));
    assert_eq!(qgraph(&["classify", "--graph", &fx("tree3"), "--out", "csv"]).status.code(), Some(2));
    let tri = qgraph(&["equilateral", "--graph", &fx("star_irrational"), "--kmax", "5"]);
    assert_eq!(tri.status.code(), Some(2));
}

#[test]
fn malformed_input_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad_type = dir.path().join("bad_type.json");
    std::fs::write(&bad_type, r#"{"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":"one"}]}"#).unwrap();
    let out = qgraph(&["spectrum", "--graph", bad_type.to_str().unwrap(), "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("edges[0].length"));

    let unknown = dir.path().join("unknown.json");
    std::fs::write(&unknown, r#"{"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"lenght":1.0}]}"#).unwrap();
    let out = qgraph(&["spectrum", "--graph", unknown.to_str().unwrap(), "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lenght"));

    let looped = dir.path().join("loop.json");
    std::fs::write(&looped, r#"{"vertices":["a"],"edges":[{"id":"e","ends":["a","a"],"length":1.0}]}"#).unwrap();
    let out = qgraph(&["spectrum", "--graph", looped.to_str().unwrap(), "--kmax", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("loop"));
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = qgraph(&["classify", "--graph", &fx("ray_harmonic"), "--output", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_valid("classify", &text);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["self_adjoint"]["criterion"], "iii");
}

#[test]
fn fixtures_match_input_schemas() {
    for name in ["circle3", "interval", "star3", "star_irrational", "triangle", "k4", "petersen"] {
        assert_valid("graph", &std::fs::read_to_string(fixture_path(name)).unwrap());
    }
    for name in ["z_ray2", "ray_geometric", "ray_harmonic", "tree3"] {
        assert_valid("ended-graph", &std::fs::read_to_string(fixture_path(name)).unwrap());
    }
}
