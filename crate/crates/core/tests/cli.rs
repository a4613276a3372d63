use clap::Parser;

use parcheck::catalog::{CATALOG_SIZE, SPECS};
use parcheck::cli::{run, Cli, EXIT_DIAGNOSTICS, EXIT_FAIL, EXIT_IO, EXIT_PASS};

fn cli(args: &[&str]) -> (i32, String, String) {
    let cli = Cli::try_parse_from(std::iter::once("parcheck").chain(args.iter().copied())).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_temp(name: &str, src: &str) -> std::path::PathBuf {
    let p = std::env::temp_dir().join(format!("parcheck-cli-{}-{name}.grs", std::process::id()));
    std::fs::write(&p, src).unwrap();
    p
}

fn spec(id: &str) -> String {
    format!("{}/specs/{id}.grs", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn catalog_lists_every_entry() {
    let (code, out, _) = cli(&["catalog"]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(out.lines().count(), CATALOG_SIZE);
    assert!(out.lines().any(|l| l.starts_with("ext_maxwell_vacuum ")));
    assert!(out.lines().any(|l| l.starts_with("ricci_flat ") && l.contains("metric")));
    assert_eq!(SPECS.len(), CATALOG_SIZE);
}

#[test]
fn table_output_marks_each_check() {
    let (code, out, _) = cli(&["verify", &spec("maxwell_vacuum")]);
    assert_eq!(code, EXIT_FAIL);
    assert!(out.starts_with("check "));
    assert!(out.lines().any(|l| l.starts_with("plane_wave_pass") && l.ends_with("PASS")));
    assert!(out.lines().any(|l| l.starts_with("monopole_fail") && l.ends_with("FAIL")));
}

#[test]
fn all_passing_file_exits_zero() {
    let (code, _, err) = cli(&["verify", &spec("soliton")]);
    assert_eq!(code, EXIT_PASS, "{err}");
}

#[test]
fn fail_fast_stops_at_first_failure() {
    let p = write_temp(
        "failfast",
        "chart R4 (x, y, z, q) metric diag(1, 1, 1, 1)\n\
         form twisted : 2 = dx^wdy + (2 + y)*dz^wdq\n\
         form darboux : 2 = dx^wdy + dz^wdq\n\
         check symplectic_closed(twisted) on grid(-1..1, -1..1, -1..1, -1..1; 2) as first\n\
         check symplectic_closed(darboux) on grid(-1..1, -1..1, -1..1, -1..1; 2) as second\n",
    );
    let path = p.to_str().unwrap();
    let (code, json, err) = cli(&["verify", path, "--json", "--fail-fast"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap_or_else(|_| panic!("{err}"));
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(v["checks"].as_array().unwrap().len(), 1);
    let (_, json, _) = cli(&["verify", path, "--json"]);
    let _ = std::fs::remove_file(&p);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
    assert_eq!(v["checks"][1]["pass"], true);
}

#[test]
fn overrides_apply_to_random_sets_and_default_tolerances() {
    let (_, json, _) = cli(&["verify", &spec("soliton"), "--json", "--points", "17", "--seed", "5"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["checks"][0]["samples"]["requested"], 17);
    assert_eq!(v["checks"][0]["samples"]["seed"], 5);

    let p = write_temp(
        "tol",
        "chart L (x, t) metric diag(1, 1)\n\
         field psi = exp(i*(2*x - 3*t))\n\
         check schrodinger(psi) on grid(-1..1, -1..1; 3) as loose\n\
         check schrodinger(psi) on grid(-1..1, -1..1; 3) tol 1e-12 as strict\n",
    );
    let (code, json, _) = cli(&["verify", p.to_str().unwrap(), "--json", "--tol", "10", "--points", "3"]);
    let _ = std::fs::remove_file(&p);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(code, EXIT_FAIL);
    assert_eq!(v["checks"][0]["tol"], 10.0);
    assert_eq!(v["checks"][0]["pass"], true);
    assert_eq!(v["checks"][0]["samples"]["requested"], 9);
    assert_eq!(v["checks"][1]["tol"], 1e-12);
    assert_eq!(v["checks"][1]["pass"], false);
}

#[test]
fn diagnostics_carry_positions() {
    let p = write_temp("diag", "chart M (x, y) metric diag(1, 1)\nfield f = x + q\n");
    let (code, out, err) = cli(&["verify", p.to_str().unwrap()]);
    let _ = std::fs::remove_file(&p);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(out.is_empty());
    assert!(err.contains("line 2, col 14"), "{err}");
    assert!(err.contains("field f = x + q"));
}

#[test]
fn unreadable_file_is_an_io_error() {
    let (code, _, err) = cli(&["verify", "/definitely/not/here.grs"]);
    assert_eq!(code, EXIT_IO);
    assert!(err.contains("cannot read"));
}

#[test]
fn eval_prints_values() {
    let (code, out, _) = cli(&["eval", "x^2 + 3*y", "--at", "x=2,y=1"]);
    assert_eq!((code, out.trim()), (EXIT_PASS, "7"));
    let (code, out, _) = cli(&["eval", "exp(i*pi)"]);
    assert_eq!(code, EXIT_PASS);
    assert!(out.starts_with("-1"));
    let (code, _, err) = cli(&["eval", "2 +"]);
    assert_eq!(code, EXIT_DIAGNOSTICS);
    assert!(err.contains("col 2"), "{err}");
}

#[test]
fn rejects_bad_flags() {
    let parse = |a: &[&str]| Cli::try_parse_from(std::iter::once("parcheck").chain(a.iter().copied()));
    assert!(parse(&["verify", "f.grs", "--tol", "-1"]).is_err());
    assert!(parse(&["verify", "f.grs", "--points", "0"]).is_err());
    assert!(parse(&["verify", "f.grs", "--tol", "1e-6", "--points", "10"]).is_ok());
}
