//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use indexmap::IndexMap;
use serde::Serialize;

use crate::catalog::ENTRIES;
use crate::dsl::{self, BoundCheck, Diagnostic};
use crate::engine::{verify, LabelNorm, ResidualReport};
use crate::expr::C64;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DIAGNOSTICS: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "parcheck", version, about = "Verify parallel-section field equations on sample sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run every check in a .grs file.
    Verify {
        file: PathBuf,
        /// Emit a JSON report instead of a table.
        #[arg(long)]
        json: bool,
        /// Tolerance for checks that do not set one.
        #[arg(long, value_parser = positive_f64)]
        tol: Option<f64>,
        /// Point count for random sample sets.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        points: Option<u64>,
        /// Seed for random sample sets.
        #[arg(long)]
        seed: Option<u64>,
        /// Stop after the first failing check.
        #[arg(long)]
        fail_fast: bool,
    },
    /// List catalog entries.
    Catalog,
    /// Evaluate a scalar expression at a point.
    Eval {
        expr: String,
        /// Coordinates, e.g. `x=1,y=2`.
        #[arg(long, default_value = "")]
        at: String,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

#[derive(Debug, Serialize)]
struct JsonSamples {
    requested: usize,
    excluded: usize,
    seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct JsonCheck {
    name: String,
    entry: String,
    samples: JsonSamples,
    norms: IndexMap<String, LabelNorm>,
    tol: f64,
    pass: bool,
    worst_point: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct JsonReport {
    version: u32,
    checks: Vec<JsonCheck>,
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: String,
    pub entry: String,
    pub tol: f64,
    pub result: Result<ResidualReport, String>,
}

impl CheckOutcome {
    pub fn pass(&self) -> bool {
        matches!(&self.result, Ok(r) if r.pass)
    }
}

/// Applies the command-line overrides and runs the checks in order.
pub fn run_checks(
    checks: &[BoundCheck],
    tol: Option<f64>,
    points: Option<usize>,
    seed: Option<u64>,
    fail_fast: bool,
) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for c in checks {
        let mut samples = c.samples.clone();
        if samples.seed().is_some() {
            if let Some(n) = points {
                samples = samples.with_count(n);
            }
            if let Some(s) = seed {
                samples = samples.with_seed(s);
            }
        }
        let tol = match (c.explicit_tol, tol) {
            (false, Some(t)) => t,
            _ => c.tol,
        };
        let result = verify(&c.condition, &samples, tol).map_err(|e| e.to_string());
        let o = CheckOutcome {
            name: c.name.clone(),
            entry: c.entry.clone(),
            tol,
            result,
        };
        let stop = fail_fast && !o.pass();
        out.push(o);
        if stop {
            break;
        }
    }
    out
}

/// The JSON report; stable for fixed inputs.
pub fn json_report(outcomes: &[CheckOutcome]) -> String {
    let checks = outcomes
        .iter()
        .map(|o| match &o.result {
            Ok(r) => JsonCheck {
                name: o.name.clone(),
                entry: o.entry.clone(),
                samples: JsonSamples {
                    requested: r.samples.requested,
                    excluded: r.samples.excluded,
                    seed: r.samples.seed,
                },
                norms: r.norms.clone(),
                tol: o.tol,
                pass: r.pass,
                worst_point: r.worst_point.clone(),
                error: None,
            },
            Err(e) => JsonCheck {
                name: o.name.clone(),
                entry: o.entry.clone(),
                samples: JsonSamples {
                    requested: 0,
                    excluded: 0,
                    seed: None,
                },
                norms: IndexMap::new(),
                tol: o.tol,
                pass: false,
                worst_point: Vec::new(),
                error: Some(e.clone()),
            },
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&JsonReport { version: 1, checks }).expect("serializable report");
    s.push('\n');
    s
}

/// One row per check.
pub fn table_report(outcomes: &[CheckOutcome]) -> String {
    let mut s = format!(
        "{:<28} {:<26} {:>11} {:>11} {:>11} {:>9}  {}\n",
        "check", "entry", "points", "L∞", "RMS", "tol", "result"
    );
    for o in outcomes {
        match &o.result {
            Ok(r) => {
                let rms = r.norms.values().map(|n| n.rms).fold(0.0, f64::max);
                let pts = format!("{}/{}", r.samples.evaluated, r.samples.requested);
                s.push_str(&format!(
                    "{:<28} {:<26} {:>11} {:>11.3e} {:>11.3e} {:>9.1e}  {}\n",
                    o.name,
                    o.entry,
                    pts,
                    r.linf(),
                    rms,
                    o.tol,
                    if r.pass { "PASS" } else { "FAIL" }
                ));
            }
            Err(e) => s.push_str(&format!(
                "{:<28} {:<26} {:>11} {:>11} {:>11} {:>9.1e}  FAIL ({e})\n",
                o.name, o.entry, "-", "-", "-", o.tol
            )),
        }
    }
    s
}

pub fn catalog_table() -> String {
    let mut s = String::new();
    for e in ENTRIES {
        s.push_str(&format!("{:<26} {:<70} {}\n", e.id, e.signature(), e.display));
    }
    s
}

fn write_diagnostics(err: &mut dyn Write, diags: &[Diagnostic]) {
    for d in diags {
        let _ = writeln!(err, "{d}");
    }
}

fn format_complex(v: C64) -> String {
    if v.im == 0.0 {
        format!("{}", v.re)
    } else if v.im < 0.0 {
        format!("{}-{}i", v.re, -v.im)
    } else {
        format!("{}+{}i", v.re, v.im)
    }
}

fn eval_command(expr: &str, at: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut names = Vec::new();
    let mut point = Vec::new();
    for part in at.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let parsed = part
            .split_once('=')
            .and_then(|(n, v)| v.trim().parse::<f64>().ok().map(|v| (n.trim().to_string(), v)));
        match parsed {
            Some((n, v)) => {
                names.push(n);
                point.push(v);
            }
            None => {
                let _ = writeln!(err, "error: --at expects name=value pairs, got `{part}`");
                return EXIT_DIAGNOSTICS;
            }
        }
    }
    let ast = match dsl::parse_expr(expr) {
        Ok(a) => a,
        Err(d) => {
            write_diagnostics(err, &d.into_iter().map(|d| d.with_excerpt(expr)).collect::<Vec<_>>());
            return EXIT_DIAGNOSTICS;
        }
    };
    let e = match dsl::scalar_expr(&ast, &names) {
        Ok(e) => e,
        Err(d) => {
            write_diagnostics(err, &[d.with_excerpt(expr)]);
            return EXIT_DIAGNOSTICS;
        }
    };
    match e.eval(&point) {
        Ok(v) => {
            let _ = writeln!(out, "{}", format_complex(v));
            EXIT_PASS
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAIL
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match &cli.command {
        Command::Catalog => {
            let _ = out.write_all(catalog_table().as_bytes());
            EXIT_PASS
        }
        Command::Eval { expr, at } => eval_command(expr, at, out, err),
        Command::Verify {
            file,
            json,
            tol,
            points,
            seed,
            fail_fast,
        } => {
            let src = match std::fs::read_to_string(file) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "error: cannot read {}: {e}", file.display());
                    return EXIT_IO;
                }
            };
            let checks = match dsl::compile(&src) {
                Ok(c) => c,
                Err(d) => {
                    write_diagnostics(err, &d);
                    return EXIT_DIAGNOSTICS;
                }
            };
            let outcomes = run_checks(&checks, *tol, points.map(|p| p as usize), *seed, *fail_fast);
            for o in &outcomes {
                if let Err(e) = &o.result {
                    let _ = writeln!(err, "error: check `{}`: {e}", o.name);
                }
            }
            let text = if *json { json_report(&outcomes) } else { table_report(&outcomes) };
            if out.write_all(text.as_bytes()).is_err() {
                return EXIT_IO;
            }
            if outcomes.iter().all(CheckOutcome::pass) {
                EXIT_PASS
            } else {
                EXIT_FAIL
            }
        }
    }
}
