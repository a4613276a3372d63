//! One line per acceptance criterion; the test fails if any criterion does.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use parcheck::catalog::{self, Params, Value};
use parcheck::cli::{run, Cli};
use parcheck::diffops::forms::{curvature, d, form_from};
use parcheck::diffops::geodesic::{geodesic_integrate, norm_squared};
use parcheck::diffops::quantum::{DiracSign, GammaSystem};
use parcheck::diffops::riemann::{metricity_at, ricci_at};
use parcheck::dsl::{self, BoundCheck};
use parcheck::engine::{verify, ResidualReport};
use parcheck::exterior::{hodge, inner, volume};
use parcheck::{
    AlternatingTensor, Chart, Expr, LieStructure, Metric, MetricAt, MultiIndex, SampleSet, ValueSpace, ValuedForm,
    Variance, C64,
};

type Outcome = Result<String, String>;

fn spec_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn load(file: &str) -> Vec<BoundCheck> {
    let src = std::fs::read_to_string(spec_dir().join(file)).expect("shipped spec");
    dsl::compile(&src).unwrap_or_else(|d| panic!("{file}: {d:?}"))
}

fn named<'a>(checks: &'a [BoundCheck], name: &str) -> &'a BoundCheck {
    checks.iter().find(|c| c.name == name).unwrap_or_else(|| panic!("no check `{name}`"))
}

fn run_check(c: &BoundCheck, tol: f64) -> ResidualReport {
    verify(&c.condition, &c.samples, tol).expect("verification runs")
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn x(i: usize) -> Expr {
    Expr::coord(i)
}

fn minkowski() -> Chart {
    Chart::minkowski4()
}

fn soliton() -> Outcome {
    let t = Instant::now();
    let checks = load("soliton.grs");
    let c = &checks[0];
    ensure(
        c.samples == SampleSet::random(vec![(-2.0, 2.0); 4], 1000, 7).unwrap(),
        "sample set differs from 1000 seeded points in [-2,2]^4".into(),
    )?;
    let r = run_check(c, 1e-9);
    let secs = t.elapsed().as_secs_f64();
    ensure(r.pass && r.samples.evaluated == 1000, format!("L∞ = {:e}", r.linf()))?;
    ensure(secs < 5.0, format!("took {secs:.2} s"))?;
    Ok(format!("L∞ = {:.1e} on 1000 points, {secs:.2} s", r.linf()))
}

fn null_autoparallel() -> Outcome {
    let checks = load("null_autoparallel.grs");
    let r = run_check(named(&checks, "null_soliton_pass"), 1e-9);
    let norm = r.norms["null_norm"].linf;
    ensure(r.pass, format!("L∞ = {:e}", r.linf()))?;
    ensure(norm <= 1e-12, format!("u·u L∞ = {norm:e}"))?;
    Ok(format!("L∞ = {:.1e}, max |u·u| = {norm:.1e}", r.linf()))
}

fn plane_wave() -> ValuedForm<Expr> {
    let a = form_from(4, 1, vec![(&[0], (x(2) - x(3)).sin())]).unwrap();
    ValuedForm::scalar_valued(d(&a).unwrap())
}

fn form_param(name: &str, f: ValuedForm<Expr>) -> Value {
    Value::Form {
        name: name.into(),
        form: f,
    }
}

fn maxwell() -> Outcome {
    let chart = minkowski();
    let p = Params::new().with("F", form_param("F", plane_wave()));
    let s = SampleSet::random(vec![(-2.0, 2.0); 4], 500, 12).unwrap();
    let mv = verify(&catalog::build("maxwell_vacuum", &chart, &p).unwrap(), &s, 1e-10).unwrap();
    let ev = verify(&catalog::build("ext_maxwell_vacuum", &chart, &p).unwrap(), &s, 1e-9).unwrap();
    ensure(mv.pass, format!("maxwell_vacuum L∞ = {:e}", mv.linf()))?;
    ensure(ev.pass, format!("ext_maxwell_vacuum L∞ = {:e}", ev.linf()))?;
    let labels: Vec<&str> = ev.norms.keys().map(String::as_str).collect();
    ensure(labels == ["e1∨e1", "e1∨e2", "e2∨e2"], format!("labels {labels:?}"))?;
    Ok(format!(
        "vacuum L∞ = {:.1e}, extended L∞ = {:.1e} over labels {}",
        mv.linf(),
        ev.linf(),
        labels.join(", ")
    ))
}

fn schwarzschild() -> Chart {
    let r = x(0);
    let f = 1.0 - 2.0 / r.clone();
    let th = x(1);
    let z = Expr::zero;
    let rows = vec![
        vec![-(1.0 / f.clone()), z(), z(), z()],
        vec![z(), -(r.clone() * r.clone()), z(), z()],
        vec![z(), z(), -(r.clone() * r * th.sin().powi(2)), z()],
        vec![z(), z(), z(), f],
    ];
    Chart::new(["r", "th", "ph", "t"], Metric::from_rows(rows).unwrap()).unwrap()
}

fn sphere() -> Chart {
    let rows = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), x(0).sin().powi(2)]];
    Chart::new(["th", "ph"], Metric::from_rows(rows).unwrap()).unwrap()
}

fn ricci() -> Outcome {
    let t = Instant::now();
    let chart = schwarzschild();
    let s = SampleSet::random(vec![(3.0, 10.0), (0.3, 2.8), (0.0, std::f64::consts::TAU), (-5.0, 5.0)], 500, 20).unwrap();
    let c = catalog::build("ricci_flat", &chart, &Params::new()).unwrap();
    let r = verify(&c, &s, 1e-8).unwrap();
    ensure(r.pass && r.samples.evaluated == 500, format!("Schwarzschild L∞ = {:e}", r.linf()))?;

    let flat = catalog::build("ricci_flat", &minkowski(), &Params::new()).unwrap();
    let f = verify(&flat, &SampleSet::random(vec![(-2.0, 2.0); 4], 100, 1).unwrap(), 1e-8).unwrap();
    ensure(f.linf() == 0.0, format!("flat control L∞ = {:e}", f.linf()))?;

    // Unit sphere: R_ij = g_ij, compared component by component.
    let sph = sphere();
    let mut worst: f64 = 0.0;
    for p in SampleSet::random(vec![(0.3, 2.8), (0.0, std::f64::consts::TAU)], 200, 21).unwrap().points() {
        let ric = ricci_at(sph.metric(), &p).unwrap();
        let g = sph.metric().at(&p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((ric[i * 2 + j] - g.g(i, j)).abs());
            }
        }
    }
    ensure(worst <= 1e-8, format!("sphere |R - g| = {worst:e}"))?;
    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 30.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "Schwarzschild L∞ = {:.1e}, flat = 0, sphere |R - g| = {worst:.1e}, {secs:.2} s",
        r.linf()
    ))
}

fn mul(a: &[[C64; 4]; 4], b: &[[C64; 4]; 4]) -> [[C64; 4]; 4] {
    let mut o = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                o[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    o
}

fn dirac() -> Outcome {
    let gs = GammaSystem::dirac(1.0, DiracSign::Minus).map_err(|e| e.to_string())?;
    let eta = [-1.0, -1.0, -1.0, 1.0];
    for mu in 0..4 {
        for nu in 0..4 {
            let (a, b) = (mul(gs.lower(mu), gs.lower(nu)), mul(gs.lower(nu), gs.lower(mu)));
            for i in 0..4 {
                for j in 0..4 {
                    let want = if i == j && mu == nu { 2.0 * eta[mu] } else { 0.0 };
                    ensure(a[i][j] + b[i][j] == C64::new(want, 0.0), format!("Clifford ({mu},{nu})"))?;
                }
            }
        }
    }
    let mut tr = [[C64::new(0.0, 0.0); 4]; 4];
    for (mu, e) in eta.iter().enumerate() {
        let p = mul(gs.lower(mu), gs.inverse(mu));
        for i in 0..4 {
            for j in 0..4 {
                tr[i][j] += p[i][j] * *e;
            }
        }
    }
    for (i, row) in tr.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            ensure(*v == C64::new(if i == j { -2.0 } else { 0.0 }, 0.0), "η^{μν}γ_μγ_ν⁻¹ ≠ -2I".into())?;
        }
    }

    // ψ = (e^{-imt}, 0, 0, 0) with m = 1; a mass m' leaves |m' - m|·|ψ| = |m' - 1|.
    let psi = |m: f64| {
        let up = (Expr::constant(C64::new(0.0, -1.0)) * x(3)).exp();
        Params::new()
            .with(
                "psi",
                Value::List(vec![Value::Field(up), Value::Number(0.0), Value::Number(0.0), Value::Number(0.0)]),
            )
            .with("mass", Value::Number(m))
    };
    let s = SampleSet::random(vec![(-2.0, 2.0); 4], 200, 22).unwrap();
    let rest = verify(&catalog::build("dirac", &minkowski(), &psi(1.0)).unwrap(), &s, 1e-12).unwrap();
    ensure(rest.pass, format!("rest frame L∞ = {:e}", rest.linf()))?;
    let wrong = verify(&catalog::build("dirac", &minkowski(), &psi(2.0)).unwrap(), &s, 1e-12).unwrap();
    let expected = (2.0f64 - 1.0).abs();
    ensure(
        !wrong.pass && (wrong.linf() - expected).abs() <= 1e-12,
        format!("mass mismatch L∞ = {}", wrong.linf()),
    )?;
    Ok(format!(
        "rest frame L∞ = {:.1e}, mismatch L∞ = {}, gamma relations exact",
        rest.linf(),
        wrong.linf()
    ))
}

fn schrodinger() -> Outcome {
    let chart = Chart::new(["x", "t"], Metric::euclidean(2)).unwrap();
    let i = Expr::imag_unit();
    let wave = |k: f64, w: f64| (i.clone() * (k * x(0) - w * x(1))).exp();
    let s = SampleSet::grid(vec![(-3.0, 3.0); 2], 21).unwrap();
    let check = |psi: Expr, v: Expr| {
        let p = Params::new().with("psi", Value::Field(psi)).with("potential", Value::Field(v));
        verify(&catalog::build("schrodinger", &chart, &p).unwrap(), &s, 1e-12).unwrap()
    };
    let plane = check(wave(2.0, 2.0), Expr::zero());
    ensure(plane.pass, format!("plane wave L∞ = {:e}", plane.linf()))?;
    let ground = (-(x(0) * x(0)) / 2.0).exp() * (-(i.clone() * x(1)) / 2.0).exp();
    let osc = check(ground, x(0) * x(0) / 2.0);
    ensure(osc.pass, format!("oscillator L∞ = {:e}", osc.linf()))?;
    let (k, w) = (2.0f64, 3.0f64);
    let expected = (w - k * k / 2.0).abs();
    let ctrl = check(wave(k, w), Expr::zero());
    ensure(
        (ctrl.linf() - expected).abs() <= 1e-12,
        format!("dispersion control L∞ = {}", ctrl.linf()),
    )?;
    Ok(format!(
        "plane wave {:.1e}, oscillator {:.1e}, control L∞ = {}",
        plane.linf(),
        osc.linf(),
        ctrl.linf()
    ))
}

fn frobenius() -> Outcome {
    let vec_checks = load("frobenius_vector.grs");
    let pf_checks = load("frobenius_pfaff.grs");
    let heis = run_check(named(&vec_checks, "heisenberg_fail"), 1e-12);
    ensure(heis.linf() == 1.0, format!("heisenberg L∞ = {}", heis.linf()))?;
    let integ = run_check(named(&vec_checks, "integrable_pass"), 1e-12);
    ensure(integ.pass, format!("integrable L∞ = {:e}", integ.linf()))?;
    let pf_heis = run_check(named(&pf_checks, "heisenberg_fail"), 1e-12);
    let pf_integ = run_check(named(&pf_checks, "integrable_pass"), 1e-12);
    ensure(
        pf_heis.pass == heis.pass && pf_integ.pass == integ.pass,
        "Pfaff verdicts disagree with the vector-field verdicts".into(),
    )?;
    let standalone = run_check(&load("frobenius_nonintegrable.grs")[0], 1e-12);
    ensure(standalone.linf() == 1.0, format!("standalone L∞ = {}", standalone.linf()))?;
    Ok(format!(
        "heisenberg L∞ = {}, integrable L∞ = {:.1e}, Pfaff agrees (L∞ = {})",
        heis.linf(),
        integ.linf(),
        pf_heis.linf()
    ))
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize) -> Expr {
    let mut e = Expr::real(rng.gen_range(-1.0..1.0));
    for _ in 0..3 {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        e = e + rng.gen_range(-1.0..1.0) * (x(a) * x(b));
        e = e + rng.gen_range(-1.0..1.0) * (rng.gen_range(0.5..2.0) * x(a)).sin();
    }
    e
}

fn random_form(rng: &mut ChaCha8Rng, n: usize, p: usize) -> AlternatingTensor<Expr> {
    let mut t = AlternatingTensor::zero(n, p, Variance::Covariant);
    for idx in MultiIndex::all(n, p) {
        t.set(idx, random_poly(rng, n));
    }
    t
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let pts = SampleSet::random(vec![(-1.5, 1.5); 4], 50, 3).unwrap().points();

    // d∘d = 0
    let mut dd: f64 = 0.0;
    for p in 0..3 {
        for _ in 0..4 {
            let w = random_form(&mut rng, 4, p);
            let ddw = d(&d(&w).unwrap()).unwrap();
            for pt in &pts {
                for (_, c) in ddw.components() {
                    dd = dd.max(c.eval(pt).unwrap().norm());
                }
            }
        }
    }
    ensure(dd <= 1e-12, format!("|d d w| = {dd:e}"))?;

    // ∗∗ = -id on 2-forms and α ∧ ∗β = <α,β> vol on Minkowski.
    let g = MetricAt::diagonal(&[-1.0, -1.0, -1.0, 1.0]).unwrap();
    for idx in MultiIndex::all(4, 2) {
        let mut e = AlternatingTensor::<C64>::zero(4, 2, Variance::Covariant);
        e.set(idx, C64::new(1.0, 0.0));
        let ss = hodge(&hodge(&e, &g).unwrap(), &g).unwrap();
        ensure(ss.dense() == e.neg().dense(), format!("** ≠ -id on {idx:?}"))?;
    }
    let vol = volume::<C64>(&g);
    for p in 0..=4 {
        for a in MultiIndex::all(4, p) {
            for b in MultiIndex::all(4, p) {
                let mut ea = AlternatingTensor::<C64>::zero(4, p, Variance::Covariant);
                ea.set(a, C64::new(1.0, 0.0));
                let mut eb = ea.clone();
                eb.set(a, C64::new(0.0, 0.0));
                eb.set(b, C64::new(1.0, 0.0));
                let lhs = ea.wedge(&hodge(&eb, &g).unwrap()).unwrap();
                let rhs = vol.scale(inner(&ea, &eb, &g).unwrap());
                ensure(lhs.dense() == rhs.dense(), format!("Hodge relation fails for {a:?}, {b:?}"))?;
            }
        }
    }

    // Bianchi identity for a random su(2) connection.
    let su2 = ValueSpace::lie_algebra(LieStructure::su2());
    let parts = (0..3).map(|_| random_form(&mut rng, 4, 1)).collect();
    let w = ValuedForm::from_parts(su2, parts).unwrap();
    let p = Params::new().with("connection", form_param("w", w.clone()));
    let b = verify(
        &catalog::build("bianchi", &minkowski(), &p).unwrap(),
        &SampleSet::random(vec![(-1.0, 1.0); 4], 200, 16).unwrap(),
        1e-10,
    )
    .unwrap();
    ensure(b.pass, format!("Bianchi L∞ = {:e}", b.linf()))?;
    ensure(!curvature(&w).unwrap().is_zero(), "curvature vanished".into())?;

    // Levi-Civita metricity on Schwarzschild.
    let sch = schwarzschild();
    let mut met: f64 = 0.0;
    for pt in SampleSet::random(vec![(3.0, 10.0), (0.3, 2.8), (0.0, std::f64::consts::TAU), (-5.0, 5.0)], 100, 5).unwrap().points() {
        met = met.max(metricity_at(sch.metric(), &pt).unwrap());
    }
    ensure(met <= 1e-9, format!("metricity {met:e}"))?;

    // Fourth-order finite differences against the symbolic derivative.
    let f = (-(x(0) * x(0))).exp() * (2.0 * x(1)).sin() + (x(0) * x(1)).cos();
    let mut worst_ratio: (f64, f64) = (f64::INFINITY, 0.0);
    for (axis, pt) in [(0usize, [0.3, 0.7]), (1, [0.3, 0.7]), (0, [-0.8, 0.2]), (1, [1.1, -0.4])] {
        let exact = f.diff(axis).eval(&pt).unwrap();
        let e1 = (f.fd_diff(axis, &pt, 0.1).unwrap() - exact).norm();
        let e2 = (f.fd_diff(axis, &pt, 0.05).unwrap() - exact).norm();
        let ratio = e1 / e2;
        worst_ratio = (worst_ratio.0.min(ratio), worst_ratio.1.max(ratio));
    }
    ensure(
        (12.0..=20.0).contains(&worst_ratio.0) && (12.0..=20.0).contains(&worst_ratio.1),
        format!("FD error ratios in [{:.2}, {:.2}]", worst_ratio.0, worst_ratio.1),
    )?;
    Ok(format!(
        "dd = {dd:.1e}, ** and Hodge exact, Bianchi {:.1e}, metricity {met:.1e}, FD ratio [{:.2}, {:.2}]",
        b.linf(),
        worst_ratio.0,
        worst_ratio.1
    ))
}

fn geodesics() -> Outcome {
    let sph = sphere();
    let x0 = [std::f64::consts::FRAC_PI_2, 0.0];
    let traj = geodesic_integrate(sph.metric(), &x0, &[0.0, 1.0], 10_000, 1e-3).unwrap();
    let n0 = norm_squared(sph.metric(), &x0, &[0.0, 1.0]).unwrap();
    let mut drift: f64 = 0.0;
    for (xs, us) in &traj.states {
        drift = drift.max((norm_squared(sph.metric(), xs, us).unwrap() - n0).abs());
    }
    ensure(drift < 1e-10, format!("sphere drift {drift:e}"))?;

    let m = Metric::minkowski(4);
    let (y0, u0) = ([0.5, -1.0, 2.0, 0.0], [0.3, -0.2, 0.1, 1.0]);
    let line = geodesic_integrate(&m, &y0, &u0, 1000, 1e-2).unwrap();
    let mut dev: f64 = 0.0;
    for (k, (xs, us)) in line.states.iter().enumerate() {
        ensure(us.as_slice() == u0, format!("velocity changed at step {k}"))?;
        let s = k as f64 * 1e-2;
        for i in 0..4 {
            dev = dev.max((xs[i] - (y0[i] + s * u0[i])).abs());
        }
    }
    ensure(dev <= 1e-12, format!("Minkowski deviation {dev:e}"))?;
    Ok(format!("sphere g(u,u) drift {drift:.1e}, Minkowski velocity exact, position error {dev:.1e}"))
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let cli = Cli::try_parse_from(std::iter::once("parcheck").chain(args.iter().copied())).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn end_to_end() -> Outcome {
    let t = Instant::now();
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("PARCHECK_BLESS").is_some();
    let mut n_checks = 0;
    for (id, _) in catalog::SPECS {
        let path = spec_dir().join(format!("{id}.grs"));
        let path = path.to_str().unwrap();
        let (code, json, err) = cli(&["verify", path, "--json"]);
        ensure(code == 1, format!("{id}: exit {code}, stderr {err}"))?;
        let v: serde_json::Value = serde_json::from_str(&json).map_err(|e| format!("{id}: {e}"))?;
        for f in catalog::fixtures(id).unwrap() {
            let c = v["checks"]
                .as_array()
                .unwrap()
                .iter()
                .find(|c| c["name"] == f.check)
                .ok_or_else(|| format!("{id}: no fixture `{}`", f.check))?;
            ensure(c["pass"] == f.expect_pass, format!("{id}/{}: pass = {}", f.check, c["pass"]))?;
            n_checks += 1;
        }
        let (_, again, _) = cli(&["verify", path, "--json"]);
        ensure(again == json, format!("{id}: JSON differs between runs"))?;
        let gpath = golden.join(format!("{id}.json"));
        if bless {
            std::fs::write(&gpath, &json).unwrap();
        }
        let want = std::fs::read_to_string(&gpath).map_err(|e| format!("{}: {e}", gpath.display()))?;
        ensure(want == json, format!("{id}: output differs from {}", gpath.display()))?;
    }

    let sol = spec_dir().join("soliton.grs");
    let (code, table, _) = cli(&["verify", sol.to_str().unwrap()]);
    ensure(code == 0 && table.matches("PASS").count() == 1, format!("soliton: exit {code}"))?;
    let fno = spec_dir().join("frobenius_nonintegrable.grs");
    let (code, json, _) = cli(&["verify", fno.to_str().unwrap(), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let linf = v["checks"][0]["norms"]["π[X1,X2]"]["linf"].as_f64();
    ensure(code == 1 && linf == Some(1.0), format!("frobenius_nonintegrable: exit {code}, linf {linf:?}"))?;

    let bad = std::env::temp_dir().join(format!("parcheck-malformed-{}.grs", std::process::id()));
    std::fs::write(&bad, "field f = 2 +\n").unwrap();
    let (code, _, err) = cli(&["verify", bad.to_str().unwrap()]);
    let _ = std::fs::remove_file(&bad);
    ensure(code == 2 && err.contains("line 1, col 12"), format!("malformed: exit {code}, {err}"))?;
    let (code, _, _) = cli(&["verify", "/nonexistent/spec.grs"]);
    ensure(code == 3, format!("missing file: exit {code}"))?;

    let secs = t.elapsed().as_secs_f64();
    ensure(secs < 120.0, format!("took {secs:.1} s"))?;
    Ok(format!(
        "{} spec files, {n_checks} fixtures, golden JSON stable, exit codes 0/1/2/3, {secs:.1} s",
        catalog::SPECS.len()
    ))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("soliton_autoparallel", soliton),
        ("null_autoparallel", null_autoparallel),
        ("maxwell_extended_maxwell", maxwell),
        ("ricci_flatness", ricci),
        ("dirac", dirac),
        ("schrodinger", schrodinger),
        ("frobenius", frobenius),
        ("operator_identities", properties),
        ("geodesics", geodesics),
        ("end_to_end", end_to_end),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout().lock();
    for (name, f) in criteria {
        let line = match f() {
            Ok(detail) => format!("PASS  {name:<26} {detail}"),
            Err(why) => {
                failed.push(name);
                format!("FAIL  {name:<26} {why}")
            }
        };
        let _ = writeln!(out, "{line}");
    }
    drop(out);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
