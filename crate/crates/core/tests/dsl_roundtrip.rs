use parcheck::catalog::{self, SPECS};
use parcheck::dsl::{self, compile, parse, parse_expr, print, print_expr};
use parcheck::engine::verify;

#[test]
fn printed_specs_reparse_to_the_same_text() {
    for (id, src) in SPECS {
        let doc = parse(src).unwrap_or_else(|d| panic!("{id}: {d:?}"));
        let once = print(&doc);
        let twice = print(&parse(&once).unwrap_or_else(|d| panic!("{id} reprinted: {d:?}\n{once}")));
        assert_eq!(once, twice, "{id}");
        assert_eq!(doc.statements.len(), parse(&once).unwrap().statements.len(), "{id}");
    }
}

#[test]
fn printed_specs_verify_identically() {
    for (id, src) in SPECS {
        let a = compile(src).unwrap();
        let b = compile(&print(&parse(src).unwrap())).unwrap_or_else(|d| panic!("{id}: {d:?}"));
        assert_eq!(a.len(), b.len(), "{id}");
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((&x.name, &x.entry, x.tol, &x.samples), (&y.name, &y.entry, y.tol, &y.samples), "{id}");
            let samples = x.samples.with_count(x.samples.len().min(20));
            let rx = verify(&x.condition, &samples, x.tol).unwrap();
            let ry = verify(&y.condition, &samples, y.tol).unwrap();
            assert_eq!(rx.norms, ry.norms, "{id}/{}", x.name);
        }
    }
}

#[test]
fn every_entry_is_reachable_from_the_language() {
    for e in catalog::ENTRIES {
        let checks = compile(catalog::spec_source(e.id).unwrap()).unwrap();
        assert!(checks.iter().any(|c| c.entry == e.id), "{}", e.id);
    }
}

#[test]
fn expression_printing_keeps_meaning() {
    for src in [
        "2 + 3*4^2",
        "-x^2",
        "(-x)^2",
        "x - (y - z)",
        "x / (y*z)",
        "2^3^2",
        "sin(x)^2 + cos(x)^2",
        "exp(-x^2 - y^2)*bump(z)",
        "dx^wdy + 2*dz^wdxi",
        "x*dy @e1 + dz @e2",
    ] {
        let ast = parse_expr(src).unwrap();
        let printed = print_expr(&ast);
        let back = parse_expr(&printed).unwrap();
        assert_eq!(print_expr(&back), printed, "{src}");
    }
    let names = ["x".to_string(), "y".to_string()];
    for (src, want) in [("2 + 3*4^2", 50.0), ("-2^2", -4.0), ("2^3^2", 512.0), ("x - (y - 1)", 0.5)] {
        let e = dsl::scalar_expr(&parse_expr(src).unwrap(), &names).unwrap();
        let p = dsl::scalar_expr(&parse_expr(&print_expr(&parse_expr(src).unwrap())).unwrap(), &names).unwrap();
        let pt = [1.5, 2.0];
        assert_eq!(e.eval(&pt).unwrap().re, want, "{src}");
        assert_eq!(p.eval(&pt).unwrap(), e.eval(&pt).unwrap(), "{src}");
    }
}

#[test]
fn unicode_minus_and_comments() {
    let names = ["x".to_string()];
    let e = dsl::scalar_expr(&parse_expr("−x + 1 # trailing").unwrap(), &names).unwrap();
    assert_eq!(e.eval(&[3.0]).unwrap().re, -2.0);
}
