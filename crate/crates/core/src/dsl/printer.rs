use std::fmt::Write;

use super::ast::*;

fn num(v: f64) -> String {
    let s = format!("{v:?}");
    s.strip_suffix(".0").map(str::to_string).unwrap_or(s)
}

fn prec(a: &Ast) -> u8 {
    match &a.kind {
        ExprKind::Num(v) if *v < 0.0 => 40,
        ExprKind::Num(_) | ExprKind::Ident(_) | ExprKind::Call(..) => 60,
        ExprKind::Neg(_) => 40,
        ExprKind::Label(..) => 20,
        ExprKind::Binary(op, ..) => match op {
            BinOp::Add | BinOp::Sub => 10,
            BinOp::Mul | BinOp::Div | BinOp::Wedge => 30,
            BinOp::Pow => 50,
        },
    }
}

fn wrap(out: &mut String, a: &Ast, min: u8) {
    if prec(a) < min {
        out.push('(');
        expr_into(out, a);
        out.push(')');
    } else {
        expr_into(out, a);
    }
}

fn expr_into(out: &mut String, a: &Ast) {
    match &a.kind {
        ExprKind::Num(v) => out.push_str(&num(*v)),
        ExprKind::Ident(s) => out.push_str(s),
        ExprKind::Neg(inner) => {
            out.push('-');
            wrap(out, inner, 40);
        }
        ExprKind::Call(f, args) => {
            out.push_str(f);
            out.push('(');
            for (i, x) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                expr_into(out, x);
            }
            out.push(')');
        }
        ExprKind::Label(inner, l) => {
            wrap(out, inner, 30);
            let _ = write!(out, " @{l}");
        }
        ExprKind::Binary(op, l, r) => {
            let (lmin, rmin) = match op {
                BinOp::Add | BinOp::Sub => (10, 11),
                BinOp::Mul | BinOp::Div | BinOp::Wedge => (30, 31),
                BinOp::Pow => (51, 50),
            };
            wrap(out, l, lmin);
            match op {
                BinOp::Pow => out.push('^'),
                BinOp::Wedge => out.push_str("^w"),
                BinOp::Mul => out.push('*'),
                o => {
                    let _ = write!(out, " {} ", o.symbol());
                }
            }
            wrap(out, r, rmin);
        }
    }
}

pub fn print_expr(a: &Ast) -> String {
    let mut s = String::new();
    expr_into(&mut s, a);
    s
}

fn list(items: impl IntoIterator<Item = String>) -> String {
    items.into_iter().collect::<Vec<_>>().join(", ")
}

fn arg(a: &Arg) -> String {
    match a {
        Arg::Expr(e) => print_expr(e),
        Arg::List(items, _) => format!("[{}]", list(items.iter().map(arg))),
    }
}

pub fn print_statement(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::Chart { name, coords, metric } => {
            let m = match metric {
                MetricDecl::Diag(d) => format!("diag({})", list(d.iter().map(print_expr))),
                MetricDecl::Matrix(rows) => format!(
                    "matrix [{}]",
                    list(rows.iter().map(|r| format!("[{}]", list(r.iter().map(print_expr)))))
                ),
            };
            format!(
                "chart {} ({}) metric {m}",
                name.text,
                list(coords.iter().map(|c| c.text.clone()))
            )
        }
        StmtKind::Field { name, value } => format!("field {} = {}", name.text, print_expr(value)),
        StmtKind::Form {
            vector,
            name,
            degree,
            values,
            value,
        } => {
            let kw = if *vector { "vector" } else { "form" };
            let vals = values.as_ref().map(|v| format!(" values {}", v.text)).unwrap_or_default();
            format!("{kw} {} : {}{vals} = {}", name.text, print_expr(degree), print_expr(value))
        }
        StmtKind::Algebra { name, dim, brackets } => {
            let mut s = format!("algebra {} dim {}", name.text, print_expr(dim));
            if !brackets.is_empty() {
                s.push_str(" bracket");
                for b in brackets {
                    let mut parts = vec![print_expr(&b.i), print_expr(&b.j), print_expr(&b.k)];
                    if let Some(c) = &b.coef {
                        parts.push(print_expr(c));
                    }
                    let _ = write!(s, " ({})", list(parts));
                }
            }
            s
        }
        StmtKind::Check(c) => {
            let args = list(c.args.iter().map(|a| match &a.name {
                Some(n) => format!("{}={}", n.text, arg(&a.value)),
                None => arg(&a.value),
            }));
            let kind = match c.sample.kind {
                SampleKind::Grid => "grid",
                SampleKind::Random => "random",
            };
            let ranges = list(
                c.sample
                    .ranges
                    .iter()
                    .map(|(a, b)| format!("{}..{}", print_expr(a), print_expr(b))),
            );
            let seed = c
                .sample
                .seed
                .as_ref()
                .map(|s| format!(", seed {}", print_expr(s)))
                .unwrap_or_default();
            let mut s = format!(
                "check {}({args}) on {kind}({ranges}; {}{seed})",
                c.entry.text,
                print_expr(&c.sample.count)
            );
            if let Some(t) = &c.tol {
                let _ = write!(s, " tol {}", print_expr(t));
            }
            if let Some(a) = &c.alias {
                let _ = write!(s, " as {}", a.text);
            }
            s
        }
    }
}

/// Canonical text of a document; reparses to the same statements.
pub fn print(doc: &Document) -> String {
    let mut out = String::new();
    for s in &doc.statements {
        out.push_str(&print_statement(s));
        out.push('\n');
    }
    out
}
