use indexmap::IndexMap;

use super::ast::*;
use super::printer::print_expr;
use super::{Diagnostic, Span};
use crate::catalog::{self, ParamKind, ParamSpec, Params, Value};
use crate::chart::{Chart, Metric};
use crate::diffops::forms::d as ext_d;
use crate::engine::{hodge_symbolic, GrCondition, DEFAULT_TOL};
use crate::error::Error;
use crate::expr::{Exponent, Expr};
use crate::exterior::{AlternatingTensor, Form, Variance};
use crate::sample::SampleSet;
use crate::values::{LieStructure, ValueSpace, ValuedForm};

/// A check ready to run.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub entry: String,
    pub condition: GrCondition,
    pub samples: SampleSet,
    pub tol: f64,
    /// Whether `tol` was written in the source.
    pub explicit_tol: bool,
    pub span: Span,
}

type BResult<T> = Result<T, Diagnostic>;

fn err<T>(span: Span, msg: impl Into<String>) -> BResult<T> {
    Err(Diagnostic::error(span, msg))
}

struct Declared<T> {
    value: T,
    chart: String,
}

#[derive(Default)]
struct Env {
    charts: IndexMap<String, Chart>,
    current: Option<String>,
    fields: IndexMap<String, Declared<Expr>>,
    forms: IndexMap<String, Declared<ValuedForm<Expr>>>,
    algebras: IndexMap<String, LieStructure>,
    check_names: IndexMap<String, usize>,
}

/// Intermediate value of a form expression.
#[derive(Clone)]
enum Val {
    Scalar(Expr),
    Form(Form<Expr>),
    /// Terms carrying value labels, in order of first appearance.
    Labeled(Vec<(String, Form<Expr>)>),
}

struct Ctx<'a> {
    env: &'a Env,
    /// Coordinates in scope and the chart they belong to.
    coords: &'a [String],
    chart: Option<(&'a str, &'a Chart)>,
    /// Basis tokens denote `∂x` rather than `dx`.
    contravariant: bool,
}

const FUNCTIONS: &[&str] = &["sin", "cos", "exp", "sqrt", "bump", "d", "star"];

impl Ctx<'_> {
    fn dim(&self) -> usize {
        self.coords.len()
    }

    fn promote(&self, e: &Expr, like: Variance) -> Form<Expr> {
        AlternatingTensor::scalar(self.dim(), e.clone()).with_variance(like)
    }

    fn same_chart(&self, name: &str, declared_on: &str, span: Span) -> BResult<()> {
        match self.chart {
            Some((c, _)) if c != declared_on => err(
                span,
                format!("`{name}` is declared on chart `{declared_on}`, but chart `{c}` is active here"),
            ),
            _ => Ok(()),
        }
    }

    fn ident(&self, name: &str, span: Span) -> BResult<Val> {
        if let Some(i) = self.coords.iter().position(|c| c == name) {
            return Ok(Val::Scalar(Expr::coord(i)));
        }
        if let Some(f) = self.env.fields.get(name) {
            self.same_chart(name, &f.chart, span)?;
            return Ok(Val::Scalar(f.value.clone()));
        }
        if let Some(f) = self.env.forms.get(name) {
            self.same_chart(name, &f.chart, span)?;
            let v = &f.value;
            if v.space().dim() == 1 && v.space().labels()[0] == "1" {
                return Ok(Val::Form(v.part(0).clone()));
            }
            return Ok(Val::Labeled(
                v.space().labels().iter().cloned().zip(v.parts().iter().cloned()).collect(),
            ));
        }
        if let Some(rest) = name.strip_prefix('d') {
            if let Some(i) = self.coords.iter().position(|c| c == rest) {
                let v = if self.contravariant { Variance::Contravariant } else { Variance::Covariant };
                let b = AlternatingTensor::basis(self.dim(), &[i], v).map_err(|e| Diagnostic::error(span, e.to_string()))?;
                return Ok(Val::Form(b));
            }
        }
        match name {
            "i" => Ok(Val::Scalar(Expr::imag_unit())),
            "pi" => Ok(Val::Scalar(Expr::real(std::f64::consts::PI))),
            _ => err(span, format!("unknown name `{name}`")),
        }
    }

    fn eval(&self, a: &Ast) -> BResult<Val> {
        Ok(match self.eval_raw(a)? {
            Val::Scalar(e) => Val::Scalar(fold(e)),
            v => v,
        })
    }

    fn eval_raw(&self, a: &Ast) -> BResult<Val> {
        let span = a.span;
        let lift = |r: crate::Result<Form<Expr>>| r.map_err(|e| Diagnostic::error(span, e.to_string()));
        match &a.kind {
            ExprKind::Num(v) => Ok(Val::Scalar(Expr::real(*v))),
            ExprKind::Ident(s) => self.ident(s, span),
            ExprKind::Neg(x) => Ok(match self.eval(x)? {
                Val::Scalar(e) => Val::Scalar(-e),
                Val::Form(f) => Val::Form(f.neg()),
                Val::Labeled(ts) => Val::Labeled(ts.into_iter().map(|(l, f)| (l, f.neg())).collect()),
            }),
            ExprKind::Call(f, args) => {
                if !FUNCTIONS.contains(&f.as_str()) {
                    return err(span, format!("unknown function `{f}`"));
                }
                if args.len() != 1 {
                    return err(span, format!("`{f}` takes one argument, got {}", args.len()));
                }
                let x = self.eval(&args[0])?;
                match (f.as_str(), x) {
                    ("d", Val::Scalar(e)) => Ok(Val::Form(lift(ext_d(&self.promote(&e, Variance::Covariant)))?)),
                    ("d", Val::Form(w)) => Ok(Val::Form(lift(ext_d(&w))?)),
                    ("d", Val::Labeled(ts)) => Ok(Val::Labeled(
                        ts.into_iter().map(|(l, w)| Ok((l, lift(ext_d(&w))?))).collect::<BResult<_>>()?,
                    )),
                    ("star", x) => {
                        let (_, chart) = self.chart.ok_or_else(|| Diagnostic::error(span, "`star` needs a chart"))?;
                        let hodge = |w: Form<Expr>| {
                            hodge_symbolic(&ValuedForm::scalar_valued(w), chart)
                                .map(|v| v.part(0).clone())
                                .map_err(|e| Diagnostic::error(span, e.to_string()))
                        };
                        match x {
                            Val::Scalar(e) => Ok(Val::Form(hodge(self.promote(&e, Variance::Covariant))?)),
                            Val::Form(w) => Ok(Val::Form(hodge(w)?)),
                            Val::Labeled(ts) => Ok(Val::Labeled(
                                ts.into_iter().map(|(l, w)| Ok((l, hodge(w)?))).collect::<BResult<_>>()?,
                            )),
                        }
                    }
                    (name, Val::Scalar(e)) => Ok(Val::Scalar(match name {
                        "sin" => e.sin(),
                        "cos" => e.cos(),
                        "exp" => e.exp(),
                        "sqrt" => e.sqrt(),
                        _ => e.bump(),
                    })),
                    (name, _) => err(span, format!("`{name}` expects a scalar argument")),
                }
            }
            ExprKind::Label(x, label) => match self.eval(x)? {
                Val::Scalar(e) => Ok(Val::Labeled(vec![(label.clone(), self.promote(&e, Variance::Covariant))])),
                Val::Form(f) => Ok(Val::Labeled(vec![(label.clone(), f)])),
                Val::Labeled(_) => err(span, "a term can carry only one value label"),
            },
            ExprKind::Binary(op, l, r) => {
                let (lv, rv) = (self.eval(l)?, self.eval(r)?);
                self.binary(*op, lv, rv, r, span)
            }
        }
    }

    fn binary(&self, op: BinOp, l: Val, r: Val, rhs: &Ast, span: Span) -> BResult<Val> {
        let fail = |e: Error| Diagnostic::error(span, e.to_string());
        use Val::*;
        match op {
            BinOp::Add | BinOp::Sub => {
                let sub = op == BinOp::Sub;
                match (l, r) {
                    (Scalar(a), Scalar(b)) => Ok(Scalar(if sub { a - b } else { a + b })),
                    (Labeled(a), Labeled(b)) => {
                        let mut out = a;
                        for (label, f) in b {
                            let f = if sub { f.neg() } else { f };
                            match out.iter_mut().find(|(l, _)| *l == label) {
                                Some((_, g)) => *g = g.add(&f).map_err(fail)?,
                                None => out.push((label, f)),
                            }
                        }
                        Ok(Labeled(out))
                    }
                    (Labeled(_), _) | (_, Labeled(_)) => {
                        err(span, "every term of a valued form needs a value label `@E..`")
                    }
                    (a, b) => {
                        let (a, b) = self.as_forms(a, b, span)?;
                        let s = if sub { a.sub(&b) } else { a.add(&b) };
                        Ok(Form(s.map_err(fail)?))
                    }
                }
            }
            BinOp::Mul => match (l, r) {
                (Scalar(a), Scalar(b)) => Ok(Scalar(a * b)),
                (Scalar(s), Form(f)) | (Form(f), Scalar(s)) => Ok(Form(f.times(&s))),
                (Scalar(s), Labeled(ts)) | (Labeled(ts), Scalar(s)) => {
                    Ok(Labeled(ts.into_iter().map(|(l, f)| (l, f.times(&s))).collect()))
                }
                (Form(a), Form(b)) if a.degree() == 0 || b.degree() == 0 => Ok(Form(a.wedge(&b).map_err(fail)?)),
                _ => err(span, "cannot multiply two forms with `*`; use `^w` for the wedge product"),
            },
            BinOp::Div => match r {
                Scalar(b) => {
                    let inv = Expr::one() / b;
                    self.binary(BinOp::Mul, l, Scalar(inv), rhs, span)
                }
                _ => err(rhs.span, "can only divide by a scalar"),
            },
            BinOp::Wedge => match (l, r) {
                (Labeled(ts), Form(b)) => Ok(Labeled(
                    ts.into_iter()
                        .map(|(l, a)| Ok((l, a.wedge(&b).map_err(fail)?)))
                        .collect::<BResult<_>>()?,
                )),
                (Form(a), Labeled(ts)) => Ok(Labeled(
                    ts.into_iter()
                        .map(|(l, b)| Ok((l, a.wedge(&b).map_err(fail)?)))
                        .collect::<BResult<_>>()?,
                )),
                (Labeled(_), _) | (_, Labeled(_)) => err(span, "cannot wedge this combination of valued forms"),
                (a, b) => {
                    let (a, b) = self.as_forms(a, b, span)?;
                    Ok(Form(a.wedge(&b).map_err(fail)?))
                }
            },
            BinOp::Pow => {
                let base = match l {
                    Scalar(e) => e,
                    _ => return err(span, "only scalars can be raised to a power"),
                };
                let ex = match r {
                    Scalar(e) => e.as_const().filter(|c| c.im == 0.0).map(|c| c.re),
                    _ => None,
                };
                let halves = ex.map(|v| 2.0 * v).filter(|h| h.fract() == 0.0 && h.abs() < 1e6);
                match halves {
                    Some(h) => Ok(Scalar(base.pow(Exponent::halves(h as i32)))),
                    None => err(rhs.span, "exponents must be integer or half-integer constants"),
                }
            }
        }
    }

    fn as_forms(&self, a: Val, b: Val, span: Span) -> BResult<(Form<Expr>, Form<Expr>)> {
        match (a, b) {
            (Val::Form(a), Val::Form(b)) => Ok((a, b)),
            (Val::Scalar(s), Val::Form(b)) => Ok((self.promote(&s, b.variance()), b)),
            (Val::Form(a), Val::Scalar(s)) => {
                let v = a.variance();
                Ok((a, self.promote(&s, v)))
            }
            (Val::Scalar(a), Val::Scalar(b)) => {
                let v = Variance::Covariant;
                Ok((self.promote(&a, v), self.promote(&b, v)))
            }
            _ => err(span, "invalid combination of valued forms"),
        }
    }

    fn scalar(&self, a: &Ast) -> BResult<Expr> {
        match self.eval(a)? {
            Val::Scalar(e) => Ok(e),
            _ => err(a.span, "expected a scalar expression"),
        }
    }
}

/// Replaces a coordinate-free expression by its value.
fn fold(e: Expr) -> Expr {
    if e.as_const().is_some() || e.max_coord().is_some() {
        return e;
    }
    match e.eval(&[]) {
        Ok(v) if v.re.is_finite() && v.im.is_finite() => Expr::constant(v),
        _ => e,
    }
}

fn constant(ctx: &Ctx, a: &Ast) -> BResult<f64> {
    let e = ctx.scalar(a)?;
    match e.as_const() {
        Some(c) if c.im == 0.0 => Ok(c.re),
        _ => err(a.span, "expected a real constant"),
    }
}

fn count(ctx: &Ctx, a: &Ast, what: &str) -> BResult<usize> {
    let v = constant(ctx, a)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
        return err(a.span, format!("{what} must be a non-negative integer"));
    }
    Ok(v as usize)
}

/// Converts a scalar expression over `coords`; used by the `eval` command.
pub fn scalar_expr(a: &Ast, coords: &[String]) -> Result<Expr, Diagnostic> {
    let env = Env::default();
    let ctx = Ctx {
        env: &env,
        coords,
        chart: None,
        contravariant: false,
    };
    ctx.scalar(a)
}

fn to_valued(
    ctx: &Ctx,
    val: Val,
    degree: usize,
    space: Option<(&str, ValueSpace)>,
    span: Span,
) -> BResult<ValuedForm<Expr>> {
    let n = ctx.dim();
    let variance = if ctx.contravariant { Variance::Contravariant } else { Variance::Covariant };
    let check = |f: &Form<Expr>| -> BResult<()> {
        if f.degree() != degree && !f.is_zero() {
            return err(span, Error::Degree(format!("expression has degree {}, declared {degree}", f.degree())).to_string());
        }
        Ok(())
    };
    let fix = |f: Form<Expr>| -> Form<Expr> {
        if f.is_zero() {
            AlternatingTensor::zero(n, degree, variance)
        } else {
            f
        }
    };
    match (val, space) {
        (Val::Scalar(e), None) if e.is_zero() => Ok(ValuedForm::zero(ValueSpace::scalar(), n, degree, variance)),
        (Val::Scalar(e), Some((_, s))) if e.is_zero() => Ok(ValuedForm::zero(s, n, degree, variance)),
        (Val::Scalar(e), None) => {
            let f = ctx.promote(&e, variance);
            check(&f)?;
            Ok(ValuedForm::scalar_valued(f))
        }
        (Val::Form(f), None) => {
            check(&f)?;
            Ok(ValuedForm::scalar_valued(fix(f)))
        }
        (Val::Labeled(_), None) => err(span, "value labels need a `values` clause"),
        (Val::Scalar(_) | Val::Form(_), Some((name, _))) => {
            err(span, format!("every term of a form with values in `{name}` needs a value label"))
        }
        (Val::Labeled(ts), Some((name, s))) => {
            let mut parts = vec![AlternatingTensor::zero(n, degree, variance); s.dim()];
            for (label, f) in ts {
                let Some(k) = s.labels().iter().position(|l| *l == label) else {
                    return err(span, format!("`{label}` is not a basis label of `{name}`"));
                };
                check(&f)?;
                parts[k] = fix(f);
            }
            ValuedForm::from_parts(s, parts).map_err(|e| Diagnostic::error(span, e.to_string()))
        }
    }
}

struct Binder {
    env: Env,
    diags: Vec<Diagnostic>,
    checks: Vec<BoundCheck>,
}

impl Binder {
    fn ctx<'a>(&'a self, contravariant: bool) -> Ctx<'a> {
        let chart = self
            .env
            .current
            .as_deref()
            .and_then(|n| self.env.charts.get_key_value(n))
            .map(|(k, c)| (k.as_str(), c));
        Ctx {
            env: &self.env,
            coords: chart.map(|(_, c)| c.names()).unwrap_or(&[]),
            chart,
            contravariant,
        }
    }

    fn declare_unique(&self, name: &Name) -> BResult<()> {
        let e = &self.env;
        if e.charts.contains_key(&name.text)
            || e.fields.contains_key(&name.text)
            || e.forms.contains_key(&name.text)
            || e.algebras.contains_key(&name.text)
        {
            return err(name.span, format!("`{}` is already declared", name.text));
        }
        if self.ctx(false).coords.contains(&name.text) {
            return err(name.span, format!("`{}` is a coordinate of the active chart", name.text));
        }
        Ok(())
    }

    fn current_chart(&self, span: Span) -> BResult<(String, Chart)> {
        match &self.env.current {
            Some(n) => Ok((n.clone(), self.env.charts[n].clone())),
            None => err(span, "no chart declared before this statement"),
        }
    }

    fn statement(&mut self, s: &Stmt) -> BResult<()> {
        match &s.kind {
            StmtKind::Chart { name, coords, metric } => {
                self.declare_unique(name)?;
                let names: Vec<String> = coords.iter().map(|c| c.text.clone()).collect();
                for (i, c) in coords.iter().enumerate() {
                    if names[..i].contains(&c.text) {
                        return err(c.span, format!("duplicate coordinate `{}`", c.text));
                    }
                }
                let env = Env::default();
                let ctx = Ctx {
                    env: &env,
                    coords: &names,
                    chart: None,
                    contravariant: false,
                };
                let metric = match metric {
                    MetricDecl::Diag(d) => {
                        let es = d.iter().map(|a| ctx.scalar(a)).collect::<BResult<Vec<_>>>()?;
                        let consts: Option<Vec<f64>> =
                            es.iter().map(|e| e.as_const().filter(|c| c.im == 0.0).map(|c| c.re)).collect();
                        match consts {
                            Some(c) => Metric::diagonal(&c),
                            None => {
                                let n = es.len();
                                let rows = (0..n)
                                    .map(|i| (0..n).map(|j| if i == j { es[i].clone() } else { Expr::zero() }).collect())
                                    .collect();
                                Metric::from_rows(rows)
                            }
                        }
                    }
                    MetricDecl::Matrix(rows) => {
                        let rows = rows
                            .iter()
                            .map(|r| r.iter().map(|a| ctx.scalar(a)).collect::<BResult<Vec<_>>>())
                            .collect::<BResult<Vec<_>>>()?;
                        Metric::from_rows(rows)
                    }
                }
                .map_err(|e| Diagnostic::error(s.span, e.to_string()))?;
                let chart = Chart::new(names, metric).map_err(|e| Diagnostic::error(s.span, e.to_string()))?;
                self.env.charts.insert(name.text.clone(), chart);
                self.env.current = Some(name.text.clone());
            }
            StmtKind::Field { name, value } => {
                self.declare_unique(name)?;
                let (chart, _) = self.current_chart(s.span)?;
                let e = self.ctx(false).scalar(value)?;
                self.env.fields.insert(name.text.clone(), Declared { value: e, chart });
            }
            StmtKind::Form {
                vector,
                name,
                degree,
                values,
                value,
            } => {
                self.declare_unique(name)?;
                let (chart_name, chart) = self.current_chart(s.span)?;
                let ctx = self.ctx(*vector);
                let p = count(&ctx, degree, "a degree")?;
                if p > chart.dim() {
                    return err(
                        degree.span,
                        Error::Degree(format!("degree {p} exceeds the chart dimension {}", chart.dim())).to_string(),
                    );
                }
                let space = match values {
                    None => None,
                    Some(v) => match self.env.algebras.get(&v.text) {
                        Some(l) => Some((v.text.as_str(), ValueSpace::lie_algebra(l.clone()))),
                        None => return err(v.span, format!("unknown name `{}`", v.text)),
                    },
                };
                let val = ctx.eval(value)?;
                let form = to_valued(&ctx, val, p, space, value.span)?;
                self.env.forms.insert(
                    name.text.clone(),
                    Declared {
                        value: form,
                        chart: chart_name,
                    },
                );
            }
            StmtKind::Algebra { name, dim, brackets } => {
                self.declare_unique(name)?;
                let env = Env::default();
                let ctx = Ctx {
                    env: &env,
                    coords: &[],
                    chart: None,
                    contravariant: false,
                };
                let r = count(&ctx, dim, "an algebra dimension")?;
                if r == 0 {
                    return err(dim.span, "an algebra needs dimension at least 1");
                }
                let mut bs = Vec::new();
                for b in brackets {
                    let mut idx = [0usize; 3];
                    for (slot, a) in idx.iter_mut().zip([&b.i, &b.j, &b.k]) {
                        let v = count(&ctx, a, "a basis index")?;
                        if v == 0 || v > r {
                            return err(a.span, format!("basis index must be in 1..{r}"));
                        }
                        *slot = v - 1;
                    }
                    let c = match &b.coef {
                        Some(a) => constant(&ctx, a)?,
                        None => 1.0,
                    };
                    bs.push((idx[0], idx[1], idx[2], c));
                }
                let lie = LieStructure::from_brackets(r, &bs).map_err(|e| Diagnostic::error(s.span, e.to_string()))?;
                let report = crate::values::validate_lie(&lie);
                if !report.is_ok() {
                    return err(s.span, format!("invalid Lie structure: {report}"));
                }
                self.env.algebras.insert(name.text.clone(), lie);
            }
            StmtKind::Check(c) => {
                let check = self.check(c, s.span)?;
                self.checks.push(check);
            }
        }
        Ok(())
    }

    fn resolve(&self, spec: &ParamSpec, arg: &Arg) -> BResult<Value> {
        let ctx = self.ctx(false);
        let ident = |a: &Arg| match a {
            Arg::Expr(Ast {
                kind: ExprKind::Ident(s),
                ..
            }) => Some(s.clone()),
            _ => None,
        };
        let expr = |a: &Arg| -> BResult<Ast> {
            match a {
                Arg::Expr(e) => Ok(e.clone()),
                Arg::List(_, span) => err(*span, format!("`{}` does not take a list", spec.name)),
            }
        };
        let form_value = |a: &Arg| -> BResult<Value> {
            let e = expr(a)?;
            if let Some(d) = ident(a).and_then(|n| self.env.forms.get(&n)) {
                let n = ident(a).unwrap_or_default();
                ctx.same_chart(&n, &d.chart, e.span)?;
                return Ok(Value::Form { name: n, form: d.value.clone() });
            }
            let name = print_expr(&e);
            let form = match ctx.eval(&e)? {
                Val::Scalar(s) => ValuedForm::scalar_valued(ctx.promote(&s, Variance::Covariant)),
                Val::Form(f) => ValuedForm::scalar_valued(f),
                Val::Labeled(_) => return err(e.span, "declare valued forms with `form NAME : p values ALGEBRA` first"),
            };
            Ok(Value::Form { name, form })
        };
        let field_value = |a: &Arg| -> BResult<Value> {
            let e = ctx.scalar(&expr(a)?)?;
            Ok(match e.as_const() {
                Some(c) if c.im == 0.0 => Value::Number(c.re),
                _ => Value::Field(e),
            })
        };
        let list = |a: &Arg| -> Vec<Arg> {
            match a {
                Arg::List(items, _) => items.clone(),
                a => vec![a.clone()],
            }
        };
        match spec.kind {
            ParamKind::Vector | ParamKind::Form => form_value(arg),
            ParamKind::Field => field_value(arg),
            ParamKind::Number => Ok(Value::Number(constant(&ctx, &expr(arg)?)?)),
            ParamKind::Choice(options) => match ident(arg) {
                Some(w) if options.contains(&w.as_str()) => Ok(Value::Word(w)),
                _ => err(arg.span(), format!("`{}` must be one of: {}", spec.name, options.join(", "))),
            },
            ParamKind::Chart => match ident(arg) {
                Some(n) if self.env.charts.contains_key(&n) => Ok(Value::Chart(self.env.charts[&n].clone())),
                Some(n) => err(arg.span(), format!("unknown chart `{n}`")),
                None => err(arg.span(), format!("`{}` expects a chart name", spec.name)),
            },
            ParamKind::Matrix => {
                let Arg::List(rows, span) = arg else {
                    return err(arg.span(), format!("`{}` expects a matrix [[..], ..]", spec.name));
                };
                let mut m = Vec::new();
                for r in rows {
                    let Arg::List(items, _) = r else {
                        return err(r.span(), "matrix rows are lists [..]");
                    };
                    m.push(items.iter().map(|a| ctx.scalar(&expr(a)?)).collect::<BResult<Vec<_>>>()?);
                }
                if m.is_empty() || m.iter().any(|r| r.len() != m.len()) {
                    return err(*span, format!("`{}` must be a square matrix", spec.name));
                }
                Ok(Value::Matrix(m))
            }
            ParamKind::Forms => Ok(Value::List(list(arg).iter().map(form_value).collect::<BResult<_>>()?)),
            ParamKind::Fields => Ok(Value::List(list(arg).iter().map(field_value).collect::<BResult<_>>()?)),
        }
    }

    fn check(&mut self, c: &CheckStmt, span: Span) -> BResult<BoundCheck> {
        let entry = catalog::entry(&c.entry.text)
            .map_err(|_| Diagnostic::error(c.entry.span, format!("unknown catalog entry `{}`", c.entry.text)))?;

        // Positional arguments fill parameters in order; a variadic one takes the rest.
        let mut assigned: IndexMap<&'static str, (ParamSpec, Arg)> = IndexMap::new();
        let positional: Vec<&CheckArg> = c.args.iter().filter(|a| a.name.is_none()).collect();
        let mut pi = 0;
        for spec in entry.params {
            if pi >= positional.len() {
                break;
            }
            if c.args.iter().any(|a| a.name.as_ref().is_some_and(|n| n.text == spec.name)) {
                continue;
            }
            if spec.kind.is_variadic() {
                let rest: Vec<Arg> = positional[pi..].iter().map(|a| a.value.clone()).collect();
                let s = rest[0].span();
                let v = if rest.len() == 1 { rest.into_iter().next().unwrap() } else { Arg::List(rest, s) };
                assigned.insert(spec.name, (*spec, v));
                pi = positional.len();
            } else {
                assigned.insert(spec.name, (*spec, positional[pi].value.clone()));
                pi += 1;
            }
        }
        if pi < positional.len() {
            return err(
                positional[pi].value.span(),
                format!("too many arguments: {}", entry.signature()),
            );
        }
        for a in &c.args {
            let Some(n) = &a.name else { continue };
            let Some(spec) = entry.param(&n.text) else {
                return err(n.span, format!("`{}` has no parameter `{}`", entry.id, n.text));
            };
            if assigned.contains_key(spec.name) {
                return err(n.span, format!("parameter `{}` given twice", n.text));
            }
            assigned.insert(spec.name, (*spec, a.value.clone()));
        }
        for spec in entry.params {
            if spec.required && !assigned.contains_key(spec.name) {
                return err(c.entry.span, format!("missing argument `{}`: {}", spec.name, entry.signature()));
            }
        }

        let mut params = Params::new();
        for (name, (spec, arg)) in &assigned {
            params.set(*name, self.resolve(spec, arg)?);
        }
        let chart = match (self.env.current.as_ref(), params.get("metric")) {
            (_, Some(Value::Chart(ch))) => ch.clone(),
            (Some(n), _) => self.env.charts[n].clone(),
            (None, _) => return err(span, "no chart declared before this check"),
        };
        let condition = catalog::build(entry.id, &chart, &params).map_err(|e| Diagnostic::error(c.entry.span, e.to_string()))?;

        let ctx = self.ctx(false);
        let sd = &c.sample;
        let bounds = sd
            .ranges
            .iter()
            .map(|(a, b)| Ok((constant(&ctx, a)?, constant(&ctx, b)?)))
            .collect::<BResult<Vec<_>>>()?;
        if bounds.len() != chart.dim() {
            return err(
                sd.span,
                format!("sample box has {} ranges, chart has {} coordinates", bounds.len(), chart.dim()),
            );
        }
        let n = count(&ctx, &sd.count, "a point count")?;
        let samples = match sd.kind {
            SampleKind::Grid => SampleSet::grid(bounds, n),
            SampleKind::Random => {
                let seed = match &sd.seed {
                    Some(a) => count(&ctx, a, "a seed")? as u64,
                    None => 0,
                };
                SampleSet::random(bounds, n, seed)
            }
        }
        .map_err(|e| Diagnostic::error(sd.span, e.to_string()))?;
        let tol = match &c.tol {
            Some(a) => {
                let t = constant(&ctx, a)?;
                if !(t > 0.0) {
                    return err(a.span, "tol must be positive");
                }
                t
            }
            None => DEFAULT_TOL,
        };

        let base = c.alias.as_ref().map(|a| a.text.clone()).unwrap_or_else(|| entry.id.to_string());
        let seen = self.env.check_names.entry(base.clone()).or_insert(0);
        *seen += 1;
        let name = if *seen == 1 { base } else { format!("{base}#{seen}") };
        Ok(BoundCheck {
            name,
            entry: entry.id.to_string(),
            condition,
            samples,
            tol,
            explicit_tol: c.tol.is_some(),
            span,
        })
    }
}

/// Resolves names and builds every check of `doc`, in declaration order.
pub fn bind_document(doc: &Document) -> Result<Vec<BoundCheck>, Vec<Diagnostic>> {
    let mut b = Binder {
        env: Env::default(),
        diags: Vec::new(),
        checks: Vec::new(),
    };
    for s in &doc.statements {
        if let Err(d) = b.statement(s) {
            b.diags.push(d);
        }
    }
    if b.diags.is_empty() {
        Ok(b.checks)
    } else {
        Err(b.diags)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{compile, parse, parse_expr};
    use super::*;

    const MINK: &str = "chart M (x, y, z, xi) metric diag(-1, -1, -1, 1)\n";

    #[test]
    fn precedence_evaluates() {
        let e = scalar_expr(&parse_expr("2+3*4^2").unwrap(), &[]).unwrap();
        assert_eq!(e.eval(&[]).unwrap().re, 50.0);
        let e = scalar_expr(&parse_expr("-x^2").unwrap(), &["x".into()]).unwrap();
        assert_eq!(e.eval(&[3.0]).unwrap().re, -9.0);
    }

    #[test]
    fn soliton_document_binds_one_check() {
        let src = format!(
            "{MINK}field f = exp(-(x^2+y^2))*bump(2/sqrt(3)*(z-0.5*xi))\n\
             vector u : 1 = 0.5*f*dz + f*dxi\n\
             check autoparallel_vector(u) on random(-2..2,-2..2,-2..2,-2..2; 1000, seed 7) tol 1e-9\n"
        );
        let checks = compile(&src).unwrap();
        assert_eq!(checks.len(), 1);
        assert_eq!(checks[0].entry, "autoparallel_vector");
        assert_eq!(checks[0].tol, 1e-9);
    }

    #[test]
    fn undeclared_name_at_use_site() {
        let src = format!("{MINK}check first_integral(dxi, v) on grid(0..1,0..1,0..1,0..1; 2)\n");
        let d = compile(&src).unwrap_err();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("`v`"), "{}", d[0].message);
        assert_eq!((d[0].span.line, d[0].span.col), (2, 26));
    }

    #[test]
    fn degree_beyond_dimension() {
        let d = compile(&format!("{MINK}form w : 5 = 0\n")).unwrap_err();
        assert!(d[0].message.starts_with("degree error"), "{}", d[0].message);
    }

    #[test]
    fn declared_degree_must_match() {
        let d = compile(&format!("{MINK}form w : 2 = x*dy\n")).unwrap_err();
        assert!(d[0].message.starts_with("degree error"));
    }

    #[test]
    fn unknown_entry_and_arity() {
        let d = compile(&format!("{MINK}check nope() on grid(0..1,0..1,0..1,0..1; 2)\n")).unwrap_err();
        assert!(d[0].message.contains("nope"));
        let d = compile(&format!("{MINK}check first_integral(dxi, x, y) on grid(0..1,0..1,0..1,0..1; 2)\n")).unwrap_err();
        assert!(d[0].message.starts_with("too many arguments"));
        let d = compile(&format!("{MINK}check first_integral(dxi) on grid(0..1,0..1,0..1,0..1; 2)\n")).unwrap_err();
        assert!(d[0].message.starts_with("missing argument `f`"));
    }

    #[test]
    fn valued_forms_need_labels() {
        let src = format!("{MINK}algebra su2 dim 3 bracket (1,2,3) (2,3,1) (3,1,2)\nform w : 1 values su2 = x*dy\n");
        let d = compile(&src).unwrap_err();
        assert!(d[0].message.contains("needs a value label"));
        let src = format!("{MINK}algebra su2 dim 3 bracket (1,2,3) (2,3,1) (3,1,2)\nform w : 1 values su2 = x*dy @E1 + dz @E3\n");
        assert!(compile(&src).is_ok());
    }

    #[test]
    fn duplicate_names_get_suffixes() {
        let src = format!(
            "{MINK}vector X : 1 = dxi\ncheck first_integral(X, x) on grid(0..1,0..1,0..1,0..1; 2)\n\
             check first_integral(X, y) on grid(0..1,0..1,0..1,0..1; 2)\n"
        );
        let c = compile(&src).unwrap();
        assert_eq!(c[0].name, "first_integral");
        assert_eq!(c[1].name, "first_integral#2");
    }

    #[test]
    fn symbols_stay_on_their_chart() {
        let src = format!(
            "{MINK}field f = x\nchart E (a, b) metric diag(1, 1)\ncheck first_integral(da, f) on grid(0..1,0..1; 2)\n"
        );
        let d = compile(&src).unwrap_err();
        assert!(d[0].message.contains("declared on chart `M`"));
        assert!(parse(&src).is_ok());
    }
}
