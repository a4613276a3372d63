//! Symbolic scalar fields over chart coordinates.
//!
//! Trees are immutable and shared through `Arc`, so derivative trees reuse
//! the subtrees of the expression they came from. Nothing is ever simplified
//! after construction; the only folding happens in the smart constructors,
//! which drop exact constant zeros and ones while a tree is being built.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::EvalError;

pub type C64 = Complex64;

/// Smallest divisor magnitude accepted by [`Expr::eval`].
pub const MIN_DIVISOR: f64 = 1e-300;

/// Exponent of a `Pow` node: an integer or a half-integer, stored as a count
/// of halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Exponent {
    halves: i32,
}

impl Exponent {
    pub const fn int(n: i32) -> Self {
        Exponent { halves: 2 * n }
    }

    /// `halves / 2`, e.g. `Exponent::halves(3)` is 3/2.
    pub const fn halves(halves: i32) -> Self {
        Exponent { halves }
    }

    pub fn is_integer(self) -> bool {
        self.halves % 2 == 0
    }

    pub fn value(self) -> f64 {
        f64::from(self.halves) / 2.0
    }

    pub fn halves_count(self) -> i32 {
        self.halves
    }

    fn minus_one(self) -> Self {
        Exponent { halves: self.halves - 2 }
    }
}

#[derive(Debug)]
pub enum Node {
    Const(C64),
    Coord(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Exponent),
    Neg(Expr),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Sqrt(Expr),
    /// `order`-th derivative of the bump profile `exp(-1/(1-s^2))`, zero for `|s| >= 1`.
    Bump { order: u8, arg: Expr },
}

/// A scalar field on a chart: a shared, immutable expression tree.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

pub type ScalarExpr = Expr;

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&[]))
    }
}

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(c: impl Into<C64>) -> Self {
        Expr::new(Node::Const(c.into()))
    }

    pub fn real(x: f64) -> Self {
        Expr::constant(C64::new(x, 0.0))
    }

    pub fn zero() -> Self {
        Expr::real(0.0)
    }

    pub fn one() -> Self {
        Expr::real(1.0)
    }

    pub fn imag_unit() -> Self {
        Expr::constant(C64::new(0.0, 1.0))
    }

    /// Coordinate `index` (0-based) of the chart.
    pub fn coord(index: usize) -> Self {
        Expr::new(Node::Coord(index))
    }

    pub fn as_const(&self) -> Option<C64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(C64::new(0.0, 0.0))
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(C64::new(1.0, 0.0))
    }

    pub fn pow(&self, e: Exponent) -> Self {
        if e.halves == 0 {
            return Expr::one();
        }
        if e.halves == 2 {
            return self.clone();
        }
        Expr::new(Node::Pow(self.clone(), e))
    }

    pub fn powi(&self, n: i32) -> Self {
        self.pow(Exponent::int(n))
    }

    pub fn sin(&self) -> Self {
        Expr::new(Node::Sin(self.clone()))
    }

    pub fn cos(&self) -> Self {
        Expr::new(Node::Cos(self.clone()))
    }

    pub fn exp(&self) -> Self {
        Expr::new(Node::Exp(self.clone()))
    }

    pub fn sqrt(&self) -> Self {
        Expr::new(Node::Sqrt(self.clone()))
    }

    /// The compactly supported bump `exp(-1/(1-s^2))` applied to `self`.
    pub fn bump(&self) -> Self {
        Expr::new(Node::Bump {
            order: 0,
            arg: self.clone(),
        })
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self.node() {
            Node::Const(_) => None,
            Node::Coord(i) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_coord().max(b.max_coord())
            }
            Node::Pow(a, _)
            | Node::Neg(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Exp(a)
            | Node::Sqrt(a)
            | Node::Bump { arg: a, .. } => a.max_coord(),
        }
    }

    /// Evaluates the tree in IEEE double precision.
    pub fn eval(&self, pt: &[f64]) -> Result<C64, EvalError> {
        Ok(match self.node() {
            Node::Const(c) => *c,
            Node::Coord(i) => {
                let x = pt.get(*i).ok_or(EvalError::PointDimension {
                    want: i + 1,
                    got: pt.len(),
                })?;
                C64::new(*x, 0.0)
            }
            Node::Add(a, b) => a.eval(pt)? + b.eval(pt)?,
            Node::Sub(a, b) => a.eval(pt)? - b.eval(pt)?,
            Node::Mul(a, b) => a.eval(pt)? * b.eval(pt)?,
            Node::Div(a, b) => {
                let den = b.eval(pt)?;
                if den.norm() < MIN_DIVISOR {
                    return Err(EvalError::Singularity(den.norm()));
                }
                a.eval(pt)? / den
            }
            Node::Pow(a, e) => eval_pow(a.eval(pt)?, *e)?,
            Node::Neg(a) => -a.eval(pt)?,
            Node::Sin(a) => a.eval(pt)?.sin(),
            Node::Cos(a) => a.eval(pt)?.cos(),
            Node::Exp(a) => a.eval(pt)?.exp(),
            Node::Sqrt(a) => {
                let v = a.eval(pt)?;
                if v.im == 0.0 {
                    if v.re < 0.0 {
                        return Err(EvalError::Domain(format!("sqrt of negative value {}", v.re)));
                    }
                    C64::new(v.re.sqrt(), 0.0)
                } else {
                    v.sqrt()
                }
            }
            Node::Bump { order, arg } => {
                let s = arg.eval(pt)?;
                if s.im != 0.0 {
                    return Err(EvalError::Domain("bump of a complex argument".into()));
                }
                C64::new(bump_derivative(*order, s.re), 0.0)
            }
        })
    }

    /// Exact partial derivative with respect to coordinate `axis` (0-based).
    pub fn diff(&self, axis: usize) -> Expr {
        match self.node() {
            Node::Const(_) => Expr::zero(),
            Node::Coord(i) => {
                if *i == axis {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff(axis) + b.diff(axis),
            Node::Sub(a, b) => a.diff(axis) - b.diff(axis),
            Node::Mul(a, b) => &a.diff(axis) * b + a * &b.diff(axis),
            Node::Div(a, b) => {
                let da = a.diff(axis);
                let db = b.diff(axis);
                if db.is_zero() {
                    &da / b
                } else {
                    (&da * b - a * &db) / b.powi(2)
                }
            }
            Node::Pow(a, e) => {
                let da = a.diff(axis);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::real(e.value()) * a.pow(e.minus_one()) * da
            }
            Node::Neg(a) => -a.diff(axis),
            Node::Sin(a) => a.cos() * a.diff(axis),
            Node::Cos(a) => -(a.sin() * a.diff(axis)),
            Node::Exp(_) => self * &self.node_arg().diff(axis),
            Node::Sqrt(a) => {
                let da = a.diff(axis);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::real(0.5) * da / self.clone()
            }
            Node::Bump { order, arg } => {
                let da = arg.diff(axis);
                if da.is_zero() {
                    return Expr::zero();
                }
                Expr::new(Node::Bump {
                    order: order + 1,
                    arg: arg.clone(),
                }) * da
            }
        }
    }

    fn node_arg(&self) -> &Expr {
        match self.node() {
            Node::Exp(a) | Node::Sin(a) | Node::Cos(a) | Node::Sqrt(a) | Node::Neg(a) => a,
            _ => unreachable!("node_arg on a non-unary node"),
        }
    }

    /// Fourth-order central difference along `axis` with step `h`.
    pub fn fd_diff(&self, axis: usize, pt: &[f64], h: f64) -> Result<C64, EvalError> {
        if !(h > 0.0) {
            return Err(EvalError::Domain(format!("step must be positive, got {h}")));
        }
        let mut p = pt.to_vec();
        let mut at = |offset: f64| {
            p[axis] = pt[axis] + offset;
            self.eval(&p)
        };
        let f2 = at(2.0 * h)?;
        let f1 = at(h)?;
        let m1 = at(-h)?;
        let m2 = at(-2.0 * h)?;
        Ok((-f2 + 8.0 * f1 - 8.0 * m1 + m2) / (12.0 * h))
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, names }
    }
}

fn eval_pow(base: C64, e: Exponent) -> Result<C64, EvalError> {
    if e.is_integer() {
        let n = e.halves / 2;
        if n < 0 && base.norm() < MIN_DIVISOR {
            return Err(EvalError::Singularity(base.norm()));
        }
        return Ok(base.powi(n));
    }
    if base.im != 0.0 || base.re < 0.0 {
        return Err(EvalError::Domain(format!(
            "half-integer power of {base} (needs a non-negative real base)"
        )));
    }
    if e.halves < 0 && base.re < MIN_DIVISOR {
        return Err(EvalError::Singularity(base.re));
    }
    Ok(C64::new(base.re.powf(e.value()), 0.0))
}

// Bump derivatives: b^(k)(s) = b(s) * Q_k(s, w) with w = 1/(1 - s^2).
// Q_0 = 1 and Q_{k+1} = dQ_k/ds - 2 s w^2 Q_k, using dw/ds = 2 s w^2.
type BumpPoly = Vec<(i32, i32, f64)>;

fn next_bump_poly(q: &BumpPoly) -> BumpPoly {
    let mut terms: std::collections::BTreeMap<(i32, i32), f64> = Default::default();
    for &(a, b, c) in q {
        if a > 0 {
            *terms.entry((a - 1, b)).or_default() += c * f64::from(a);
        }
        if b > 0 {
            *terms.entry((a + 1, b + 1)).or_default() += 2.0 * c * f64::from(b);
        }
        *terms.entry((a + 1, b + 2)).or_default() -= 2.0 * c;
    }
    terms
        .into_iter()
        .filter(|(_, c)| *c != 0.0)
        .map(|((a, b), c)| (a, b, c))
        .collect()
}

fn bump_polys() -> &'static [BumpPoly] {
    static POLYS: OnceLock<Vec<BumpPoly>> = OnceLock::new();
    POLYS.get_or_init(|| {
        let mut v = vec![vec![(0, 0, 1.0)]];
        for k in 0..8 {
            let next = next_bump_poly(&v[k]);
            v.push(next);
        }
        v
    })
}

/// `order`-th derivative of `exp(-1/(1-s^2))`; exactly zero outside the open support.
pub fn bump_derivative(order: u8, s: f64) -> f64 {
    if !(s.abs() < 1.0) {
        return 0.0;
    }
    let w = 1.0 / (1.0 - s * s);
    let base = (-w).exp();
    if base == 0.0 {
        return 0.0;
    }
    let owned;
    let poly: &BumpPoly = match bump_polys().get(order as usize) {
        Some(p) => p,
        None => {
            let mut p = bump_polys().last().cloned().unwrap_or_default();
            for _ in bump_polys().len()..=order as usize {
                p = next_bump_poly(&p);
            }
            owned = p;
            &owned
        }
    };
    let q: f64 = poly
        .iter()
        .map(|&(a, b, c)| c * s.powi(a) * w.powi(b))
        .sum();
    base * q
}

impl From<f64> for Expr {
    fn from(x: f64) -> Self {
        Expr::real(x)
    }
}

impl From<C64> for Expr {
    fn from(c: C64) -> Self {
        Expr::constant(c)
    }
}

fn add(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    Expr::new(Node::Add(a.clone(), b.clone()))
}

fn sub(a: &Expr, b: &Expr) -> Expr {
    if b.is_zero() {
        return a.clone();
    }
    if a.is_zero() {
        return neg(b);
    }
    Expr::new(Node::Sub(a.clone(), b.clone()))
}

fn mul(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b.clone();
    }
    if b.is_one() {
        return a.clone();
    }
    Expr::new(Node::Mul(a.clone(), b.clone()))
}

fn div(a: &Expr, b: &Expr) -> Expr {
    if a.is_zero() {
        return Expr::zero();
    }
    if b.is_one() {
        return a.clone();
    }
    Expr::new(Node::Div(a.clone(), b.clone()))
}

fn neg(a: &Expr) -> Expr {
    if a.is_zero() {
        return Expr::zero();
    }
    Expr::new(Node::Neg(a.clone()))
}

macro_rules! binop {
    ($trait:ident, $method:ident, $f:ident) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&self, &rhs)
            }
        }
        impl<'a> $trait<&'a Expr> for &'a Expr {
            type Output = Expr;
            fn $method(self, rhs: &'a Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl<'a> $trait<&'a Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &'a Expr) -> Expr {
                $f(&self, rhs)
            }
        }
        impl<'a> $trait<Expr> for &'a Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self, &rhs)
            }
        }
        impl $trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(&self, &Expr::real(rhs))
            }
        }
        impl $trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(&Expr::real(self), &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    names: &'a [String],
}

// Binding strength used to decide where parentheses are needed.
fn prec(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Const(c) if c.im != 0.0 || c.re < 0.0 => 2,
        _ => 5,
    }
}

fn fmt_const(c: C64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{:?}", c.re)
    } else if c.re == 0.0 {
        write!(f, "{:?}*i", c.im)
    } else {
        write!(f, "({:?} + {:?}*i)", c.re, c.im)
    }
}

impl ExprDisplay<'_> {
    fn sub<'b>(&'b self, e: &'b Expr) -> ExprDisplay<'b> {
        ExprDisplay {
            expr: e,
            names: self.names,
        }
    }

    fn wrapped(&self, e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if prec(e.node()) < min {
            write!(f, "({})", self.sub(e))
        } else {
            write!(f, "{}", self.sub(e))
        }
    }
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.expr.node() {
            Node::Const(c) => fmt_const(*c, f),
            Node::Coord(i) => match self.names.get(*i) {
                Some(n) => write!(f, "{n}"),
                None => write!(f, "x{}", i + 1),
            },
            Node::Add(a, b) => {
                self.wrapped(a, 1, f)?;
                write!(f, " + ")?;
                self.wrapped(b, 2, f)
            }
            Node::Sub(a, b) => {
                self.wrapped(a, 1, f)?;
                write!(f, " - ")?;
                self.wrapped(b, 2, f)
            }
            Node::Mul(a, b) => {
                self.wrapped(a, 2, f)?;
                write!(f, "*")?;
                self.wrapped(b, 3, f)
            }
            Node::Div(a, b) => {
                self.wrapped(a, 2, f)?;
                write!(f, "/")?;
                self.wrapped(b, 3, f)
            }
            Node::Pow(a, e) => {
                self.wrapped(a, 5, f)?;
                if e.is_integer() {
                    if e.halves >= 0 {
                        write!(f, "^{}", e.halves / 2)
                    } else {
                        write!(f, "^({})", e.halves / 2)
                    }
                } else {
                    write!(f, "^({}/2)", e.halves)
                }
            }
            Node::Neg(a) => {
                write!(f, "-")?;
                self.wrapped(a, 4, f)
            }
            Node::Sin(a) => write!(f, "sin({})", self.sub(a)),
            Node::Cos(a) => write!(f, "cos({})", self.sub(a)),
            Node::Exp(a) => write!(f, "exp({})", self.sub(a)),
            Node::Sqrt(a) => write!(f, "sqrt({})", self.sub(a)),
            Node::Bump { order: 0, arg } => write!(f, "bump({})", self.sub(arg)),
            Node::Bump { order, arg } => write!(f, "bump'{order}({})", self.sub(arg)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::coord(0)
    }
    fn y() -> Expr {
        Expr::coord(1)
    }
    fn z() -> Expr {
        Expr::coord(2)
    }
    fn xi() -> Expr {
        Expr::coord(3)
    }

    fn re(e: &Expr, pt: &[f64]) -> f64 {
        e.eval(pt).unwrap().re
    }

    #[test]
    fn eval_examples() {
        let e = x().powi(2) + y().powi(2);
        assert_eq!(re(&e, &[3.0, 4.0, 0.0, 0.0]), 25.0);
        let b = (z() - xi()).bump();
        assert_eq!(re(&b, &[0.0, 0.0, 5.0, 0.0]), 0.0);
        let g = (-x().powi(2)).exp();
        assert!((re(&g, &[1.0, 0.0, 0.0, 0.0]) - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn eval_errors() {
        let e = Expr::one() / x();
        assert!(matches!(e.eval(&[0.0]), Err(EvalError::Singularity(_))));
        let h = x().pow(Exponent::halves(1));
        assert!(matches!(h.eval(&[-1.0]), Err(EvalError::Domain(_))));
        assert_eq!(h.eval(&[4.0]).unwrap().re, 2.0);
        assert!(matches!(x().sqrt().eval(&[-2.0]), Err(EvalError::Domain(_))));
        assert!(matches!(
            y().eval(&[1.0]),
            Err(EvalError::PointDimension { .. })
        ));
    }

    #[test]
    fn diff_examples() {
        let pt = [0.3, -1.7, 0.9, 0.2];
        let d = (x() * y()).diff(0);
        assert_eq!(re(&d, &pt), pt[1]);
        let s = (z() - xi()).sin().diff(3);
        assert!((re(&s, &pt) + (pt[2] - pt[3]).cos()).abs() < 1e-15);
    }

    #[test]
    fn fd_examples() {
        let sq = x().powi(2);
        let v = sq.fd_diff(0, &[1.0, 0.0], 1e-3).unwrap();
        assert!((v.re - 2.0).abs() < 1e-9);
        let b = z().bump();
        assert_eq!(b.fd_diff(2, &[0.0, 0.0, 2.0, 0.0], 1e-3).unwrap().re, 0.0);
    }

    #[test]
    fn bump_zero_outside_support_with_derivatives() {
        let s = x().bump();
        let d1 = s.diff(0);
        let d2 = d1.diff(0);
        for &p in &[1.0, -1.0, 1.5, -3.0] {
            for e in [&s, &d1, &d2] {
                assert_eq!(re(e, &[p]), 0.0);
            }
        }
        // continuity approaching the boundary from inside
        for e in [&s, &d1, &d2] {
            assert!(re(e, &[1.0 - 1e-3]).abs() < 1e-12);
            assert!(re(e, &[-1.0 + 1e-3]).abs() < 1e-12);
        }
    }

    #[test]
    fn bump_derivatives_match_finite_differences() {
        // central differences of the closed-form profile as the independent route
        let h = 1e-5;
        for k in 0..4u8 {
            for &s in &[-0.8, -0.3, 0.0, 0.45, 0.9] {
                let fd = (bump_derivative(k, s + h) - bump_derivative(k, s - h)) / (2.0 * h);
                let exact = bump_derivative(k + 1, s);
                assert!(
                    (fd - exact).abs() < 1e-5 * (1.0 + exact.abs()),
                    "order {k} at {s}: fd {fd} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn imaginary_plane_wave() {
        let t = y();
        let psi = (Expr::imag_unit() * (2.0 * x() - 2.0 * t)).exp();
        let v = psi.eval(&[0.25, 0.0]).unwrap();
        assert!((v - C64::new(0.5f64.cos(), 0.5f64.sin())).norm() < 1e-15);
    }

    #[test]
    fn display_parenthesizes() {
        let names: Vec<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        let e = (x() + y()) * x().powi(2) - (-y()).exp();
        assert_eq!(e.display(&names).to_string(), "(x + y)*x^2 - exp(-y)");
    }
}
