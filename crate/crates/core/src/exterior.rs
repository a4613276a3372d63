//! Pointwise alternating algebra: wedge, interior product, Hodge star and
//! the metric isomorphism between forms and multivectors.
//!
//! Components live in a sparse map keyed by strictly increasing multi-indices.
//! The induced inner product on p-forms uses the determinant convention
//! `<dx^I, dx^K> = det[g^{i_a k_b}]` with no `1/p!`, and the volume form is
//! `sqrt|det g| dx^1 ∧ ... ∧ dx^n` in declared coordinate order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use crate::chart::{MetricAt, MAX_DIM};
use crate::error::{Error, Result};
use crate::expr::{Expr, C64};

/// A strictly increasing tuple of coordinate indices (0-based), stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex(u16);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u16;
        let mut prev: Option<usize> = None;
        for &i in indices {
            if i >= MAX_DIM {
                return Err(Error::Dimension(format!("index {i} exceeds chart bound")));
            }
            if prev.is_some_and(|p| i <= p) {
                return Err(Error::Degree(format!(
                    "multi-index {indices:?} is not strictly increasing"
                )));
            }
            mask |= 1 << i;
            prev = Some(i);
        }
        Ok(MultiIndex(mask))
    }

    pub fn single(i: usize) -> Self {
        MultiIndex(1 << i)
    }

    pub fn mask(self) -> u16 {
        self.0
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..16).filter(move |i| mask & (1 << i) != 0)
    }

    /// All multi-indices of degree `p` in an `n`-dimensional chart, canonically ordered.
    pub fn all(n: usize, p: usize) -> Vec<MultiIndex> {
        let mut v: Vec<MultiIndex> = (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == p)
            .map(|m| MultiIndex(m as u16))
            .collect();
        v.sort();
        v
    }

    pub fn complement(self, n: usize) -> MultiIndex {
        MultiIndex(!self.0 & ((1u32 << n) - 1) as u16)
    }

    /// Sign of the permutation sorting the concatenation (self, other), or
    /// `None` when they overlap.
    pub fn merge_sign(self, other: MultiIndex) -> Option<f64> {
        if self.0 & other.0 != 0 {
            return None;
        }
        let mut inversions = 0;
        for j in other.indices() {
            let above = !((1u32 << (j + 1)) - 1) as u16;
            inversions += (self.0 & above).count_ones();
        }
        Some(if inversions % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn union(self, other: MultiIndex) -> MultiIndex {
        MultiIndex(self.0 | other.0)
    }

    /// Position of `i` among the set's indices.
    fn position(self, i: usize) -> usize {
        (self.0 & ((1u16 << i) - 1)).count_ones() as usize
    }

    fn without(self, i: usize) -> MultiIndex {
        MultiIndex(self.0 & !(1 << i))
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        if self.0 == other.0 {
            return Ordering::Equal;
        }
        // lexicographic on sorted tuples: decided by the lowest index in the symmetric difference
        let diff = self.0 ^ other.0;
        let low = diff & diff.wrapping_neg();
        if self.0 & low != 0 {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<usize> = self.indices().map(|i| i + 1).collect();
        write!(f, "{v:?}")
    }
}

/// Coefficient ring for alternating tensors: numeric values or symbolic expressions.
pub trait Scalar: Clone + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: C64) -> Self;
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: C64) -> Self {
        self * c
    }
}

impl Scalar for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn one() -> Self {
        Expr::one()
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: C64) -> Self {
        if c == C64::new(1.0, 0.0) {
            self.clone()
        } else if c == C64::new(-1.0, 0.0) {
            -self
        } else {
            Expr::constant(c) * self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    /// p-forms, sections of Λᵖ(T*M)
    Covariant,
    /// p-vectors, sections of Λᵖ(TM)
    Contravariant,
}

impl Variance {
    pub fn flip(self) -> Self {
        match self {
            Variance::Covariant => Variance::Contravariant,
            Variance::Contravariant => Variance::Covariant,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AlternatingTensor<S> {
    dim: usize,
    degree: usize,
    variance: Variance,
    comps: BTreeMap<MultiIndex, S>,
}

pub type Form<S = C64> = AlternatingTensor<S>;

impl<S: Scalar> AlternatingTensor<S> {
    pub fn zero(dim: usize, degree: usize, variance: Variance) -> Self {
        AlternatingTensor {
            dim,
            degree,
            variance,
            comps: BTreeMap::new(),
        }
    }

    /// The scalar `s` as a degree-0 tensor.
    pub fn scalar(dim: usize, s: S) -> Self {
        let mut t = Self::zero(dim, 0, Variance::Covariant);
        t.set(MultiIndex::EMPTY, s);
        t
    }

    /// The basis element `dx^I` (or `∂_I`) with unit coefficient.
    pub fn basis(dim: usize, indices: &[usize], variance: Variance) -> Result<Self> {
        let idx = MultiIndex::from_indices(indices)?;
        if indices.iter().any(|&i| i >= dim) {
            return Err(Error::Dimension(format!(
                "basis index out of range for dimension {dim}"
            )));
        }
        let mut t = Self::zero(dim, idx.degree(), variance);
        t.set(idx, S::one());
        Ok(t)
    }

    pub fn from_components(
        dim: usize,
        degree: usize,
        variance: Variance,
        comps: impl IntoIterator<Item = (MultiIndex, S)>,
    ) -> Result<Self> {
        let mut t = Self::zero(dim, degree, variance);
        for (k, v) in comps {
            if k.degree() != degree || k.indices().any(|i| i >= dim) {
                return Err(Error::Degree(format!(
                    "component {k:?} does not fit degree {degree} in dimension {dim}"
                )));
            }
            t.add_to(k, &v);
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn with_variance(mut self, variance: Variance) -> Self {
        self.variance = variance;
        self
    }

    pub fn get(&self, idx: MultiIndex) -> S {
        self.comps.get(&idx).cloned().unwrap_or_else(S::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (&MultiIndex, &S)> {
        self.comps.iter()
    }

    pub fn set(&mut self, idx: MultiIndex, v: S) {
        if v.is_zero() {
            self.comps.remove(&idx);
        } else {
            self.comps.insert(idx, v);
        }
    }

    pub fn add_to(&mut self, idx: MultiIndex, v: &S) {
        if v.is_zero() {
            return;
        }
        let next = match self.comps.get(&idx) {
            Some(cur) => cur.add(v),
            None => v.clone(),
        };
        self.set(idx, next);
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Dense component vector in canonical multi-index order.
    pub fn dense(&self) -> Vec<S> {
        MultiIndex::all(self.dim, self.degree)
            .into_iter()
            .map(|k| self.get(k))
            .collect()
    }

    pub fn map<T: Scalar, E>(&self, mut f: impl FnMut(&S) -> Result<T, E>) -> Result<AlternatingTensor<T>, E> {
        let mut out = AlternatingTensor::zero(self.dim, self.degree, self.variance);
        for (k, v) in &self.comps {
            out.set(*k, f(v)?);
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "chart dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        if self.variance != other.variance {
            return Err(Error::Variance(format!(
                "{:?} vs {:?}",
                self.variance, other.variance
            )));
        }
        if self.degree != other.degree {
            return Err(Error::Degree(format!(
                "cannot add degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.add_to(*k, v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = Self::zero(self.dim, self.degree, self.variance);
        for (k, v) in &self.comps {
            out.set(*k, v.scale(c));
        }
        out
    }

    /// Multiplies every component by the scalar `s`.
    pub fn times(&self, s: &S) -> Self {
        let mut out = Self::zero(self.dim, self.degree, self.variance);
        for (k, v) in &self.comps {
            out.set(*k, s.mul(v));
        }
        out
    }

    /// Exterior product `self ∧ other`.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "chart dimensions {} and {}",
                self.dim, other.dim
            )));
        }
        if self.variance != other.variance {
            return Err(Error::Variance(format!(
                "wedge of {:?} and {:?}",
                self.variance, other.variance
            )));
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::Degree(format!(
                "wedge degree {} exceeds dimension {}",
                degree, self.dim
            )));
        }
        let mut out = Self::zero(self.dim, degree, self.variance);
        for (a, va) in &self.comps {
            for (b, vb) in &other.comps {
                if let Some(sign) = a.merge_sign(*b) {
                    out.add_to(a.union(*b), &va.mul(vb).scale(C64::new(sign, 0.0)));
                }
            }
        }
        Ok(out)
    }
}

/// Interior product `i(v) w` of a q-vector into a p-form.
///
/// On decomposable q-vectors `i(X1∧…∧Xq) = i(Xq)∘…∘i(X1)`; basis q-vectors
/// `∂_{k1}∧…∧∂_{kq}` (increasing) act by substituting `k1` first.
pub fn interior<S: Scalar>(v: &AlternatingTensor<S>, w: &AlternatingTensor<S>) -> Result<AlternatingTensor<S>> {
    if v.variance != Variance::Contravariant || w.variance != Variance::Covariant {
        return Err(Error::Variance(
            "interior product needs a multivector and a form".into(),
        ));
    }
    if v.dim != w.dim {
        return Err(Error::Dimension(format!(
            "chart dimensions {} and {}",
            v.dim, w.dim
        )));
    }
    if v.degree > w.degree {
        return Err(Error::Degree(format!(
            "cannot substitute a {}-vector into a {}-form",
            v.degree, w.degree
        )));
    }
    let mut out = AlternatingTensor::zero(w.dim, w.degree - v.degree, Variance::Covariant);
    for (k, vk) in &v.comps {
        for (i, wi) in &w.comps {
            if k.0 & i.0 != k.0 {
                continue;
            }
            let mut cur = *i;
            let mut flips = 0usize;
            for idx in k.indices() {
                flips += cur.position(idx);
                cur = cur.without(idx);
            }
            let sign = if flips.is_multiple_of(2) { 1.0 } else { -1.0 };
            out.add_to(cur, &vk.mul(wi).scale(C64::new(sign, 0.0)));
        }
    }
    Ok(out)
}

/// Determinant of the sub-matrix of `m` (row-major n×n) on rows `rows` and columns `cols`.
pub(crate) fn minor(m: &[f64], n: usize, rows: MultiIndex, cols: MultiIndex) -> f64 {
    let r: Vec<usize> = rows.indices().collect();
    let c: Vec<usize> = cols.indices().collect();
    let p = r.len();
    let mut a: Vec<f64> = Vec::with_capacity(p * p);
    for &i in &r {
        for &j in &c {
            a.push(m[i * n + j]);
        }
    }
    det_in_place(&mut a, p)
}

fn det_in_place(a: &mut [f64], p: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&x, &y| a[x * p + col].abs().total_cmp(&a[y * p + col].abs()))
            .unwrap();
        if a[pivot * p + col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..p {
                a.swap(pivot * p + k, col * p + k);
            }
            det = -det;
        }
        let d = a[col * p + col];
        det *= d;
        for row in col + 1..p {
            let f = a[row * p + col] / d;
            if f != 0.0 {
                for k in col..p {
                    a[row * p + k] -= f * a[col * p + k];
                }
            }
        }
    }
    det
}

fn check_metric<S>(w: &AlternatingTensor<S>, g: &MetricAt) -> Result<()> {
    if g.dim() != w.dim {
        return Err(Error::Dimension(format!(
            "metric dimension {} vs tensor dimension {}",
            g.dim(),
            w.dim
        )));
    }
    Ok(())
}

/// Raises (forms) or lowers (multivectors) every index with the metric.
pub fn tilde<S: Scalar>(w: &AlternatingTensor<S>, g: &MetricAt) -> Result<AlternatingTensor<S>> {
    check_metric(w, g)?;
    let n = w.dim;
    let m = match w.variance {
        Variance::Covariant => g.inv_matrix(),
        Variance::Contravariant => g.matrix(),
    };
    let mut out = AlternatingTensor::zero(n, w.degree, w.variance.flip());
    for i in MultiIndex::all(n, w.degree) {
        let mut acc = S::zero();
        for (k, v) in &w.comps {
            let c = minor(m, n, i, *k);
            if c != 0.0 {
                acc = acc.add(&v.scale(C64::new(c, 0.0)));
            }
        }
        out.set(i, acc);
    }
    Ok(out)
}

/// Hodge star of a p-form: the (n-p)-form with `α ∧ *β = <α,β> vol` for all α.
pub fn hodge<S: Scalar>(w: &AlternatingTensor<S>, g: &MetricAt) -> Result<AlternatingTensor<S>> {
    check_metric(w, g)?;
    if w.variance != Variance::Covariant {
        return Err(Error::Variance("Hodge star acts on forms".into()));
    }
    let n = w.dim;
    let vol = g.det().abs().sqrt();
    let mut out = AlternatingTensor::zero(n, n - w.degree, Variance::Covariant);
    for i in MultiIndex::all(n, w.degree) {
        let comp = i.complement(n);
        let eps = i.merge_sign(comp).expect("disjoint by construction");
        let mut acc = S::zero();
        for (k, v) in &w.comps {
            let c = minor(g.inv_matrix(), n, i, *k);
            if c != 0.0 {
                acc = acc.add(&v.scale(C64::new(c * eps * vol, 0.0)));
            }
        }
        out.add_to(comp, &acc);
    }
    Ok(out)
}

/// Induced inner product `<a, b>` of two forms of equal degree.
pub fn inner<S: Scalar>(a: &AlternatingTensor<S>, b: &AlternatingTensor<S>, g: &MetricAt) -> Result<S> {
    a.check_same_shape(b)?;
    check_metric(a, g)?;
    if a.variance != Variance::Covariant {
        return Err(Error::Variance("inner product expects forms".into()));
    }
    let mut acc = S::zero();
    for (i, va) in &a.comps {
        for (k, vb) in &b.comps {
            let c = minor(g.inv_matrix(), a.dim, *i, *k);
            if c != 0.0 {
                acc = acc.add(&va.mul(vb).scale(C64::new(c, 0.0)));
            }
        }
    }
    Ok(acc)
}

/// `g^{μν} a_μ b_ν` for two 1-forms.
pub fn metric_pairing<S: Scalar>(a: &AlternatingTensor<S>, b: &AlternatingTensor<S>, g: &MetricAt) -> Result<S> {
    if a.degree != 1 || b.degree != 1 {
        return Err(Error::Degree("metric pairing takes two 1-forms".into()));
    }
    inner(a, b, g)
}

/// Volume form `sqrt|det g| dx^1∧…∧dx^n`.
pub fn volume<S: Scalar>(g: &MetricAt) -> AlternatingTensor<S> {
    let n = g.dim();
    let mut out = AlternatingTensor::zero(n, n, Variance::Covariant);
    out.set(
        MultiIndex::all(n, n)[0],
        S::one().scale(C64::new(g.det().abs().sqrt(), 0.0)),
    );
    out
}
