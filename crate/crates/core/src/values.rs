//! Forms with values in a finite-dimensional vector space, and the bilinear
//! maps acting on those values.

use std::fmt;
use std::sync::Arc;

use crate::chart::MetricAt;
use crate::error::{Error, EvalError, Result};
use crate::expr::{Expr, C64};
use crate::exterior::{self, AlternatingTensor, MultiIndex, Scalar, Variance};

const LIE_TOL: f64 = 1e-12;

/// Structure constants `C^k_ij`, so that `[E_i, E_j] = C^k_ij E_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieStructure {
    dim: usize,
    c: Vec<f64>,
}

impl LieStructure {
    pub fn abelian(dim: usize) -> Self {
        LieStructure {
            dim,
            c: vec![0.0; dim * dim * dim],
        }
    }

    /// Sets exactly the listed constants `(i, j, k, C^k_ij)`; no symmetry is imposed.
    pub fn from_constants(dim: usize, entries: impl IntoIterator<Item = (usize, usize, usize, f64)>) -> Result<Self> {
        let mut l = LieStructure::abelian(dim);
        for (i, j, k, v) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Lie(format!("index out of range for dimension {dim}")));
            }
            let at = l.offset(i, j, k);
            l.c[at] = v;
        }
        Ok(l)
    }

    /// Builds from brackets `[E_i, E_j] = c E_k`, filling in `[E_j, E_i] = -c E_k`.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut l = LieStructure::abelian(dim);
        for &(i, j, k, v) in brackets {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Lie(format!("index out of range for dimension {dim}")));
            }
            if i == j {
                return Err(Error::Lie(format!("bracket [E{0},E{0}] must vanish", i + 1)));
            }
            let a = l.offset(i, j, k);
            let b = l.offset(j, i, k);
            l.c[a] += v;
            l.c[b] -= v;
        }
        Ok(l)
    }

    /// su(2) with `C^k_ij = ε_ijk`.
    pub fn su2() -> Self {
        LieStructure::from_brackets(3, &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
            .expect("static structure constants")
    }

    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dim + j) * self.dim + k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[self.offset(i, j, k)]
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }

    /// `[a, b]^k = C^k_ij a^i b^j`.
    pub fn bracket(&self, a: &[C64], b: &[C64]) -> Vec<C64> {
        let r = self.dim;
        let mut out = vec![C64::new(0.0, 0.0); r];
        for i in 0..r {
            for j in 0..r {
                let ab = a[i] * b[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = self.c(i, j, k);
                    if c != 0.0 {
                        *o += ab * c;
                    }
                }
            }
        }
        out
    }
}

/// Outcome of [`validate_lie`]; indices are 1-based `(i, j, k)` for `C^k_ij`.
#[derive(Debug, Clone, PartialEq)]
pub enum LieReport {
    Ok,
    Antisymmetry { i: usize, j: usize, k: usize, value: f64 },
    Jacobi { i: usize, j: usize, k: usize, l: usize, value: f64 },
}

impl LieReport {
    pub fn is_ok(&self) -> bool {
        matches!(self, LieReport::Ok)
    }
}

impl fmt::Display for LieReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieReport::Ok => write!(f, "ok"),
            LieReport::Antisymmetry { i, j, k, value } => write!(
                f,
                "antisymmetry violated at ({i},{j},{k}): C^{k}_{i}{j} + C^{k}_{j}{i} = {value}"
            ),
            LieReport::Jacobi { i, j, k, l, value } => {
                write!(f, "Jacobi identity violated at ({i},{j},{k}) component {l}: {value}")
            }
        }
    }
}

pub fn validate_lie(lie: &LieStructure) -> LieReport {
    let r = lie.dim;
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let s = lie.c(i, j, k) + lie.c(j, i, k);
                if s.abs() > LIE_TOL {
                    return LieReport::Antisymmetry {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                        value: s,
                    };
                }
            }
        }
    }
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                for l in 0..r {
                    let mut s = 0.0;
                    for m in 0..r {
                        s += lie.c(i, j, m) * lie.c(m, k, l)
                            + lie.c(j, k, m) * lie.c(m, i, l)
                            + lie.c(k, i, m) * lie.c(m, j, l);
                    }
                    if s.abs() > LIE_TOL {
                        return LieReport::Jacobi {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                            l: l + 1,
                            value: s,
                        };
                    }
                }
            }
        }
    }
    LieReport::Ok
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Generic,
    /// Values are tangent vectors; labels follow the chart coordinates.
    Tangent,
}

#[derive(Debug, PartialEq)]
struct SpaceInner {
    labels: Vec<String>,
    complex: bool,
    kind: SpaceKind,
    lie: Option<LieStructure>,
}

/// A finite-dimensional value space with a named basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSpace(Arc<SpaceInner>);

impl ValueSpace {
    pub fn new<S: Into<String>>(labels: impl IntoIterator<Item = S>, complex: bool) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Dimension("value space needs at least one basis label".into()));
        }
        for (a, l) in labels.iter().enumerate() {
            if labels[..a].contains(l) {
                return Err(Error::Dimension(format!("duplicate basis label `{l}`")));
            }
        }
        Ok(ValueSpace(Arc::new(SpaceInner {
            labels,
            complex,
            kind: SpaceKind::Generic,
            lie: None,
        })))
    }

    /// The trivial line bundle, basis label `1`.
    pub fn scalar() -> Self {
        ValueSpace::new(["1"], true).expect("one label")
    }

    /// Labels `E1..Er` with the given Lie structure.
    pub fn lie_algebra(lie: LieStructure) -> Self {
        let labels = (1..=lie.dim()).map(|i| format!("E{i}"));
        ValueSpace::new(labels, false)
            .expect("distinct labels")
            .with_lie(lie)
            .expect("matching dimension")
    }

    pub fn tangent(coord_names: &[String]) -> Self {
        let labels: Vec<String> = coord_names.iter().map(|n| format!("∂{n}")).collect();
        ValueSpace(Arc::new(SpaceInner {
            labels,
            complex: false,
            kind: SpaceKind::Tangent,
            lie: None,
        }))
    }

    pub fn with_lie(self, lie: LieStructure) -> Result<Self> {
        if lie.dim() != self.dim() {
            return Err(Error::Dimension(format!(
                "Lie structure of dimension {} on a space of dimension {}",
                lie.dim(),
                self.dim()
            )));
        }
        Ok(ValueSpace(Arc::new(SpaceInner {
            labels: self.0.labels.clone(),
            complex: self.0.complex,
            kind: self.0.kind,
            lie: Some(lie),
        })))
    }

    pub fn dim(&self) -> usize {
        self.0.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.0.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0.labels[i]
    }

    pub fn is_complex(&self) -> bool {
        self.0.complex
    }

    pub fn kind(&self) -> SpaceKind {
        self.0.kind
    }

    pub fn lie(&self) -> Option<&LieStructure> {
        self.0.lie.as_ref()
    }

    pub fn is_scalar(&self) -> bool {
        self.dim() == 1 && self.0.kind == SpaceKind::Generic
    }
}

/// `Σ_i parts[i] ⊗ E_i`: one alternating tensor per basis label.
#[derive(Debug, Clone)]
pub struct ValuedForm<S> {
    space: ValueSpace,
    parts: Vec<AlternatingTensor<S>>,
}

impl<S: Scalar> ValuedForm<S> {
    pub fn zero(space: ValueSpace, dim: usize, degree: usize, variance: Variance) -> Self {
        let parts = (0..space.dim())
            .map(|_| AlternatingTensor::zero(dim, degree, variance))
            .collect();
        ValuedForm { space, parts }
    }

    pub fn from_parts(space: ValueSpace, parts: Vec<AlternatingTensor<S>>) -> Result<Self> {
        if parts.len() != space.dim() {
            return Err(Error::Dimension(format!(
                "{} parts for a value space of dimension {}",
                parts.len(),
                space.dim()
            )));
        }
        if let Some(first) = parts.first() {
            for p in &parts[1..] {
                if p.dim() != first.dim() || p.degree() != first.degree() || p.variance() != first.variance() {
                    return Err(Error::Degree("value components have inconsistent shapes".into()));
                }
            }
        }
        Ok(ValuedForm { space, parts })
    }

    /// `t ⊗ 1`.
    pub fn scalar_valued(t: AlternatingTensor<S>) -> Self {
        ValuedForm {
            space: ValueSpace::scalar(),
            parts: vec![t],
        }
    }

    /// The constant function `1` as a 0-form.
    pub fn one(dim: usize) -> Self {
        ValuedForm::scalar_valued(AlternatingTensor::scalar(dim, S::one()))
    }

    pub fn space(&self) -> &ValueSpace {
        &self.space
    }

    pub fn parts(&self) -> &[AlternatingTensor<S>] {
        &self.parts
    }

    pub fn part(&self, i: usize) -> &AlternatingTensor<S> {
        &self.parts[i]
    }

    pub fn into_parts(self) -> Vec<AlternatingTensor<S>> {
        self.parts
    }

    pub fn dim(&self) -> usize {
        self.parts[0].dim()
    }

    pub fn degree(&self) -> usize {
        self.parts[0].degree()
    }

    pub fn variance(&self) -> Variance {
        self.parts[0].variance()
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.is_zero())
    }

    pub fn with_space(self, space: ValueSpace) -> Result<Self> {
        ValuedForm::from_parts(space, self.parts)
    }

    pub fn with_variance(self, variance: Variance) -> Self {
        ValuedForm {
            space: self.space,
            parts: self.parts.into_iter().map(|p| p.with_variance(variance)).collect(),
        }
    }

    pub fn map_parts(&self, f: impl FnMut(&AlternatingTensor<S>) -> Result<AlternatingTensor<S>>) -> Result<Self> {
        let parts = self.parts.iter().map(f).collect::<Result<Vec<_>>>()?;
        ValuedForm::from_parts(self.space.clone(), parts)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space {
            return Err(Error::Dimension("adding forms with different value spaces".into()));
        }
        let parts = self
            .parts
            .iter()
            .zip(&other.parts)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(ValuedForm {
            space: self.space.clone(),
            parts,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Self {
        ValuedForm {
            space: self.space.clone(),
            parts: self.parts.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Components flattened label-major, then in canonical multi-index order.
    pub fn dense(&self) -> Vec<S> {
        self.parts.iter().flat_map(|p| p.dense()).collect()
    }
}

impl ValuedForm<Expr> {
    pub fn eval(&self, pt: &[f64]) -> Result<ValuedForm<C64>, EvalError> {
        let parts = self
            .parts
            .iter()
            .map(|p| p.map(|e| e.eval(pt)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ValuedForm {
            space: self.space.clone(),
            parts,
        })
    }
}

/// A value-level bilinear map written out on basis pairs:
/// `φ(E_i, E_j) = Σ coeff · T_k` over `entries (i, j, k, coeff)`.
#[derive(Debug, Clone)]
pub struct BilinearTable {
    pub left: ValueSpace,
    pub right: ValueSpace,
    pub target: ValueSpace,
    pub entries: Vec<(usize, usize, usize, C64)>,
}

impl BilinearTable {
    pub fn apply(&self, a: &[C64], b: &[C64]) -> Result<Vec<C64>> {
        if a.len() != self.left.dim() || b.len() != self.right.dim() {
            return Err(Error::Dimension(format!(
                "value vectors of length {} and {} for a map on {}×{}",
                a.len(),
                b.len(),
                self.left.dim(),
                self.right.dim()
            )));
        }
        let mut out = vec![C64::new(0.0, 0.0); self.target.dim()];
        for &(i, j, k, c) in &self.entries {
            out[k] += a[i] * b[j] * c;
        }
        Ok(out)
    }
}

/// Value-level bilinear map φ.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiMap {
    /// Product with a scalar: one side must be the trivial space.
    FunctionProduct,
    /// `[E_i, E_j] = C^k_ij E_k`.
    LieBracket(LieStructure),
    /// Target `V∨V` with labels `Ei∨Ej`, `i ≤ j`.
    SymmetrizedProduct,
    /// `f(E_i, E_i) = E_i`, `f(E_i, E_j) = 0` for `i ≠ j`.
    DiagonalMap,
    /// `φ(Π, σ_i) = Π(σ_i)` with `Π(σ_i) = Σ_k Π[k][i] σ_k`; the left space is one-dimensional.
    EndomorphismAction(Vec<Vec<C64>>),
    /// `φ(ε^i⊗e_j, e_k) = δ^i_k e_j`; left labels `ε^i⊗e_j` in row-major `(i, j)` order.
    DiracPairing,
    /// Unevaluated brackets on labels `[Ei,Ej]`, `i < j`, kept only where `[E_i, E_j] ≠ 0`.
    FormalBracket(LieStructure),
}

impl PhiMap {
    pub fn name(&self) -> &'static str {
        match self {
            PhiMap::FunctionProduct => "product",
            PhiMap::LieBracket(_) => "bracket",
            PhiMap::SymmetrizedProduct => "symmetrized",
            PhiMap::DiagonalMap => "diagonal",
            PhiMap::EndomorphismAction(_) => "endomorphism",
            PhiMap::DiracPairing => "dirac",
            PhiMap::FormalBracket(_) => "formal_bracket",
        }
    }

    pub fn table(&self, left: &ValueSpace, right: &ValueSpace) -> Result<BilinearTable> {
        let one = C64::new(1.0, 0.0);
        let (target, entries) = match self {
            PhiMap::FunctionProduct => {
                if left.is_scalar() {
                    (right.clone(), (0..right.dim()).map(|j| (0, j, j, one)).collect())
                } else if right.is_scalar() {
                    (left.clone(), (0..left.dim()).map(|i| (i, 0, i, one)).collect())
                } else {
                    return Err(Error::Dimension(
                        "product of functions needs a scalar-valued factor".into(),
                    ));
                }
            }
            PhiMap::LieBracket(lie) => {
                let r = lie.dim();
                same_dim(left, right, r, "Lie bracket")?;
                let target = ValueSpace::new(left.labels().to_vec(), left.is_complex())?.with_lie(lie.clone())?;
                let mut e = Vec::new();
                for i in 0..r {
                    for j in 0..r {
                        for k in 0..r {
                            let c = lie.c(i, j, k);
                            if c != 0.0 {
                                e.push((i, j, k, C64::new(c, 0.0)));
                            }
                        }
                    }
                }
                (target, e)
            }
            PhiMap::SymmetrizedProduct => {
                let r = left.dim();
                same_dim(left, right, r, "symmetrized product")?;
                let mut labels = Vec::new();
                let mut pos = vec![vec![0usize; r]; r];
                for i in 0..r {
                    for j in i..r {
                        pos[i][j] = labels.len();
                        pos[j][i] = labels.len();
                        labels.push(format!("{}∨{}", left.label(i), left.label(j)));
                    }
                }
                let target = ValueSpace::new(labels, left.is_complex() || right.is_complex())?;
                let mut e = Vec::new();
                for (i, row) in pos.iter().enumerate() {
                    for (j, k) in row.iter().enumerate() {
                        e.push((i, j, *k, one));
                    }
                }
                (target, e)
            }
            PhiMap::DiagonalMap => {
                let r = left.dim();
                same_dim(left, right, r, "diagonal map")?;
                let target = ValueSpace::new(left.labels().to_vec(), left.is_complex())?;
                (target, (0..r).map(|i| (i, i, i, one)).collect())
            }
            PhiMap::EndomorphismAction(pi) => {
                let r = right.dim();
                if left.dim() != 1 {
                    return Err(Error::Dimension("endomorphism action needs a one-dimensional left factor".into()));
                }
                if pi.len() != r || pi.iter().any(|row| row.len() != r) {
                    return Err(Error::Dimension(format!("endomorphism must be {r}×{r}")));
                }
                let mut e = Vec::new();
                for (k, row) in pi.iter().enumerate() {
                    for (i, c) in row.iter().enumerate() {
                        if *c != C64::new(0.0, 0.0) {
                            e.push((0, i, k, *c));
                        }
                    }
                }
                (right.clone(), e)
            }
            PhiMap::DiracPairing => {
                let r = right.dim();
                if left.dim() != r * r {
                    return Err(Error::Dimension(format!(
                        "Dirac pairing needs {} endomorphism labels for a {r}-dimensional space",
                        r * r
                    )));
                }
                let mut e = Vec::new();
                for i in 0..r {
                    for j in 0..r {
                        e.push((i * r + j, i, j, one));
                    }
                }
                (right.clone(), e)
            }
            PhiMap::FormalBracket(lie) => {
                let r = lie.dim();
                same_dim(left, right, r, "formal bracket")?;
                let mut labels = Vec::new();
                let mut e = Vec::new();
                for i in 0..r {
                    for j in (i + 1)..r {
                        if (0..r).all(|k| lie.c(i, j, k) == 0.0) {
                            continue;
                        }
                        let k = labels.len();
                        labels.push(format!("[{},{}]", left.label(i), left.label(j)));
                        e.push((i, j, k, one));
                        e.push((j, i, k, -one));
                    }
                }
                if labels.is_empty() {
                    return Err(Error::Lie("formal bracket on an abelian algebra has no labels".into()));
                }
                (ValueSpace::new(labels, left.is_complex())?, e)
            }
        };
        Ok(BilinearTable {
            left: left.clone(),
            right: right.clone(),
            target,
            entries,
        })
    }
}

fn same_dim(left: &ValueSpace, right: &ValueSpace, r: usize, what: &str) -> Result<()> {
    if left.dim() != r || right.dim() != r {
        return Err(Error::Dimension(format!(
            "{what} on spaces of dimension {} and {}, expected {r}",
            left.dim(),
            right.dim()
        )));
    }
    Ok(())
}

/// `φ(a, b)` for value vectors `a ∈ left`, `b ∈ right`.
pub fn apply_phi(m: &PhiMap, left: &ValueSpace, a: &[C64], right: &ValueSpace, b: &[C64]) -> Result<(ValueSpace, Vec<C64>)> {
    let t = m.table(left, right)?;
    let v = t.apply(a, b)?;
    Ok((t.target, v))
}

/// Form-level bilinear map Φ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormPairing {
    /// `Φ(f, β) = f β` with `f` a 0-form.
    ScalarMultiply,
    /// `Φ(α, β) = α ∧ β`.
    Wedge,
    /// `Φ(X, β) = i(X) β` with `X` a multivector.
    Interior,
    /// `Φ(α, β) = i(α̃) β` with the metric isomorphism taken at the point.
    InteriorAfterTilde,
    /// `Φ(α, β) = <α, β>_g`, the induced metric on p-forms.
    MetricPairing,
    /// Contracts the form index of a tangent-valued 1-form with its value index,
    /// then multiplies by the 0-form `f`.
    Trace,
}

impl FormPairing {
    pub fn name(self) -> &'static str {
        match self {
            FormPairing::ScalarMultiply => "product",
            FormPairing::Wedge => "wedge",
            FormPairing::Interior => "interior",
            FormPairing::InteriorAfterTilde => "interior_tilde",
            FormPairing::MetricPairing => "metric",
            FormPairing::Trace => "trace",
        }
    }

    pub fn needs_metric(self) -> bool {
        matches!(self, FormPairing::InteriorAfterTilde | FormPairing::MetricPairing)
    }

    /// Degree and variance of `Φ(a, b)` without evaluating anything.
    pub fn output_shape(
        self,
        a: (usize, Variance),
        b: (usize, Variance),
        dim: usize,
    ) -> Result<(usize, Variance)> {
        use Variance::*;
        let (pa, va) = a;
        let (pb, vb) = b;
        let need = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(Error::Degree(msg.to_string())) };
        match self {
            FormPairing::ScalarMultiply => {
                need(pa == 0, "scalar multiplication needs a 0-form on the left")?;
                Ok((pb, vb))
            }
            FormPairing::Wedge => {
                if va != vb {
                    return Err(Error::Variance("wedge of a form and a multivector".into()));
                }
                need(pa + pb <= dim, "wedge degree exceeds the chart dimension")?;
                Ok((pa + pb, va))
            }
            FormPairing::Interior => {
                if va != Contravariant || vb != Covariant {
                    return Err(Error::Variance("interior product needs a multivector and a form".into()));
                }
                need(pa <= pb, "multivector degree exceeds form degree")?;
                Ok((pb - pa, Covariant))
            }
            FormPairing::InteriorAfterTilde => {
                if va != Covariant || vb != Covariant {
                    return Err(Error::Variance("interior after tilde needs two forms".into()));
                }
                need(pa <= pb, "form degree exceeds the degree it is substituted into")?;
                Ok((pb - pa, Covariant))
            }
            FormPairing::MetricPairing => {
                if va != vb {
                    return Err(Error::Variance("metric pairing of different variances".into()));
                }
                need(pa == pb, "metric pairing needs equal degrees")?;
                Ok((0, Covariant))
            }
            FormPairing::Trace => {
                need(pa == 0, "trace pairing needs a 0-form on the left")?;
                need(pb == 1 && vb == Covariant, "trace needs a tangent-valued 1-form")?;
                Ok((0, Covariant))
            }
        }
    }

    pub fn apply<S: Scalar>(
        self,
        a: &AlternatingTensor<S>,
        b: &AlternatingTensor<S>,
        g: Option<&MetricAt>,
    ) -> Result<AlternatingTensor<S>> {
        let metric = || g.ok_or_else(|| Error::Unsupported("pairing needs a metric at the point".into()));
        match self {
            FormPairing::ScalarMultiply | FormPairing::Trace => {
                if a.degree() != 0 {
                    return Err(Error::Degree("scalar multiplication needs a 0-form on the left".into()));
                }
                Ok(b.times(&a.get(MultiIndex::EMPTY)))
            }
            FormPairing::Wedge => a.wedge(b),
            FormPairing::Interior => exterior::interior(a, b),
            FormPairing::InteriorAfterTilde => {
                if a.variance() != Variance::Covariant {
                    return Err(Error::Variance("interior after tilde needs a form".into()));
                }
                exterior::interior(&exterior::tilde(a, metric()?)?, b)
            }
            FormPairing::MetricPairing => {
                let v = exterior::inner(a, b, metric()?)?;
                Ok(AlternatingTensor::scalar(a.dim(), v))
            }
        }
    }
}

/// Contracts a tangent-valued 1-form: `Σ_μ B^μ_μ`.
pub fn trace_tangent<S: Scalar>(b: &ValuedForm<S>) -> Result<ValuedForm<S>> {
    let n = b.dim();
    if b.space().kind() != SpaceKind::Tangent || b.space().dim() != n {
        return Err(Error::Dimension("trace needs values in the tangent space of the chart".into()));
    }
    if b.degree() != 1 || b.variance() != Variance::Covariant {
        return Err(Error::Degree("trace needs a 1-form".into()));
    }
    let mut s = S::zero();
    for (mu, part) in b.parts().iter().enumerate() {
        s = s.add(&part.get(MultiIndex::single(mu)));
    }
    Ok(ValuedForm::scalar_valued(AlternatingTensor::scalar(n, s)))
}

/// `Σ_{i,j} Φ(a^i, b^j) ⊗ φ(E_i, E_j)` expanded in the target basis.
pub fn lift_pointwise<S: Scalar>(
    pairing: FormPairing,
    phi: &PhiMap,
    a: &ValuedForm<S>,
    b: &ValuedForm<S>,
    g: Option<&MetricAt>,
) -> Result<ValuedForm<S>> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!("chart dimensions {} and {}", a.dim(), b.dim())));
    }
    let traced;
    let (pairing, b) = if pairing == FormPairing::Trace {
        traced = trace_tangent(b)?;
        (FormPairing::ScalarMultiply, &traced)
    } else {
        (pairing, b)
    };
    let table = phi.table(a.space(), b.space())?;
    let (degree, variance) = pairing.output_shape(
        (a.degree(), a.variance()),
        (b.degree(), b.variance()),
        a.dim(),
    )?;
    let mut out = ValuedForm::zero(table.target.clone(), a.dim(), degree, variance);
    let mut cache: Vec<Option<AlternatingTensor<S>>> = vec![None; a.space().dim() * b.space().dim()];
    for &(i, j, k, c) in &table.entries {
        let slot = i * b.space().dim() + j;
        if cache[slot].is_none() {
            cache[slot] = Some(pairing.apply(a.part(i), b.part(j), g)?);
        }
        let term = cache[slot].as_ref().expect("filled above").scale(c);
        out.parts[k] = out.parts[k].add(&term)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn su2_bracket_of_basis() {
        let lie = LieStructure::su2();
        let g = ValueSpace::lie_algebra(lie.clone());
        let e1 = [c(1.0), c(0.0), c(0.0)];
        let e2 = [c(0.0), c(1.0), c(0.0)];
        let (_, v) = apply_phi(&PhiMap::LieBracket(lie), &g, &e1, &g, &e2).unwrap();
        assert_eq!(v, vec![c(0.0), c(0.0), c(1.0)]);
    }

    #[test]
    fn diagonal_map_examples() {
        let v = ValueSpace::new(["E1", "E2"], false).unwrap();
        let e1 = [c(1.0), c(0.0)];
        let e2 = [c(0.0), c(1.0)];
        let (_, x) = apply_phi(&PhiMap::DiagonalMap, &v, &e1, &v, &e2).unwrap();
        assert_eq!(x, vec![c(0.0), c(0.0)]);
        let (_, y) = apply_phi(&PhiMap::DiagonalMap, &v, &e1, &v, &e1).unwrap();
        assert_eq!(y, vec![c(1.0), c(0.0)]);
    }

    #[test]
    fn symmetrized_labels_and_coefficients() {
        let v = ValueSpace::new(["e1", "e2"], false).unwrap();
        let a = [c(2.0), c(3.0)];
        let b = [c(5.0), c(7.0)];
        let (t, x) = apply_phi(&PhiMap::SymmetrizedProduct, &v, &a, &v, &b).unwrap();
        assert_eq!(t.labels(), ["e1∨e1", "e1∨e2", "e2∨e2"]);
        assert_eq!(x, vec![c(10.0), c(2.0 * 7.0 + 3.0 * 5.0), c(21.0)]);
    }

    #[test]
    fn validate_lie_examples() {
        assert!(validate_lie(&LieStructure::su2()).is_ok());
        assert!(validate_lie(&LieStructure::abelian(4)).is_ok());
        let bad = LieStructure::from_constants(2, [(0, 1, 0, 1.0), (1, 0, 0, 1.0)]).unwrap();
        match validate_lie(&bad) {
            LieReport::Antisymmetry { i, j, k, .. } => assert_eq!((i, j, k), (1, 2, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobi_violation_detected() {
        // antisymmetric but not a Lie algebra: [E1,E2]=E1, [E2,E3]=E1, [E3,E1]=E2
        let lie = LieStructure::from_brackets(3, &[(0, 1, 0, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).unwrap();
        assert!(matches!(validate_lie(&lie), LieReport::Jacobi { .. }));
    }

    #[test]
    fn formal_bracket_only_nonzero_pairs() {
        let lie = LieStructure::from_brackets(3, &[(0, 1, 2, 1.0)]).unwrap();
        let g = ValueSpace::lie_algebra(lie.clone());
        let t = PhiMap::FormalBracket(lie).table(&g, &g).unwrap();
        assert_eq!(t.target.labels(), ["[E1,E2]"]);
    }

    #[test]
    fn lift_identity_law() {
        let n = 3;
        let mut t = AlternatingTensor::<C64>::zero(n, 2, Variance::Covariant);
        t.set(MultiIndex::from_indices(&[0, 2]).unwrap(), c(4.0));
        let v = ValueSpace::new(["e1", "e2"], false).unwrap();
        let b = ValuedForm::from_parts(v, vec![t.clone(), t.scale(c(-2.0))]).unwrap();
        let one = ValuedForm::<C64>::one(n);
        let out = lift_pointwise(FormPairing::ScalarMultiply, &PhiMap::FunctionProduct, &one, &b, None).unwrap();
        assert_eq!(out.dense(), b.dense());
    }
}
