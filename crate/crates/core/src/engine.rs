//! General Rule conditions: `Φ(σ, Dσ̃) ⊗ φ(τ₁, τ₂) = 0`, bound into residual
//! fields and evaluated over sample sets.

use indexmap::IndexMap;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{Chart, MetricAt};
use crate::diffops::forms::{covariant_d, exterior_d, ConnectionForm};
use crate::diffops::quantum::{schrodinger_apply, GammaSystem, HamiltonianSpec};
use crate::diffops::riemann::riemann_at;
use crate::diffops::vector::{ProjectedLie, VectorField};
use crate::error::{Error, Result};
use crate::expr::{Expr, C64};
use crate::exterior::{self, AlternatingTensor, Form, MultiIndex, Variance};
use crate::sample::SampleSet;
use crate::values::{lift_pointwise, FormPairing, PhiMap, SpaceKind, ValueSpace, ValuedForm};

/// Default tolerance for symbolic pipelines.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Threshold below which a 2-form counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The differential operator `D`.
#[derive(Debug, Clone)]
pub enum Operator {
    Identity,
    ExteriorD,
    Covariant(ConnectionForm),
    /// Levi-Civita derivative of a tangent-valued 0-form, giving a tangent-valued 1-form.
    Nabla,
    /// `Y ↦ π(L_X Y)` on a tangent-valued 0-form `Y`.
    ProjectedLie { pi: Vec<Vec<Expr>>, x: Vec<Expr> },
    /// `iħ∂_t - H` on a scalar 0-form.
    Schrodinger(HamiltonianSpec),
    /// `i d - eA ± ½ m γ⁻¹` on a C⁴-valued 0-form.
    Dirac(GammaSystem),
    /// Ricci tensor of the chart metric minus `λg`; pairs only with `Trace`.
    Riemann { lambda: f64 },
    /// `d(ω⁻¹(α, β))` computed from pointwise jets.
    PoissonGradient {
        omega: Form<Expr>,
        alpha: Form<Expr>,
        beta: Form<Expr>,
    },
}

impl Operator {
    pub fn name(&self) -> &'static str {
        match self {
            Operator::Identity => "id",
            Operator::ExteriorD => "d",
            Operator::Covariant(_) => "D",
            Operator::Nabla => "nabla",
            Operator::ProjectedLie { .. } => "projected_lie",
            Operator::Schrodinger(_) => "schrodinger",
            Operator::Dirac(_) => "dirac",
            Operator::Riemann { .. } => "riemann",
            Operator::PoissonGradient { .. } => "poisson_gradient",
        }
    }

    pub fn from_name(name: &str) -> Result<Operator> {
        match name {
            "id" => Ok(Operator::Identity),
            "d" => Ok(Operator::ExteriorD),
            "nabla" => Ok(Operator::Nabla),
            "riemann" => Ok(Operator::Riemann { lambda: 0.0 }),
            other => Err(Error::UnknownOperator(other.to_string())),
        }
    }
}

/// One summand `coeff · Φ(σ, Dσ̃) ⊗ φ(τ₁, τ₂)`.
#[derive(Debug, Clone)]
pub struct Term {
    pub pairing: FormPairing,
    pub phi: PhiMap,
    pub op: Operator,
    pub sigma: ValuedForm<Expr>,
    pub sigma_tilde: ValuedForm<Expr>,
    pub coeff: C64,
    /// When set, every value component of this term is reported under one label.
    pub label: Option<String>,
    /// Records how σ was obtained from σ̃, if it was.
    pub derived: Option<String>,
}

impl Term {
    pub fn new(pairing: FormPairing, phi: PhiMap, op: Operator, sigma: ValuedForm<Expr>, sigma_tilde: ValuedForm<Expr>) -> Self {
        Term {
            pairing,
            phi,
            op,
            sigma,
            sigma_tilde,
            coeff: C64::new(1.0, 0.0),
            label: None,
            derived: None,
        }
    }

    pub fn coeff(mut self, c: f64) -> Self {
        self.coeff = C64::new(c, 0.0);
        self
    }

    pub fn label(mut self, l: impl Into<String>) -> Self {
        self.label = Some(l.into());
        self
    }

    pub fn derived(mut self, rule: impl Into<String>) -> Self {
        self.derived = Some(rule.into());
        self
    }
}

#[derive(Debug, Clone)]
pub enum Guard {
    /// Excludes points where the 2-form has `|det| < 1e-12`.
    Nondegenerate2Form(Form<Expr>),
}

/// Unbound description of a condition.
#[derive(Debug, Clone)]
pub struct ConditionSpec {
    pub name: String,
    pub chart: Chart,
    pub terms: Vec<Term>,
    /// Subtracted from the output with the same value labels.
    pub rhs: Option<ValuedForm<Expr>>,
    pub guards: Vec<Guard>,
}

impl ConditionSpec {
    pub fn new(name: impl Into<String>, chart: &Chart) -> Self {
        ConditionSpec {
            name: name.into(),
            chart: chart.clone(),
            terms: Vec::new(),
            rhs: None,
            guards: Vec::new(),
        }
    }

    pub fn term(mut self, t: Term) -> Self {
        self.terms.push(t);
        self
    }

    pub fn rhs(mut self, r: ValuedForm<Expr>) -> Self {
        self.rhs = Some(r);
        self
    }

    pub fn guard(mut self, g: Guard) -> Self {
        self.guards.push(g);
        self
    }
}

#[derive(Debug, Clone)]
enum Prepared {
    Symbolic(ValuedForm<Expr>),
    Nabla { field: VectorField, space: ValueSpace },
    Projected { op: ProjectedLie, bracket: Vec<Expr>, space: ValueSpace },
    Ricci(f64),
    Poisson(Box<PoissonJets>),
}

#[derive(Debug, Clone)]
struct PoissonJets {
    n: usize,
    omega: Vec<Expr>,
    domega: Vec<Vec<Expr>>,
    alpha: Vec<Expr>,
    dalpha: Vec<Vec<Expr>>,
    beta: Vec<Expr>,
    dbeta: Vec<Vec<Expr>>,
}

#[derive(Debug, Clone)]
struct BoundTerm {
    pairing: FormPairing,
    phi: PhiMap,
    sigma: ValuedForm<Expr>,
    prepared: Prepared,
    coeff: C64,
    /// For each target value index, the output block and offset inside it.
    routes: Vec<(usize, usize)>,
}

/// One reported output label.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputBlock {
    pub label: String,
    pub degree: usize,
    pub len: usize,
}

#[derive(Debug, Clone)]
struct BoundGuard {
    n: usize,
    comps: Vec<(usize, usize, Expr)>,
}

/// A validated, immutable condition ready for evaluation.
#[derive(Debug, Clone)]
pub struct GrCondition {
    name: String,
    chart: Chart,
    terms: Vec<BoundTerm>,
    blocks: Vec<OutputBlock>,
    rhs: Vec<(usize, Vec<Expr>)>,
    guards: Vec<BoundGuard>,
    needs_metric: bool,
}

struct Shape {
    degree: usize,
    variance: Variance,
    space: ValueSpace,
}

fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn scalar_parts(s: &ValuedForm<Expr>, what: &str) -> Result<Vec<Expr>> {
    if s.degree() != 0 {
        return Err(Error::Degree(format!("{what} must be a 0-form")));
    }
    Ok(s.parts().iter().map(|p| p.get(MultiIndex::EMPTY)).collect())
}

fn tangent_check(s: &ValuedForm<Expr>, n: usize, what: &str) -> Result<()> {
    if s.space().kind() != SpaceKind::Tangent || s.space().dim() != n {
        return Err(Error::Dimension(format!("{what} must take values in the tangent space")));
    }
    Ok(())
}

fn prepare(op: &Operator, st: &ValuedForm<Expr>, chart: &Chart) -> Result<(Prepared, Shape)> {
    let n = chart.dim();
    if st.dim() != n {
        return Err(Error::Dimension(format!(
            "section lives on a {}-chart, condition on a {n}-chart",
            st.dim()
        )));
    }
    let shape_of = |v: &ValuedForm<Expr>| Shape {
        degree: v.degree(),
        variance: v.variance(),
        space: v.space().clone(),
    };
    Ok(match op {
        Operator::Identity => (Prepared::Symbolic(st.clone()), shape_of(st)),
        Operator::ExteriorD => {
            let v = exterior_d(st)?;
            let s = shape_of(&v);
            (Prepared::Symbolic(v), s)
        }
        Operator::Covariant(conn) => {
            let v = covariant_d(conn, st)?;
            let s = shape_of(&v);
            (Prepared::Symbolic(v), s)
        }
        Operator::Nabla => {
            tangent_check(st, n, "nabla argument")?;
            let comps = scalar_parts(st, "nabla argument")?;
            let space = st.space().clone();
            (
                Prepared::Nabla {
                    field: VectorField::new(comps),
                    space: space.clone(),
                },
                Shape {
                    degree: 1,
                    variance: Variance::Covariant,
                    space,
                },
            )
        }
        Operator::ProjectedLie { pi, x } => {
            tangent_check(st, n, "projected Lie argument")?;
            let y = scalar_parts(st, "projected Lie argument")?;
            let op = ProjectedLie::new(pi.clone(), x.clone())?;
            let bracket = op.bracket_with(&y)?;
            let space = st.space().clone();
            (
                Prepared::Projected {
                    op,
                    bracket,
                    space: space.clone(),
                },
                Shape {
                    degree: 0,
                    variance: Variance::Covariant,
                    space,
                },
            )
        }
        Operator::Schrodinger(h) => {
            let psi = scalar_parts(st, "wave function")?;
            if psi.len() != 1 {
                return Err(Error::Dimension("wave function must be scalar-valued".into()));
            }
            let r = schrodinger_apply(h, &psi[0], n)?;
            let v = ValuedForm::from_parts(st.space().clone(), vec![AlternatingTensor::scalar(n, r)])?;
            let s = shape_of(&v);
            (Prepared::Symbolic(v), s)
        }
        Operator::Dirac(gs) => {
            if n != 4 {
                return Err(Error::Dimension("Dirac operator needs a 4-chart".into()));
            }
            let psi = scalar_parts(st, "spinor")?;
            if psi.len() != 4 {
                return Err(Error::Dimension("spinor must have 4 components".into()));
            }
            let v = dirac_operator(gs, &psi, st.space())?;
            let s = shape_of(&v);
            (Prepared::Symbolic(v), s)
        }
        Operator::Riemann { lambda } => (
            Prepared::Ricci(*lambda),
            Shape {
                degree: 0,
                variance: Variance::Covariant,
                space: ValueSpace::scalar(),
            },
        ),
        Operator::PoissonGradient { omega, alpha, beta } => {
            if omega.degree() != 2 || alpha.degree() != 1 || beta.degree() != 1 {
                return Err(Error::Degree("Poisson bracket needs a 2-form and two 1-forms".into()));
            }
            if omega.dim() != n || alpha.dim() != n || beta.dim() != n {
                return Err(Error::Dimension("Poisson inputs live on another chart".into()));
            }
            let mut om = vec![Expr::zero(); n * n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let c = omega.get(MultiIndex::from_indices(&[i, j])?);
                    om[i * n + j] = c.clone();
                    om[j * n + i] = -c;
                }
            }
            let one_form = |f: &Form<Expr>| -> Vec<Expr> { (0..n).map(|i| f.get(MultiIndex::single(i))).collect() };
            let jets = |v: &[Expr]| -> Vec<Vec<Expr>> { (0..n).map(|a| v.iter().map(|e| e.diff(a)).collect()).collect() };
            let (a, b) = (one_form(alpha), one_form(beta));
            let p = PoissonJets {
                n,
                domega: jets(&om),
                dalpha: jets(&a),
                dbeta: jets(&b),
                omega: om,
                alpha: a,
                beta: b,
            };
            (
                Prepared::Poisson(Box::new(p)),
                Shape {
                    degree: 1,
                    variance: Variance::Covariant,
                    space: ValueSpace::scalar(),
                },
            )
        }
    })
}

/// `i dψ^k ⊗ e_k + c·½ m (γ_ν⁻¹)^s_r ψ^r dx^ν ⊗ e_s - e A_ν ψ^k dx^ν ⊗ e_k`.
fn dirac_operator(gs: &GammaSystem, psi: &[Expr], space: &ValueSpace) -> Result<ValuedForm<Expr>> {
    let half_m = 0.5 * gs.mass * gs.sign.operator_coefficient();
    let mut parts = Vec::with_capacity(4);
    for s in 0..4 {
        let mut comps = Vec::new();
        for nu in 0..4 {
            let mut e = Expr::constant(C64::new(0.0, 1.0)) * psi[s].diff(nu);
            for (r, pr) in psi.iter().enumerate() {
                let c = gs.inverse(nu)[s][r];
                if c != C64::new(0.0, 0.0) {
                    e = e + Expr::constant(c * half_m) * pr;
                }
            }
            if let Some(a) = &gs.potential {
                let anu = a.get(MultiIndex::single(nu));
                e = e - Expr::real(gs.charge) * anu * &psi[s];
            }
            comps.push((MultiIndex::single(nu), e));
        }
        parts.push(AlternatingTensor::from_components(4, 1, Variance::Covariant, comps)?);
    }
    ValuedForm::from_parts(space.clone(), parts)
}

/// The section `γ = γ^j_{μi} dx^μ ⊗ (ε^i ⊗ e_j)` with labels `ε^i⊗e_j` in row-major `(i, j)` order.
pub fn gamma_section(gs: &GammaSystem, spinor: &ValueSpace) -> Result<ValuedForm<Expr>> {
    let labels: Vec<String> = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| format!("ε{}⊗{}", i + 1, spinor.label(j)))
        .collect();
    let space = ValueSpace::new(labels, true)?;
    let mut parts = Vec::with_capacity(16);
    for i in 0..4 {
        for j in 0..4 {
            let comps = (0..4)
                .map(|mu| (MultiIndex::single(mu), Expr::constant(gs.lower(mu)[j][i])))
                .collect::<Vec<_>>();
            parts.push(AlternatingTensor::from_components(4, 1, Variance::Covariant, comps)?);
        }
    }
    ValuedForm::from_parts(space, parts)
}

/// Symbolic Hodge star per value component; needs a constant metric.
pub fn hodge_symbolic(f: &ValuedForm<Expr>, chart: &Chart) -> Result<ValuedForm<Expr>> {
    let g = chart.metric().constant().ok_or_else(|| {
        Error::Unsupported("symbolic Hodge star needs a constant metric".into())
    })?;
    f.map_parts(|p| exterior::hodge(p, &g))
}

/// Lowers a tangent vector field symbolically: `u_μ = g_{μν} u^ν`.
pub fn lower_symbolic(u: &Form<Expr>, chart: &Chart) -> Result<Form<Expr>> {
    if u.degree() != 1 || u.variance() != Variance::Contravariant {
        return Err(Error::Variance("lowering expects a vector field".into()));
    }
    let n = chart.dim();
    let m = chart.metric();
    let comps = (0..n)
        .map(|mu| {
            let mut acc = Expr::zero();
            for nu in 0..n {
                let g = m.entry(mu, nu);
                if !g.is_zero() {
                    acc = acc + g * u.get(MultiIndex::single(nu));
                }
            }
            (MultiIndex::single(mu), acc)
        })
        .collect::<Vec<_>>();
    AlternatingTensor::from_components(n, 1, Variance::Covariant, comps)
}

fn block_index(blocks: &mut Vec<OutputBlock>, label: &str, degree: usize, len: usize) -> Result<usize> {
    if let Some(i) = blocks.iter().position(|b| b.label == label) {
        let b = &blocks[i];
        if b.len != len || b.degree != degree {
            return Err(Error::Degree(format!(
                "terms summed into `{label}` have different shapes"
            )));
        }
        return Ok(i);
    }
    blocks.push(OutputBlock {
        label: label.to_string(),
        degree,
        len,
    });
    Ok(blocks.len() - 1)
}

pub fn bind(spec: ConditionSpec) -> Result<GrCondition> {
    let chart = spec.chart;
    let n = chart.dim();
    if spec.terms.is_empty() {
        return Err(Error::InvalidParameter {
            name: "terms".into(),
            reason: "condition has no terms".into(),
        });
    }
    let mut blocks: Vec<OutputBlock> = Vec::new();
    let mut terms = Vec::with_capacity(spec.terms.len());
    let mut needs_metric = false;
    for t in spec.terms {
        if t.sigma.dim() != n {
            return Err(Error::Dimension(format!(
                "σ lives on a {}-chart, condition on a {n}-chart",
                t.sigma.dim()
            )));
        }
        let (prepared, dshape) = prepare(&t.op, &t.sigma_tilde, &chart)?;
        let (degree, len_per_value, target) = if let Prepared::Ricci(_) = prepared {
            if t.pairing != FormPairing::Trace {
                return Err(Error::Degree("the Riemann operator pairs only with the trace".into()));
            }
            if t.sigma.degree() != 0 {
                return Err(Error::Degree("trace of the Riemann tensor needs a 0-form σ".into()));
            }
            let table = t.phi.table(t.sigma.space(), &ValueSpace::scalar())?;
            (0, n * (n + 1) / 2, table.target)
        } else {
            let right_space = if t.pairing == FormPairing::Trace {
                if dshape.space.kind() != SpaceKind::Tangent {
                    return Err(Error::Dimension("trace needs a tangent-valued derivative".into()));
                }
                ValueSpace::scalar()
            } else {
                dshape.space.clone()
            };
            let table = t.phi.table(t.sigma.space(), &right_space)?;
            let (degree, _) = t.pairing.output_shape(
                (t.sigma.degree(), t.sigma.variance()),
                (dshape.degree, dshape.variance),
                n,
            )?;
            (degree, binom(n, degree), table.target)
        };
        needs_metric |= t.pairing.needs_metric();
        let routes = match &t.label {
            Some(l) => {
                let b = block_index(&mut blocks, l, degree, len_per_value * target.dim())?;
                (0..target.dim()).map(|k| (b, k * len_per_value)).collect()
            }
            None => target
                .labels()
                .iter()
                .map(|l| Ok((block_index(&mut blocks, l, degree, len_per_value)?, 0)))
                .collect::<Result<Vec<_>>>()?,
        };
        terms.push(BoundTerm {
            pairing: t.pairing,
            phi: t.phi,
            sigma: t.sigma,
            prepared,
            coeff: t.coeff,
            routes,
        });
    }
    let mut rhs = Vec::new();
    if let Some(r) = spec.rhs {
        if r.dim() != n {
            return Err(Error::Dimension("right-hand side lives on another chart".into()));
        }
        for (i, label) in r.space().labels().iter().enumerate() {
            let b = blocks
                .iter()
                .position(|b| &b.label == label)
                .ok_or_else(|| Error::Dimension(format!("right-hand side label `{label}` matches no output")))?;
            if blocks[b].degree != r.degree() || blocks[b].len != binom(n, r.degree()) {
                return Err(Error::Degree(format!(
                    "right-hand side on `{label}` has degree {}, output has degree {}",
                    r.degree(),
                    blocks[b].degree
                )));
            }
            rhs.push((b, r.part(i).dense()));
        }
    }
    let guards = spec
        .guards
        .into_iter()
        .map(|g| match g {
            Guard::Nondegenerate2Form(w) => {
                if w.degree() != 2 || w.dim() != n {
                    return Err(Error::Degree("nondegeneracy guard needs a 2-form on the chart".into()));
                }
                if n % 2 == 1 {
                    return Err(Error::DegenerateForm(0.0));
                }
                let comps = w
                    .components()
                    .map(|(k, e)| {
                        let ix: Vec<usize> = k.indices().collect();
                        (ix[0], ix[1], e.clone())
                    })
                    .collect();
                Ok(BoundGuard { n, comps })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GrCondition {
        name: spec.name,
        chart,
        terms,
        blocks,
        rhs,
        guards,
        needs_metric,
    })
}

fn two_form_matrix(n: usize, comps: &[(usize, usize, Expr)], pt: &[f64]) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(n, n);
    for (i, j, e) in comps {
        let v = e.eval(pt)?.re;
        m[(*i, *j)] = v;
        m[(*j, *i)] = -v;
    }
    Ok(m)
}

fn eval_vec(v: &[Expr], pt: &[f64]) -> Result<Vec<f64>> {
    v.iter().map(|e| Ok(e.eval(pt)?.re)).collect()
}

impl PoissonJets {
    /// `∂_a (α_i W^{ij} β_j)` with `W = Ω⁻¹`, `∂W = -W (∂Ω) W`.
    fn gradient(&self, pt: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let om = DMatrix::from_row_slice(n, n, &eval_vec(&self.omega, pt)?);
        let det = om.determinant();
        if det.abs() < DEGENERACY_TOL {
            return Err(Error::DegenerateForm(det.abs()));
        }
        let w = om.try_inverse().ok_or(Error::DegenerateForm(0.0))?;
        let a = nalgebra::DVector::from_vec(eval_vec(&self.alpha, pt)?);
        let b = nalgebra::DVector::from_vec(eval_vec(&self.beta, pt)?);
        (0..n)
            .map(|k| {
                let dom = DMatrix::from_row_slice(n, n, &eval_vec(&self.domega[k], pt)?);
                let dw = -(&w * dom * &w);
                let da = nalgebra::DVector::from_vec(eval_vec(&self.dalpha[k], pt)?);
                let db = nalgebra::DVector::from_vec(eval_vec(&self.dbeta[k], pt)?);
                Ok(da.dot(&(&w * &b)) + a.dot(&(dw * &b)) + a.dot(&(&w * db)))
            })
            .collect()
    }
}

impl GrCondition {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn blocks(&self) -> &[OutputBlock] {
        &self.blocks
    }

    pub fn labels(&self) -> Vec<&str> {
        self.blocks.iter().map(|b| b.label.as_str()).collect()
    }

    /// Degree of the (first) output block.
    pub fn output_degree(&self) -> usize {
        self.blocks[0].degree
    }

    /// Residual components per output label, in declaration order.
    pub fn residual(&self, pt: &[f64]) -> Result<Vec<(String, Vec<C64>)>> {
        let flat = self.residual_flat(pt)?;
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut at = 0;
        for b in &self.blocks {
            out.push((b.label.clone(), flat[at..at + b.len].to_vec()));
            at += b.len;
        }
        Ok(out)
    }

    fn residual_flat(&self, pt: &[f64]) -> Result<Vec<C64>> {
        let n = self.chart.dim();
        if pt.len() != n {
            return Err(crate::error::EvalError::PointDimension { want: n, got: pt.len() }.into());
        }
        for g in &self.guards {
            let m = two_form_matrix(g.n, &g.comps, pt)?;
            let det = m.determinant();
            if det.abs() < DEGENERACY_TOL {
                return Err(Error::DegenerateForm(det.abs()));
            }
        }
        let metric: Option<MetricAt> = if self.needs_metric {
            Some(self.chart.metric().at(pt)?)
        } else {
            None
        };
        let offsets: Vec<usize> = self
            .blocks
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.len;
                Some(o)
            })
            .collect();
        let total: usize = self.blocks.iter().map(|b| b.len).sum();
        let mut out = vec![C64::new(0.0, 0.0); total];
        for t in &self.terms {
            let sigma = t.sigma.eval(pt)?;
            let lifted: Vec<Vec<C64>> = match &t.prepared {
                Prepared::Ricci(lambda) => {
                    let r = riemann_at(self.chart.metric(), pt)?.ricci();
                    let g = if *lambda != 0.0 { Some(self.chart.metric().at(pt)?) } else { None };
                    let upper: Vec<C64> = (0..n)
                        .flat_map(|i| (i..n).map(move |j| (i, j)))
                        .map(|(i, j)| {
                            let shift = g.as_ref().map_or(0.0, |g| lambda * g.g(i, j));
                            C64::new(r[i * n + j] - shift, 0.0)
                        })
                        .collect();
                    let table = t.phi.table(sigma.space(), &ValueSpace::scalar())?;
                    let mut parts = vec![vec![C64::new(0.0, 0.0); upper.len()]; table.target.dim()];
                    for &(i, _, k, c) in &table.entries {
                        let s = sigma.part(i).get(MultiIndex::EMPTY) * c;
                        for (o, v) in parts[k].iter_mut().zip(&upper) {
                            *o += s * v;
                        }
                    }
                    parts
                }
                other => {
                    let dst = self.eval_prepared(other, pt)?;
                    let v = lift_pointwise(t.pairing, &t.phi, &sigma, &dst, metric.as_ref())?;
                    v.parts().iter().map(|p| p.dense()).collect()
                }
            };
            for (k, part) in lifted.iter().enumerate() {
                let (b, off) = t.routes[k];
                let base = offsets[b] + off;
                for (i, v) in part.iter().enumerate() {
                    out[base + i] += v * t.coeff;
                }
            }
        }
        for (b, comps) in &self.rhs {
            for (i, e) in comps.iter().enumerate() {
                out[offsets[*b] + i] -= e.eval(pt)?;
            }
        }
        Ok(out)
    }

    fn eval_prepared(&self, p: &Prepared, pt: &[f64]) -> Result<ValuedForm<C64>> {
        let n = self.chart.dim();
        match p {
            Prepared::Symbolic(v) => Ok(v.eval(pt)?),
            Prepared::Nabla { field, space } => {
                let j = field.covariant_jacobian_at(self.chart.metric(), pt)?;
                let parts = j
                    .iter()
                    .map(|row| {
                        AlternatingTensor::from_components(
                            n,
                            1,
                            Variance::Covariant,
                            row.iter().enumerate().map(|(nu, v)| (MultiIndex::single(nu), *v)),
                        )
                    })
                    .collect::<Result<Vec<_>>>()?;
                ValuedForm::from_parts(space.clone(), parts)
            }
            Prepared::Projected { op, bracket, space } => {
                op.check_idempotent(pt)?;
                let br = bracket.iter().map(|e| e.eval(pt)).collect::<Result<Vec<_>, _>>()?;
                let v = op.project_at(&br, pt)?;
                let parts = v.into_iter().map(|c| AlternatingTensor::scalar(n, c)).collect();
                ValuedForm::from_parts(space.clone(), parts)
            }
            Prepared::Poisson(jets) => {
                let g = jets.gradient(pt)?;
                let t = AlternatingTensor::from_components(
                    n,
                    1,
                    Variance::Covariant,
                    g.into_iter().enumerate().map(|(k, v)| (MultiIndex::single(k), C64::new(v, 0.0))),
                )?;
                Ok(ValuedForm::scalar_valued(t))
            }
            Prepared::Ricci(_) => Err(Error::Unsupported("Riemann tensor outside a trace".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelNorm {
    pub linf: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub kind: &'static str,
    pub requested: usize,
    pub evaluated: usize,
    pub excluded: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub samples: SampleSummary,
    pub norms: IndexMap<String, LabelNorm>,
    pub tol: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
    pub worst_label: String,
}

impl ResidualReport {
    /// Largest L∞ over all labels.
    pub fn linf(&self) -> f64 {
        self.norms.values().map(|n| n.linf).fold(0.0, f64::max)
    }
}

/// Evaluates `c` on every sample point, skipping points with point-local failures.
pub fn verify(c: &GrCondition, s: &SampleSet, tol: f64) -> Result<ResidualReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol".into(),
            reason: "tolerance must be positive".into(),
        });
    }
    if s.dim() != c.chart.dim() {
        return Err(Error::Dimension(format!(
            "sample set has {} axes, chart has {}",
            s.dim(),
            c.chart.dim()
        )));
    }
    let points = s.points();
    let results: Vec<Result<Vec<C64>>> = points.par_iter().map(|p| c.residual_flat(p)).collect();

    let nb = c.blocks.len();
    let mut linf = vec![0.0f64; nb];
    let mut sumsq = vec![0.0f64; nb];
    let mut excluded = 0usize;
    let mut evaluated = 0usize;
    let mut worst = (-1.0f64, 0usize, 0usize);
    for (pi, r) in results.into_iter().enumerate() {
        let v = match r {
            Ok(v) => v,
            Err(e) if e.is_point_local() => {
                excluded += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        evaluated += 1;
        let mut at = 0;
        for (bi, b) in c.blocks.iter().enumerate() {
            for x in &v[at..at + b.len] {
                let m = if x.re.is_finite() && x.im.is_finite() { x.norm() } else { f64::INFINITY };
                if m > linf[bi] {
                    linf[bi] = m;
                }
                if m > worst.0 {
                    worst = (m, pi, bi);
                }
                sumsq[bi] += m * m;
            }
            at += b.len;
        }
    }
    if evaluated == 0 {
        return Err(Error::EmptySampleSet);
    }
    let mut norms = IndexMap::new();
    for (bi, b) in c.blocks.iter().enumerate() {
        let count = (evaluated * b.len.max(1)) as f64;
        norms.insert(
            b.label.clone(),
            LabelNorm {
                linf: linf[bi],
                rms: (sumsq[bi] / count).sqrt(),
            },
        );
    }
    let max = linf.iter().cloned().fold(0.0, f64::max);
    Ok(ResidualReport {
        name: c.name.clone(),
        samples: SampleSummary {
            kind: match s {
                SampleSet::UniformGrid { .. } => "grid",
                SampleSet::RandomBox { .. } => "random",
            },
            requested: points.len(),
            evaluated,
            excluded,
            seed: s.seed(),
        },
        norms,
        tol,
        pass: max <= tol,
        worst_point: points[worst.1].clone(),
        worst_label: c.blocks[worst.2].label.clone(),
    })
}
