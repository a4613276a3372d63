//! Named parallelism conditions and their shipped fixtures.

use indexmap::IndexMap;

use crate::chart::Chart;
use crate::diffops::forms::{curvature, ConnectionForm};
use crate::diffops::quantum::{DiracSign, GammaSystem, HamiltonianSpec};
use crate::engine::{bind, gamma_section, hodge_symbolic, lower_symbolic, ConditionSpec, GrCondition, Guard, Operator, Term};
use crate::error::{Error, Result};
use crate::expr::{Expr, C64};
use crate::exterior::{self, AlternatingTensor, Form, MultiIndex, Variance};
use crate::values::{FormPairing, PhiMap, ValueSpace, ValuedForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Vector,
    Form,
    Field,
    Number,
    Matrix,
    Choice(&'static [&'static str]),
    /// Collects every remaining positional argument.
    Forms,
    Fields,
    Chart,
}

impl ParamKind {
    pub fn name(self) -> &'static str {
        match self {
            ParamKind::Vector => "vector",
            ParamKind::Form => "form",
            ParamKind::Field => "field",
            ParamKind::Number => "number",
            ParamKind::Matrix => "matrix",
            ParamKind::Choice(_) => "choice",
            ParamKind::Forms => "forms...",
            ParamKind::Fields => "fields...",
            ParamKind::Chart => "chart",
        }
    }

    pub fn is_variadic(self) -> bool {
        matches!(self, ParamKind::Forms | ParamKind::Fields)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub required: bool,
}

const fn req(name: &'static str, kind: ParamKind) -> ParamSpec {
    ParamSpec { name, kind, required: true }
}

const fn opt(name: &'static str, kind: ParamKind) -> ParamSpec {
    ParamSpec { name, kind, required: false }
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub params: &'static [ParamSpec],
    /// The condition in display form.
    pub display: &'static str,
}

impl CatalogEntry {
    pub fn signature(&self) -> String {
        let ps: Vec<String> = self
            .params
            .iter()
            .map(|p| {
                let s = format!("{}: {}", p.name, p.kind.name());
                if p.required {
                    s
                } else {
                    format!("[{s}]")
                }
            })
            .collect();
        format!("{}({})", self.id, ps.join(", "))
    }

    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

const PHI_CHOICES: &[&str] = &["sym", "diag", "bracket"];
const SIGN_CHOICES: &[&str] = &["minus", "plus"];
const BOOL_CHOICES: &[&str] = &["false", "true"];

use ParamKind as K;

/// All entries, sorted by id.
pub const ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        id: "absolute_invariant",
        params: &[req("X", K::Vector), req("alpha", K::Form)],
        display: "i(X)α = 0, i(X)dα = 0",
    },
    CatalogEntry {
        id: "autoparallel_valued_form",
        params: &[req("psi", K::Form), opt("connection", K::Form), opt("phi", K::Choice(PHI_CHOICES))],
        display: "i(α̃^k)(DΨ)^m ⊗ φ(σ_k, σ_m) = 0",
    },
    CatalogEntry {
        id: "autoparallel_vector",
        params: &[req("u", K::Vector)],
        display: "i(u)∇u = 0",
    },
    CatalogEntry {
        id: "bianchi",
        params: &[req("connection", K::Form), opt("curvature", K::Form)],
        display: "DΩ = 0, Ω = dω + ½[ω∧ω]",
    },
    CatalogEntry {
        id: "dirac",
        params: &[
            req("psi", K::Fields),
            opt("mass", K::Number),
            opt("sign", K::Choice(SIGN_CHOICES)),
            opt("charge", K::Number),
            opt("potential", K::Form),
        ],
        display: "(η, φ; i d - eA ± ½mγ⁻¹)(γ, Ψ) = 0",
    },
    CatalogEntry {
        id: "ext_maxwell_currents",
        params: &[
            req("F", K::Form),
            req("J1", K::Form),
            req("J2", K::Form),
            req("J3", K::Form),
            req("J4", K::Form),
            opt("symmetrized_rhs", K::Choice(BOOL_CHOICES)),
        ],
        display: "i(F̃)dF = i(J̃1)F, i(*F̃)d*F = i(J̃2)F, i(F̃)d*F + i(*F̃)dF = i(J̃3)F + i(J̃4)*F",
    },
    CatalogEntry {
        id: "ext_maxwell_vacuum",
        params: &[req("F", K::Form)],
        display: "(i, ∨; d)(Ω̃, Ω) = 0, Ω = F⊗e1 + *F⊗e2",
    },
    CatalogEntry {
        id: "ext_yang_mills_bracket",
        params: &[req("psi", K::Form), opt("connection", K::Form)],
        display: "i(ψ̃^i)(DΨ)^m ⊗ [E_m, E_i] = 0",
    },
    CatalogEntry {
        id: "ext_yang_mills_diagonal",
        params: &[req("psi", K::Form)],
        display: "i(ψ̃^i)dψ^i ⊗ E_i = 0",
    },
    CatalogEntry {
        id: "ext_yang_mills_sym",
        params: &[req("psi", K::Form)],
        display: "i(ψ̃^i)dψ^j ⊗ E_i∨E_j = 0",
    },
    CatalogEntry {
        id: "first_integral",
        params: &[req("X", K::Vector), req("f", K::Field)],
        display: "i(X)df = 0",
    },
    CatalogEntry {
        id: "frobenius_pfaff",
        params: &[req("alphas", K::Forms)],
        display: "dα ∧ α_1 ∧ … ∧ α_k = 0",
    },
    CatalogEntry {
        id: "frobenius_vector",
        params: &[req("fields", K::Forms), req("pi", K::Matrix)],
        display: "π([X_i, X_j]) = 0",
    },
    CatalogEntry {
        id: "hamiltonian_field",
        params: &[req("X", K::Vector), req("omega", K::Form)],
        display: "d i(X)ω = 0",
    },
    CatalogEntry {
        id: "mass_energy",
        params: &[req("u", K::Vector), req("rho", K::Field)],
        display: "∇_σ(ρu^σ) = 0, ∇_σ(ρu^σu^μ) = 0",
    },
    CatalogEntry {
        id: "maxwell_currents",
        params: &[req("F", K::Form), opt("j", K::Form), opt("m", K::Form)],
        display: "dF⊗e1 + d*F⊗e2 = m⊗e1 + j⊗e2",
    },
    CatalogEntry {
        id: "maxwell_vacuum",
        params: &[req("F", K::Form)],
        display: "dΩ = 0, Ω = F⊗e1 + *F⊗e2",
    },
    CatalogEntry {
        id: "nabla_parallel",
        params: &[req("X", K::Vector), req("sigma", K::Vector)],
        display: "∇_X σ = 0",
    },
    CatalogEntry {
        id: "null_autoparallel",
        params: &[req("u", K::Vector)],
        display: "u^μ(du)_{μν} = 0, u_σu^σ = 0",
    },
    CatalogEntry {
        id: "pfaff_currents",
        params: &[req("currents", K::Forms)],
        display: "dJ_a ∧ J_a ∧ J_b = 0",
    },
    CatalogEntry {
        id: "poisson_first_integrals",
        params: &[req("Z", K::Vector), req("omega", K::Form), req("alpha", K::Form), req("beta", K::Form)],
        display: "i(Z) d ω⁻¹(α, β) = 0",
    },
    CatalogEntry {
        id: "relative_invariant",
        params: &[req("X", K::Vector), req("alpha", K::Form)],
        display: "i(X)dα = 0",
    },
    CatalogEntry {
        id: "ricci_flat",
        params: &[opt("metric", K::Chart), opt("lambda", K::Number)],
        display: "Ric(R(g)) ⊗ 1 = 0",
    },
    CatalogEntry {
        id: "schrodinger",
        params: &[req("psi", K::Field), opt("hbar", K::Number), opt("mass", K::Number), opt("potential", K::Field)],
        display: "iħ∂_tΨ - HΨ = 0",
    },
    CatalogEntry {
        id: "symplectic_closed",
        params: &[req("omega", K::Form)],
        display: "dω = 0",
    },
    CatalogEntry {
        id: "theta_pi_parallel",
        params: &[req("theta", K::Vector), req("psi", K::Form), req("pi", K::Matrix), opt("connection", K::Form)],
        display: "i(Θ)(DΨ)^i ⊗ Π(σ_i) = 0",
    },
    CatalogEntry {
        id: "yang_mills",
        params: &[req("connection", K::Form)],
        display: "D*Ω = 0",
    },
];

pub const CATALOG_SIZE: usize = 27;

pub fn entry(id: &str) -> Result<&'static CatalogEntry> {
    ENTRIES
        .iter()
        .find(|e| e.id == id)
        .ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

/// A resolved argument.
#[derive(Debug, Clone)]
pub enum Value {
    Number(f64),
    Field(Expr),
    Form { name: String, form: ValuedForm<Expr> },
    Matrix(Vec<Vec<Expr>>),
    Word(String),
    List(Vec<Value>),
    Chart(Chart),
}

impl Value {
    fn kind_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Field(_) => "field",
            Value::Form { .. } => "form",
            Value::Matrix(_) => "matrix",
            Value::Word(_) => "word",
            Value::List(_) => "list",
            Value::Chart(_) => "chart",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Params {
    values: IndexMap<String, Value>,
}

fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn set(&mut self, name: impl Into<String>, v: Value) -> &mut Self {
        self.values.insert(name.into(), v);
        self
    }

    pub fn with(mut self, name: impl Into<String>, v: Value) -> Self {
        self.set(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.values.get(name)
    }

    fn need(&self, name: &str) -> Result<&Value> {
        self.get(name).ok_or_else(|| Error::MissingParameter(name.to_string()))
    }

    fn number(&self, name: &str, default: f64) -> Result<f64> {
        match self.get(name) {
            None => Ok(default),
            Some(Value::Number(v)) => Ok(*v),
            Some(Value::Field(e)) => match e.as_const() {
                Some(c) if c.im == 0.0 => Ok(c.re),
                _ => Err(invalid(name, "expected a real constant")),
            },
            Some(v) => Err(invalid(name, format!("expected a number, got a {}", v.kind_name()))),
        }
    }

    fn field_value(name: &str, v: &Value) -> Result<Expr> {
        match v {
            Value::Number(x) => Ok(Expr::real(*x)),
            Value::Field(e) => Ok(e.clone()),
            Value::Form { form, .. } if form.degree() == 0 && form.space().dim() == 1 => {
                Ok(form.part(0).get(MultiIndex::EMPTY))
            }
            v => Err(invalid(name, format!("expected a scalar field, got a {}", v.kind_name()))),
        }
    }

    fn field(&self, name: &str) -> Result<Expr> {
        Self::field_value(name, self.need(name)?)
    }

    fn field_or(&self, name: &str, default: Expr) -> Result<Expr> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => Self::field_value(name, v),
        }
    }

    fn form(&self, name: &str) -> Result<(&str, &ValuedForm<Expr>)> {
        match self.need(name)? {
            Value::Form { name: n, form } => Ok((n.as_str(), form)),
            v => Err(invalid(name, format!("expected a form, got a {}", v.kind_name()))),
        }
    }

    fn opt_form(&self, name: &str) -> Result<Option<&ValuedForm<Expr>>> {
        if self.get(name).is_none() {
            return Ok(None);
        }
        Ok(Some(self.form(name)?.1))
    }

    /// A scalar-valued, covariant form.
    fn plain_form(&self, name: &str) -> Result<Form<Expr>> {
        plain(name, self.form(name)?.1)
    }

    fn vector(&self, name: &str, n: usize) -> Result<Vec<Expr>> {
        let (_, f) = self.form(name)?;
        vector_comps(name, f, n)
    }

    fn multivector(&self, name: &str) -> Result<Form<Expr>> {
        let (_, f) = self.form(name)?;
        if f.variance() != Variance::Contravariant || f.space().dim() != 1 {
            return Err(invalid(name, "expected a scalar-valued multivector"));
        }
        Ok(f.part(0).clone())
    }

    fn forms(&self, name: &str) -> Result<Vec<(String, ValuedForm<Expr>)>> {
        let list = match self.need(name)? {
            Value::List(l) => l.clone(),
            v => vec![v.clone()],
        };
        list.into_iter()
            .map(|v| match v {
                Value::Form { name, form } => Ok((name, form)),
                v => Err(invalid(name, format!("expected forms, got a {}", v.kind_name()))),
            })
            .collect()
    }

    fn fields(&self, name: &str) -> Result<Vec<Expr>> {
        match self.need(name)? {
            Value::List(l) => l.iter().map(|v| Self::field_value(name, v)).collect(),
            Value::Form { form, .. } if form.degree() == 0 => {
                Ok(form.parts().iter().map(|p| p.get(MultiIndex::EMPTY)).collect())
            }
            v => Ok(vec![Self::field_value(name, v)?]),
        }
    }

    fn matrix(&self, name: &str) -> Result<Vec<Vec<Expr>>> {
        match self.need(name)? {
            Value::Matrix(m) => Ok(m.clone()),
            v => Err(invalid(name, format!("expected a matrix, got a {}", v.kind_name()))),
        }
    }

    fn choice(&self, name: &str, options: &[&'static str], default: &'static str) -> Result<&'static str> {
        match self.get(name) {
            None => Ok(default),
            Some(Value::Word(w)) => options
                .iter()
                .find(|o| **o == w.as_str())
                .copied()
                .ok_or_else(|| invalid(name, format!("expected one of {}", options.join(", ")))),
            Some(v) => Err(invalid(name, format!("expected a word, got a {}", v.kind_name()))),
        }
    }
}

fn plain(name: &str, f: &ValuedForm<Expr>) -> Result<Form<Expr>> {
    if f.space().dim() != 1 || f.variance() != Variance::Covariant {
        return Err(invalid(name, "expected a scalar-valued differential form"));
    }
    Ok(f.part(0).clone())
}

fn vector_comps(name: &str, f: &ValuedForm<Expr>, n: usize) -> Result<Vec<Expr>> {
    if f.dim() != n {
        return Err(Error::Dimension(format!("`{name}` lives on a {}-chart, expected {n}", f.dim())));
    }
    if f.degree() != 1 || f.variance() != Variance::Contravariant || f.space().dim() != 1 {
        return Err(invalid(name, "expected a vector field"));
    }
    Ok((0..n).map(|i| f.part(0).get(MultiIndex::single(i))).collect())
}

fn vector_section(comps: &[Expr]) -> Result<ValuedForm<Expr>> {
    let n = comps.len();
    let t = AlternatingTensor::from_components(
        n,
        1,
        Variance::Contravariant,
        comps.iter().enumerate().map(|(i, e)| (MultiIndex::single(i), e.clone())),
    )?;
    Ok(ValuedForm::scalar_valued(t))
}

fn tangent_section(comps: &[Expr], chart: &Chart) -> Result<ValuedForm<Expr>> {
    let n = chart.dim();
    let parts = comps.iter().map(|e| AlternatingTensor::scalar(n, e.clone())).collect();
    ValuedForm::from_parts(ValueSpace::tangent(chart.names()), parts)
}

fn scalar_section(e: Expr, n: usize) -> ValuedForm<Expr> {
    ValuedForm::scalar_valued(AlternatingTensor::scalar(n, e))
}

fn with_values(labels: &[&str], parts: Vec<Form<Expr>>) -> Result<ValuedForm<Expr>> {
    ValuedForm::from_parts(ValueSpace::new(labels.iter().copied(), false)?, parts)
}

fn term(p: FormPairing, phi: PhiMap, op: Operator, sigma: ValuedForm<Expr>, st: ValuedForm<Expr>) -> Term {
    Term::new(p, phi, op, sigma, st)
}

fn connection_for(conn: &ValuedForm<Expr>, psi: &ValueSpace) -> Result<ConnectionForm> {
    let r = psi.dim();
    if conn.space().lie().is_some() && conn.space().dim() == r {
        ConnectionForm::lie(conn.clone())
    } else if conn.space().dim() == r * r {
        ConnectionForm::linear_from_valued(conn, r)
    } else {
        Err(Error::Dimension(format!(
            "connection with {} value labels acts on neither a {r}-dimensional Lie algebra nor {r}×{r} matrices",
            conn.space().dim()
        )))
    }
}

fn d_or_covariant(conn: Option<&ValuedForm<Expr>>, psi: &ValuedForm<Expr>) -> Result<Operator> {
    Ok(match conn {
        Some(c) => Operator::Covariant(connection_for(c, psi.space())?),
        None => Operator::ExteriorD,
    })
}

fn constant_matrix(name: &str, m: &[Vec<Expr>]) -> Result<Vec<Vec<C64>>> {
    m.iter()
        .map(|row| {
            row.iter()
                .map(|e| e.as_const().ok_or_else(|| invalid(name, "entries must be constants")))
                .collect()
        })
        .collect()
}

/// Rejects odd dimensions and constant degenerate 2-forms at build time.
fn symplectic_guard(name: &str, w: &Form<Expr>, n: usize) -> Result<Guard> {
    if w.degree() != 2 {
        return Err(Error::Degree(format!("`{name}` must be a 2-form")));
    }
    if n % 2 == 1 {
        return Err(Error::DegenerateForm(0.0));
    }
    let consts: Option<Vec<(Vec<usize>, f64)>> = w
        .components()
        .map(|(k, e)| e.as_const().map(|c| (k.indices().collect(), c.re)))
        .collect();
    if let Some(cs) = consts {
        let mut m = nalgebra::DMatrix::<f64>::zeros(n, n);
        for (ix, v) in cs {
            m[(ix[0], ix[1])] = v;
            m[(ix[1], ix[0])] = -v;
        }
        let det = m.determinant();
        if det.abs() < crate::engine::DEGENERACY_TOL {
            return Err(Error::DegenerateForm(det.abs()));
        }
    }
    Ok(Guard::Nondegenerate2Form(w.clone()))
}

fn maxwell_pair(f: &Form<Expr>, chart: &Chart) -> Result<ValuedForm<Expr>> {
    if f.degree() != 2 {
        return Err(Error::Degree("the field strength must be a 2-form".into()));
    }
    let star = hodge_symbolic(&ValuedForm::scalar_valued(f.clone()), chart)?;
    with_values(&["e1", "e2"], vec![f.clone(), star.part(0).clone()])
}

fn check_params(e: &CatalogEntry, params: &Params) -> Result<()> {
    for p in e.params {
        if p.required && params.get(p.name).is_none() {
            return Err(Error::MissingParameter(p.name.to_string()));
        }
    }
    for k in params.values.keys() {
        if e.param(k).is_none() {
            return Err(invalid(k, format!("`{}` has no parameter `{k}`", e.id)));
        }
    }
    Ok(())
}

/// Builds and binds the condition `id` on `chart`.
pub fn build(id: &str, chart: &Chart, params: &Params) -> Result<GrCondition> {
    let e = entry(id)?;
    check_params(e, params)?;
    let chart = match params.get("metric") {
        Some(Value::Chart(c)) => c.clone(),
        Some(v) => return Err(invalid("metric", format!("expected a chart, got a {}", v.kind_name()))),
        None => chart.clone(),
    };
    let chart = &chart;
    let n = chart.dim();
    let one = ValuedForm::one(n);
    let fp = PhiMap::FunctionProduct;
    let mut spec = ConditionSpec::new(id, chart);
    match id {
        "first_integral" => {
            let x = params.vector("X", n)?;
            let f = params.field("f")?;
            spec = spec.term(term(
                FormPairing::Interior,
                fp,
                Operator::ExteriorD,
                vector_section(&x)?,
                scalar_section(f, n),
            ));
        }
        "relative_invariant" | "absolute_invariant" => {
            let x = vector_section(&params.vector("X", n)?)?;
            let (_, alpha) = params.form("alpha")?;
            if alpha.variance() != Variance::Covariant {
                return Err(invalid("alpha", "expected a differential form"));
            }
            let mut t = term(FormPairing::Interior, fp.clone(), Operator::ExteriorD, x.clone(), alpha.clone());
            if id == "absolute_invariant" {
                t = t.label("i(X)dα");
                spec = spec.term(
                    term(FormPairing::Interior, fp, Operator::Identity, x, alpha.clone()).label("i(X)α"),
                );
            }
            spec = spec.term(t);
        }
        "symplectic_closed" => {
            let w = params.plain_form("omega")?;
            spec = spec
                .guard(symplectic_guard("omega", &w, n)?)
                .term(term(
                    FormPairing::ScalarMultiply,
                    fp,
                    Operator::ExteriorD,
                    one,
                    ValuedForm::scalar_valued(w),
                ));
        }
        "hamiltonian_field" => {
            let x = params.vector("X", n)?;
            let w = params.plain_form("omega")?;
            let guard = symplectic_guard("omega", &w, n)?;
            let ixw = exterior::interior(&vector_section(&x)?.part(0).clone(), &w)?;
            spec = spec.guard(guard).term(term(
                FormPairing::ScalarMultiply,
                fp,
                Operator::ExteriorD,
                one,
                ValuedForm::scalar_valued(ixw),
            ));
        }
        "poisson_first_integrals" => {
            let z = params.vector("Z", n)?;
            let w = params.plain_form("omega")?;
            let guard = symplectic_guard("omega", &w, n)?;
            let alpha = params.plain_form("alpha")?;
            let beta = params.plain_form("beta")?;
            spec = spec.guard(guard).term(term(
                FormPairing::Interior,
                fp,
                Operator::PoissonGradient { omega: w, alpha, beta },
                vector_section(&z)?,
                one,
            ));
        }
        "frobenius_vector" => {
            let fields = params.forms("fields")?;
            let pi = params.matrix("pi")?;
            if fields.len() < 2 {
                return Err(invalid("fields", "a distribution needs at least two fields"));
            }
            let comps = fields
                .iter()
                .map(|(name, f)| vector_comps(name, f, n))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..fields.len() {
                for j in (i + 1)..fields.len() {
                    spec = spec.term(
                        term(
                            FormPairing::ScalarMultiply,
                            fp.clone(),
                            Operator::ProjectedLie {
                                pi: pi.clone(),
                                x: comps[i].clone(),
                            },
                            one.clone(),
                            tangent_section(&comps[j], chart)?,
                        )
                        .label(format!("π[{},{}]", fields[i].0, fields[j].0)),
                    );
                }
            }
        }
        "frobenius_pfaff" => {
            let alphas = params.forms("alphas")?;
            let plains = alphas
                .iter()
                .map(|(name, f)| plain(name, f))
                .collect::<Result<Vec<_>>>()?;
            if plains.iter().any(|a| a.degree() != 1) {
                return Err(invalid("alphas", "a Pfaff system consists of 1-forms"));
            }
            let mut wedge = plains[0].clone();
            for a in &plains[1..] {
                wedge = wedge.wedge(a)?;
            }
            let sigma = ValuedForm::scalar_valued(wedge);
            for ((name, _), a) in alphas.iter().zip(&plains) {
                spec = spec.term(
                    term(
                        FormPairing::Wedge,
                        fp.clone(),
                        Operator::ExteriorD,
                        sigma.clone(),
                        ValuedForm::scalar_valued(a.clone()),
                    )
                    .label(format!("d{name}")),
                );
            }
        }
        "nabla_parallel" => {
            let x = params.vector("X", n)?;
            let s = params.vector("sigma", n)?;
            spec = spec.term(term(
                FormPairing::Interior,
                fp,
                Operator::Nabla,
                vector_section(&x)?,
                tangent_section(&s, chart)?,
            ));
        }
        "theta_pi_parallel" => {
            let theta = params.multivector("theta")?;
            let (_, psi) = params.form("psi")?;
            let pi = constant_matrix("pi", &params.matrix("pi")?)?;
            let op = d_or_covariant(params.opt_form("connection")?, psi)?;
            spec = spec.term(term(
                FormPairing::Interior,
                PhiMap::EndomorphismAction(pi),
                op,
                ValuedForm::scalar_valued(theta),
                psi.clone(),
            ));
        }
        "autoparallel_valued_form" => {
            let (_, psi) = params.form("psi")?;
            let op = d_or_covariant(params.opt_form("connection")?, psi)?;
            let phi = match params.choice("phi", PHI_CHOICES, "sym")? {
                "sym" => PhiMap::SymmetrizedProduct,
                "diag" => PhiMap::DiagonalMap,
                _ => PhiMap::LieBracket(
                    psi.space()
                        .lie()
                        .cloned()
                        .ok_or_else(|| invalid("phi", "bracket needs values in a Lie algebra"))?,
                ),
            };
            spec = spec.term(
                term(FormPairing::InteriorAfterTilde, phi, op, psi.clone(), psi.clone()).derived("tilde"),
            );
        }
        "autoparallel_vector" => {
            let u = params.vector("u", n)?;
            spec = spec.term(
                term(
                    FormPairing::Interior,
                    fp,
                    Operator::Nabla,
                    vector_section(&u)?,
                    tangent_section(&u, chart)?,
                )
                .derived("identity"),
            );
        }
        "null_autoparallel" => {
            let u = params.vector("u", n)?;
            let flat = ValuedForm::scalar_valued(lower_symbolic(vector_section(&u)?.part(0), chart)?);
            spec = spec
                .term(
                    term(FormPairing::Interior, fp.clone(), Operator::ExteriorD, vector_section(&u)?, flat.clone())
                        .label("autoparallel")
                        .derived("lowering"),
                )
                .term(
                    term(FormPairing::MetricPairing, fp, Operator::Identity, flat.clone(), flat)
                        .label("null_norm")
                        .derived("identity"),
                );
        }
        "mass_energy" => {
            let u = params.vector("u", n)?;
            let rho = params.field("rho")?;
            let rho_u: Vec<Expr> = u.iter().map(|c| &rho * c).collect();
            spec = spec
                .term(
                    term(FormPairing::Trace, fp.clone(), Operator::Nabla, one, tangent_section(&rho_u, chart)?)
                        .label("continuity"),
                )
                .term(
                    term(
                        FormPairing::Interior,
                        fp.clone(),
                        Operator::Nabla,
                        vector_section(&rho_u)?,
                        tangent_section(&u, chart)?,
                    )
                    .label("momentum"),
                )
                .term(
                    term(
                        FormPairing::Trace,
                        fp,
                        Operator::Nabla,
                        tangent_section(&u, chart)?,
                        tangent_section(&rho_u, chart)?,
                    )
                    .label("momentum"),
                );
        }
        "maxwell_vacuum" | "maxwell_currents" => {
            let f = params.plain_form("F")?;
            let omega = maxwell_pair(&f, chart)?;
            spec = spec.term(term(FormPairing::ScalarMultiply, fp, Operator::ExteriorD, one, omega));
            if id == "maxwell_currents" {
                let zero = AlternatingTensor::zero(n, 3, Variance::Covariant);
                let current = |name: &str| -> Result<Form<Expr>> {
                    match params.get(name) {
                        None => Ok(zero.clone()),
                        Some(_) => {
                            let c = params.plain_form(name)?;
                            if c.degree() != 3 {
                                return Err(Error::Degree(format!("current `{name}` must be a 3-form")));
                            }
                            Ok(c)
                        }
                    }
                };
                spec = spec.rhs(with_values(&["e1", "e2"], vec![current("m")?, current("j")?])?);
            }
        }
        "ext_maxwell_vacuum" | "ext_maxwell_currents" => {
            let f = params.plain_form("F")?;
            let omega = maxwell_pair(&f, chart)?;
            spec = spec.term(
                term(
                    FormPairing::InteriorAfterTilde,
                    PhiMap::SymmetrizedProduct,
                    Operator::ExteriorD,
                    omega.clone(),
                    omega.clone(),
                )
                .derived("tilde"),
            );
            if id == "ext_maxwell_currents" {
                let sym = params.choice("symmetrized_rhs", BOOL_CHOICES, "false")? == "true";
                let star = omega.part(1).clone();
                let src = |j: &str, target: &Form<Expr>, label: &str| -> Result<Term> {
                    let jf = params.plain_form(j)?;
                    if jf.degree() != 1 {
                        return Err(Error::Degree(format!("current `{j}` must be a 1-form")));
                    }
                    Ok(term(
                        FormPairing::InteriorAfterTilde,
                        PhiMap::FunctionProduct,
                        Operator::Identity,
                        ValuedForm::scalar_valued(jf),
                        ValuedForm::scalar_valued(target.clone()),
                    )
                    .coeff(-1.0)
                    .label(label))
                };
                spec = spec
                    .term(src("J1", &f, "e1∨e1")?)
                    .term(src("J2", if sym { &star } else { &f }, "e2∨e2")?)
                    .term(src("J3", &f, "e1∨e2")?)
                    .term(src("J4", &star, "e1∨e2")?);
            }
        }
        "pfaff_currents" => {
            let currents = params.forms("currents")?;
            let plains = currents
                .iter()
                .map(|(name, f)| plain(name, f))
                .collect::<Result<Vec<_>>>()?;
            if plains.len() < 2 || plains.iter().any(|j| j.degree() != 1) {
                return Err(invalid("currents", "expected at least two 1-forms"));
            }
            for a in 0..plains.len() {
                for b in 0..plains.len() {
                    if a == b {
                        continue;
                    }
                    spec = spec.term(
                        term(
                            FormPairing::Wedge,
                            fp.clone(),
                            Operator::ExteriorD,
                            ValuedForm::scalar_valued(plains[a].wedge(&plains[b])?),
                            ValuedForm::scalar_valued(plains[a].clone()),
                        )
                        .label(format!("({},{})", currents[a].0, currents[b].0)),
                    );
                }
            }
        }
        "yang_mills" | "bianchi" => {
            let (_, w) = params.form("connection")?;
            let conn = ConnectionForm::lie(w.clone())?;
            let omega = match params.opt_form("curvature")? {
                Some(c) => c.clone(),
                None => curvature(w)?,
            };
            let st = if id == "yang_mills" { hodge_symbolic(&omega, chart)? } else { omega };
            spec = spec.term(term(FormPairing::ScalarMultiply, fp, Operator::Covariant(conn), one, st));
        }
        "ext_yang_mills_bracket" => {
            let (_, psi) = params.form("psi")?;
            let lie = psi
                .space()
                .lie()
                .cloned()
                .ok_or_else(|| invalid("psi", "expected values in a Lie algebra"))?;
            let op = d_or_covariant(params.opt_form("connection")?, psi)?;
            spec = spec.term(
                term(FormPairing::InteriorAfterTilde, PhiMap::FormalBracket(lie), op, psi.clone(), psi.clone())
                    .coeff(-1.0)
                    .derived("tilde"),
            );
        }
        "ext_yang_mills_diagonal" | "ext_yang_mills_sym" => {
            let (_, psi) = params.form("psi")?;
            let phi = if id == "ext_yang_mills_diagonal" {
                PhiMap::DiagonalMap
            } else {
                PhiMap::SymmetrizedProduct
            };
            spec = spec.term(
                term(FormPairing::InteriorAfterTilde, phi, Operator::ExteriorD, psi.clone(), psi.clone())
                    .derived("tilde"),
            );
        }
        "ricci_flat" => {
            let lambda = params.number("lambda", 0.0)?;
            spec = spec.term(term(FormPairing::Trace, fp, Operator::Riemann { lambda }, one.clone(), one));
        }
        "schrodinger" => {
            let psi = params.field("psi")?;
            let h = HamiltonianSpec::new(
                params.number("hbar", 1.0)?,
                params.number("mass", 1.0)?,
                params.field_or("potential", Expr::zero())?,
            )?;
            spec = spec.term(term(
                FormPairing::ScalarMultiply,
                fp,
                Operator::Schrodinger(h),
                one,
                scalar_section(psi, n),
            ));
        }
        "dirac" => {
            let psi = params.fields("psi")?;
            if psi.len() != 4 {
                return Err(invalid("psi", format!("a spinor has 4 components, got {}", psi.len())));
            }
            let sign = match params.choice("sign", SIGN_CHOICES, "minus")? {
                "plus" => DiracSign::Plus,
                _ => DiracSign::Minus,
            };
            let mut gs = GammaSystem::dirac(params.number("mass", 1.0)?, sign)?;
            if params.get("potential").is_some() {
                gs = gs.with_field(params.number("charge", 1.0)?, params.plain_form("potential")?)?;
            }
            let spinor = ValueSpace::new(["e1", "e2", "e3", "e4"], true)?;
            let gamma = gamma_section(&gs, &spinor)?;
            let parts = psi.into_iter().map(|e| AlternatingTensor::scalar(n, e)).collect();
            let psi = ValuedForm::from_parts(spinor, parts)?;
            spec = spec.term(term(FormPairing::MetricPairing, PhiMap::DiracPairing, Operator::Dirac(gs), gamma, psi));
        }
        _ => return Err(Error::UnknownEntry(id.to_string())),
    }
    bind(spec)
}

/// A shipped check with its expected verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixture {
    pub entry: &'static str,
    pub check: &'static str,
    pub expect_pass: bool,
}

/// Source of the shipped spec file exercising `id`.
pub fn spec_source(id: &str) -> Option<&'static str> {
    SPECS.iter().find(|(i, _)| *i == id).map(|(_, s)| *s)
}

macro_rules! specs {
    ($($id:literal),* $(,)?) => {
        &[$(($id, include_str!(concat!("../specs/", $id, ".grs")))),*]
    };
}

pub const SPECS: &[(&str, &str)] = specs![
    "absolute_invariant",
    "autoparallel_valued_form",
    "autoparallel_vector",
    "bianchi",
    "dirac",
    "ext_maxwell_currents",
    "ext_maxwell_vacuum",
    "ext_yang_mills_bracket",
    "ext_yang_mills_diagonal",
    "ext_yang_mills_sym",
    "first_integral",
    "frobenius_pfaff",
    "frobenius_vector",
    "hamiltonian_field",
    "mass_energy",
    "maxwell_currents",
    "maxwell_vacuum",
    "nabla_parallel",
    "null_autoparallel",
    "pfaff_currents",
    "poisson_first_integrals",
    "relative_invariant",
    "ricci_flat",
    "schrodinger",
    "symplectic_closed",
    "theta_pi_parallel",
    "yang_mills",
];

const FIXTURES: &[Fixture] = &[
    fx("absolute_invariant", "vertical_pass", true),
    fx("absolute_invariant", "tangent_fail", false),
    fx("autoparallel_valued_form", "null_pair_pass", true),
    fx("autoparallel_valued_form", "shear_fail", false),
    fx("autoparallel_vector", "soliton_pass", true),
    fx("autoparallel_vector", "accelerating_fail", false),
    fx("bianchi", "su2_pass", true),
    fx("bianchi", "wrong_curvature_fail", false),
    fx("dirac", "rest_frame_pass", true),
    fx("dirac", "mass_mismatch_fail", false),
    fx("ext_maxwell_currents", "null_currents_pass", true),
    fx("ext_maxwell_currents", "transverse_current_fail", false),
    fx("ext_maxwell_vacuum", "plane_wave_pass", true),
    fx("ext_maxwell_vacuum", "sourced_fail", false),
    fx("ext_yang_mills_bracket", "single_component_pass", true),
    fx("ext_yang_mills_bracket", "coupled_fail", false),
    fx("ext_yang_mills_diagonal", "plane_waves_pass", true),
    fx("ext_yang_mills_diagonal", "sourced_fail", false),
    fx("ext_yang_mills_sym", "dual_pair_pass", true),
    fx("ext_yang_mills_sym", "sourced_fail", false),
    fx("first_integral", "rotation_pass", true),
    fx("first_integral", "rotation_fail", false),
    fx("frobenius_pfaff", "integrable_pass", true),
    fx("frobenius_pfaff", "heisenberg_fail", false),
    fx("frobenius_vector", "integrable_pass", true),
    fx("frobenius_vector", "heisenberg_fail", false),
    fx("hamiltonian_field", "oscillator_pass", true),
    fx("hamiltonian_field", "dilation_fail", false),
    fx("mass_energy", "soliton_dust_pass", true),
    fx("mass_energy", "growing_density_fail", false),
    fx("maxwell_currents", "magnetic_source_pass", true),
    fx("maxwell_currents", "missing_source_fail", false),
    fx("maxwell_vacuum", "plane_wave_pass", true),
    fx("maxwell_vacuum", "monopole_fail", false),
    fx("nabla_parallel", "constant_pass", true),
    fx("nabla_parallel", "stretch_fail", false),
    fx("null_autoparallel", "null_soliton_pass", true),
    fx("null_autoparallel", "counter_moving_fail", false),
    fx("pfaff_currents", "exact_pass", true),
    fx("pfaff_currents", "contact_fail", false),
    fx("poisson_first_integrals", "oscillator_pass", true),
    fx("poisson_first_integrals", "coordinate_fail", false),
    fx("relative_invariant", "vertical_pass", true),
    fx("relative_invariant", "transverse_fail", false),
    fx("ricci_flat", "schwarzschild_pass", true),
    fx("ricci_flat", "sphere_fail", false),
    fx("schrodinger", "plane_wave_pass", true),
    fx("schrodinger", "dispersion_fail", false),
    fx("symplectic_closed", "darboux_pass", true),
    fx("symplectic_closed", "twisted_fail", false),
    fx("theta_pi_parallel", "projected_pass", true),
    fx("theta_pi_parallel", "identity_fail", false),
    fx("yang_mills", "plane_wave_pass", true),
    fx("yang_mills", "radial_fail", false),
];

const fn fx(entry: &'static str, check: &'static str, expect_pass: bool) -> Fixture {
    Fixture { entry, check, expect_pass }
}

pub fn fixtures(id: &str) -> Result<Vec<Fixture>> {
    entry(id)?;
    Ok(FIXTURES.iter().filter(|f| f.entry == id).copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entries_sorted_and_complete() {
        assert_eq!(ENTRIES.len(), CATALOG_SIZE);
        assert_eq!(SPECS.len(), CATALOG_SIZE);
        assert!(ENTRIES.windows(2).all(|w| w[0].id < w[1].id));
        for e in ENTRIES {
            let f = fixtures(e.id).unwrap();
            assert!(f.iter().any(|f| f.expect_pass), "{}", e.id);
            assert!(f.iter().any(|f| !f.expect_pass), "{}", e.id);
            assert!(spec_source(e.id).is_some());
        }
    }

    #[test]
    fn unknown_entry() {
        assert!(matches!(fixtures("nope"), Err(Error::UnknownEntry(_))));
        assert!(matches!(
            build("nope", &Chart::minkowski4(), &Params::new()),
            Err(Error::UnknownEntry(_))
        ));
    }

    #[test]
    fn missing_parameter() {
        assert!(matches!(
            build("maxwell_vacuum", &Chart::minkowski4(), &Params::new()),
            Err(Error::MissingParameter(p)) if p == "F"
        ));
    }

    #[test]
    fn degenerate_constant_symplectic_form() {
        let chart = Chart::new(["a", "b", "c", "d"], crate::chart::Metric::euclidean(4)).unwrap();
        let w = crate::diffops::forms::form_from(4, 2, vec![(&[0, 1], Expr::one())]).unwrap();
        let p = Params::new().with(
            "omega",
            Value::Form {
                name: "w".into(),
                form: ValuedForm::scalar_valued(w),
            },
        );
        assert!(matches!(build("symplectic_closed", &chart, &p), Err(Error::DegenerateForm(_))));
    }
}
