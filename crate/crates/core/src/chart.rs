//! Coordinate charts and their (pseudo-)metrics.

use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use crate::error::{Error, EvalError, Result};
use crate::expr::Expr;

/// Implementation bound on chart dimension (multi-indices are bitmasks).
pub const MAX_DIM: usize = 8;

#[derive(Debug, Clone)]
pub enum MetricSpec {
    DiagonalConstant(Vec<f64>),
    /// Upper triangle, row-major: (0,0), (0,1), ..., (0,n-1), (1,1), ...
    ExprMatrix { dim: usize, upper: Vec<Expr> },
}

pub(crate) fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // rows r < i hold n - r entries each
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

/// Metric values at one point: `g`, its inverse and determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAt {
    n: usize,
    g: Vec<f64>,
    inv: Vec<f64>,
    det: f64,
}

impl MetricAt {
    pub fn from_matrix(n: usize, g: Vec<f64>) -> Result<Self> {
        assert_eq!(g.len(), n * n);
        let m = DMatrix::from_row_slice(n, n, &g);
        let det = m.determinant();
        if !det.is_finite() || det.abs() < 1e-300 {
            return Err(Error::SingularMetric);
        }
        let inv = m.try_inverse().ok_or(Error::SingularMetric)?;
        if inv.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularMetric);
        }
        let inv = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| inv[(i, j)])
            .collect();
        Ok(MetricAt { n, g, inv, det })
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut g = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            g[i * n + i] = *d;
        }
        MetricAt::from_matrix(n, g)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn g(&self, i: usize, j: usize) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn inv(&self, i: usize, j: usize) -> f64 {
        self.inv[i * self.n + j]
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn inv_matrix(&self) -> &[f64] {
        &self.inv
    }

    pub fn matrix(&self) -> &[f64] {
        &self.g
    }
}

/// Symbolic first and second partials of the stored metric entries.
#[derive(Debug)]
struct Jets {
    d1: Vec<Vec<Expr>>,
    d2: Vec<Vec<Vec<Expr>>>,
}

/// Metric values with first and second coordinate derivatives at one point.
#[derive(Debug, Clone)]
pub struct MetricJet {
    pub at: MetricAt,
    /// `d1[a][i*n+j]` = ∂_a g_ij
    pub d1: Vec<Vec<f64>>,
    /// `d2[a][b][i*n+j]` = ∂_a ∂_b g_ij
    pub d2: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug)]
struct MetricInner {
    spec: MetricSpec,
    jets: OnceLock<Jets>,
}

#[derive(Debug, Clone)]
pub struct Metric(Arc<MetricInner>);

impl Metric {
    pub fn new(spec: MetricSpec) -> Result<Self> {
        match &spec {
            MetricSpec::DiagonalConstant(d) => {
                if d.is_empty() || d.iter().any(|v| *v == 0.0 || !v.is_finite()) {
                    return Err(Error::Chart(
                        "diagonal metric entries must be finite and nonzero".into(),
                    ));
                }
            }
            MetricSpec::ExprMatrix { dim, upper } => {
                if upper.len() != dim * (dim + 1) / 2 {
                    return Err(Error::Chart(format!(
                        "metric matrix of dimension {dim} needs {} upper entries, got {}",
                        dim * (dim + 1) / 2,
                        upper.len()
                    )));
                }
            }
        }
        Ok(Metric(Arc::new(MetricInner {
            spec,
            jets: OnceLock::new(),
        })))
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Metric::new(MetricSpec::DiagonalConstant(entries.to_vec()))
    }

    /// Minkowski metric with signature (-,...,-,+); time is the last coordinate.
    pub fn minkowski(n: usize) -> Self {
        let mut d = vec![-1.0; n];
        d[n - 1] = 1.0;
        Metric::diagonal(&d).expect("valid signature")
    }

    pub fn euclidean(n: usize) -> Self {
        Metric::diagonal(&vec![1.0; n]).expect("valid signature")
    }

    /// Builds from a full square matrix of expressions; only the upper triangle is kept.
    pub fn from_rows(rows: Vec<Vec<Expr>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Chart("metric matrix must be square".into()));
        }
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for (i, row) in rows.iter().enumerate() {
            upper.extend(row[i..].iter().cloned());
        }
        Metric::new(MetricSpec::ExprMatrix { dim: n, upper })
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.0.spec
    }

    pub fn dim(&self) -> usize {
        match &self.0.spec {
            MetricSpec::DiagonalConstant(d) => d.len(),
            MetricSpec::ExprMatrix { dim, .. } => *dim,
        }
    }

    /// Symbolic entry `g_ij`.
    pub fn entry(&self, i: usize, j: usize) -> Expr {
        match &self.0.spec {
            MetricSpec::DiagonalConstant(d) => {
                if i == j {
                    Expr::real(d[i])
                } else {
                    Expr::zero()
                }
            }
            MetricSpec::ExprMatrix { dim, upper } => upper[upper_index(*dim, i, j)].clone(),
        }
    }

    /// The metric when it does not depend on the point.
    pub fn constant(&self) -> Option<MetricAt> {
        match &self.0.spec {
            MetricSpec::DiagonalConstant(d) => MetricAt::diagonal(d).ok(),
            MetricSpec::ExprMatrix { dim, upper } => {
                if upper.iter().all(|e| e.as_const().is_some_and(|c| c.im == 0.0)) {
                    self.matrix_at_consts(*dim).ok()
                } else {
                    None
                }
            }
        }
    }

    fn matrix_at_consts(&self, n: usize) -> Result<MetricAt> {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = self.entry(i, j).as_const().map(|c| c.re).unwrap_or(0.0);
            }
        }
        MetricAt::from_matrix(n, g)
    }

    pub fn is_constant(&self) -> bool {
        match &self.0.spec {
            MetricSpec::DiagonalConstant(_) => true,
            MetricSpec::ExprMatrix { upper, .. } => upper.iter().all(|e| e.as_const().is_some()),
        }
    }

    fn real_entry(e: &Expr, pt: &[f64]) -> Result<f64> {
        let v = e.eval(pt)?;
        if v.im != 0.0 {
            return Err(EvalError::Domain("metric entry evaluated to a complex value".into()).into());
        }
        Ok(v.re)
    }

    pub fn at(&self, pt: &[f64]) -> Result<MetricAt> {
        match &self.0.spec {
            MetricSpec::DiagonalConstant(d) => MetricAt::diagonal(d),
            MetricSpec::ExprMatrix { dim, upper } => {
                let n = *dim;
                let mut g = vec![0.0; n * n];
                for i in 0..n {
                    for j in i..n {
                        let v = Self::real_entry(&upper[upper_index(n, i, j)], pt)?;
                        g[i * n + j] = v;
                        g[j * n + i] = v;
                    }
                }
                MetricAt::from_matrix(n, g)
            }
        }
    }

    fn jets(&self) -> &Jets {
        self.0.jets.get_or_init(|| {
            let n = self.dim();
            let entries: Vec<Expr> = (0..n)
                .flat_map(|i| (i..n).map(move |j| (i, j)))
                .map(|(i, j)| self.entry(i, j))
                .collect();
            let d1: Vec<Vec<Expr>> = (0..n)
                .map(|a| entries.iter().map(|e| e.diff(a)).collect())
                .collect();
            let d2 = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| d1[a].iter().map(|e| e.diff(b)).collect())
                        .collect()
                })
                .collect();
            Jets { d1, d2 }
        })
    }

    /// Values and exact first/second partials of the metric at `pt`.
    pub fn jet(&self, pt: &[f64], second: bool) -> Result<MetricJet> {
        let n = self.dim();
        let at = self.at(pt)?;
        if let MetricSpec::DiagonalConstant(_) = &self.0.spec {
            return Ok(MetricJet {
                at,
                d1: vec![vec![0.0; n * n]; n],
                d2: vec![vec![vec![0.0; n * n]; n]; n],
            });
        }
        let jets = self.jets();
        let expand = |upper: &[Expr]| -> Result<Vec<f64>> {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let v = Self::real_entry(&upper[upper_index(n, i, j)], pt)?;
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
            Ok(m)
        };
        let d1 = jets
            .d1
            .iter()
            .map(|u| expand(u))
            .collect::<Result<Vec<_>>>()?;
        let d2 = if second {
            jets.d2
                .iter()
                .map(|row| row.iter().map(|u| expand(u)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(MetricJet { at, d1, d2 })
    }
}

#[derive(Debug)]
struct ChartInner {
    names: Vec<String>,
    metric: Metric,
}

/// An n-dimensional coordinate chart with named coordinates and a metric.
#[derive(Debug, Clone)]
pub struct Chart(Arc<ChartInner>);

impl PartialEq for Chart {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

impl Chart {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>, metric: Metric) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() > MAX_DIM {
            return Err(Error::Chart(format!(
                "dimension must be in 1..={MAX_DIM}, got {}",
                names.len()
            )));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(Error::Chart(format!("duplicate coordinate name `{n}`")));
            }
        }
        if metric.dim() != names.len() {
            return Err(Error::Chart(format!(
                "metric has dimension {}, chart has {} coordinates",
                metric.dim(),
                names.len()
            )));
        }
        Ok(Chart(Arc::new(ChartInner { names, metric })))
    }

    /// Minkowski space with coordinates (x, y, z, xi), signature (-,-,-,+).
    pub fn minkowski4() -> Self {
        Chart::new(["x", "y", "z", "xi"], Metric::minkowski(4)).expect("valid chart")
    }

    pub fn dim(&self) -> usize {
        self.0.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0.names
    }

    pub fn metric(&self) -> &Metric {
        &self.0.metric
    }

    pub fn coord(&self, name: &str) -> Option<Expr> {
        self.index_of(name).map(Expr::coord)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.names.iter().position(|n| n == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_index_is_dense() {
        for n in 1..=MAX_DIM {
            let mut seen = Vec::new();
            for i in 0..n {
                for j in i..n {
                    seen.push(upper_index(n, i, j));
                    assert_eq!(upper_index(n, i, j), upper_index(n, j, i));
                }
            }
            let want: Vec<usize> = (0..n * (n + 1) / 2).collect();
            assert_eq!(seen, want);
        }
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(["x", "x"], Metric::euclidean(2)).is_err());
        assert!(Chart::new(["x", "y"], Metric::euclidean(3)).is_err());
        let nine: Vec<String> = (0..9).map(|i| format!("c{i}")).collect();
        assert!(Chart::new(nine, Metric::euclidean(9)).is_err());
        assert!(Metric::diagonal(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn singular_metric_detected() {
        let th = Expr::coord(0);
        let m = Metric::from_rows(vec![
            vec![Expr::one(), Expr::zero()],
            vec![Expr::zero(), th.sin().powi(2)],
        ])
        .unwrap();
        assert_eq!(m.at(&[0.0, 1.0]), Err(Error::SingularMetric));
        let at = m.at(&[1.0, 1.0]).unwrap();
        assert!((at.inv(1, 1) - 1.0 / 1f64.sin().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn minkowski_constant() {
        let at = Chart::minkowski4().metric().constant().unwrap();
        assert_eq!(at.g(0, 0), -1.0);
        assert_eq!(at.g(3, 3), 1.0);
        assert_eq!(at.det(), -1.0);
    }
}
