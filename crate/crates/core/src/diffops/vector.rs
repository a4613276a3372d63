//! Vector-field operators: Lie bracket, covariant derivative along a field,
//! and the projected Lie derivative of a distribution.

use crate::chart::Metric;
use crate::error::{Error, Result};
use crate::expr::{Expr, C64};

use super::riemann::christoffels_at;

const IDEMPOTENCY_TOL: f64 = 1e-10;

/// Components `u^μ` with their symbolic Jacobian `∂_ν u^μ`.
#[derive(Debug, Clone)]
pub struct VectorField {
    comps: Vec<Expr>,
    jac: Vec<Vec<Expr>>,
}

impl VectorField {
    pub fn new(comps: Vec<Expr>) -> Self {
        let n = comps.len();
        let jac = comps
            .iter()
            .map(|c| (0..n).map(|nu| c.diff(nu)).collect())
            .collect();
        VectorField { comps, jac }
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn comps(&self) -> &[Expr] {
        &self.comps
    }

    pub fn eval(&self, pt: &[f64]) -> Result<Vec<C64>> {
        Ok(self
            .comps
            .iter()
            .map(|c| c.eval(pt))
            .collect::<Result<Vec<_>, _>>()?)
    }

    /// `J[μ][ν] = ∂_ν u^μ` at a point.
    pub fn jacobian_at(&self, pt: &[f64]) -> Result<Vec<Vec<C64>>> {
        self.jac
            .iter()
            .map(|row| row.iter().map(|e| Ok(e.eval(pt)?)).collect())
            .collect()
    }

    /// `(∇u)^μ_ν = ∂_ν u^μ + Γ^μ_{νσ} u^σ` at a point.
    pub fn covariant_jacobian_at(&self, metric: &Metric, pt: &[f64]) -> Result<Vec<Vec<C64>>> {
        let n = self.dim();
        let mut j = self.jacobian_at(pt)?;
        let gamma = christoffels_at(metric, pt)?;
        if !gamma.is_zero() {
            let u = self.eval(pt)?;
            for (mu, row) in j.iter_mut().enumerate() {
                for (nu, v) in row.iter_mut().enumerate() {
                    for (s, us) in u.iter().enumerate() {
                        *v += gamma.get(mu, nu, s) * us;
                    }
                }
            }
        }
        debug_assert_eq!(j.len(), n);
        Ok(j)
    }
}

/// `[X,Y]^μ = X^ν ∂_ν Y^μ - Y^ν ∂_ν X^μ`.
pub fn lie_bracket(x: &[Expr], y: &[Expr]) -> Result<Vec<Expr>> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "bracket of fields with {} and {} components",
            x.len(),
            y.len()
        )));
    }
    let n = x.len();
    Ok((0..n)
        .map(|mu| {
            let mut acc = Expr::zero();
            for nu in 0..n {
                acc = acc + &x[nu] * &y[mu].diff(nu) - &y[nu] * &x[mu].diff(nu);
            }
            acc
        })
        .collect())
}

/// `(∇_X u)^μ = X^ν ∂_ν u^μ + Γ^μ_{νσ} X^ν u^σ` at a point.
pub fn nabla_x(metric: &Metric, x: &[Expr], u: &VectorField, pt: &[f64]) -> Result<Vec<C64>> {
    if x.len() != u.dim() || metric.dim() != u.dim() {
        return Err(Error::Dimension("nabla needs fields on the metric's chart".into()));
    }
    let xv = x.iter().map(|e| e.eval(pt)).collect::<Result<Vec<_>, _>>()?;
    let j = u.covariant_jacobian_at(metric, pt)?;
    Ok(j
        .iter()
        .map(|row| row.iter().zip(&xv).map(|(a, b)| a * b).sum())
        .collect())
}

/// `Y ↦ π([X, Y])` for a pointwise projection matrix `π`.
#[derive(Debug, Clone)]
pub struct ProjectedLie {
    pi: Vec<Vec<Expr>>,
    x: Vec<Expr>,
}

impl ProjectedLie {
    pub fn new(pi: Vec<Vec<Expr>>, x: Vec<Expr>) -> Result<Self> {
        let n = x.len();
        if pi.len() != n || pi.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension(format!("projection must be {n}×{n}")));
        }
        Ok(ProjectedLie { pi, x })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn projection(&self) -> &[Vec<Expr>] {
        &self.pi
    }

    pub fn field(&self) -> &[Expr] {
        &self.x
    }

    pub fn pi_at(&self, pt: &[f64]) -> Result<Vec<Vec<C64>>> {
        self.pi
            .iter()
            .map(|row| row.iter().map(|e| Ok(e.eval(pt)?)).collect())
            .collect()
    }

    /// Fails with `NonIdempotentProjection` when `π² ≠ π` at the point.
    pub fn check_idempotent(&self, pt: &[f64]) -> Result<()> {
        let p = self.pi_at(pt)?;
        let n = p.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let sq: C64 = (0..n).map(|k| p[i][k] * p[k][j]).sum();
                worst = worst.max((sq - p[i][j]).norm());
            }
        }
        if worst > IDEMPOTENCY_TOL {
            return Err(Error::NonIdempotentProjection(worst));
        }
        Ok(())
    }

    /// The symbolic bracket `[X, Y]`, to be projected pointwise.
    pub fn bracket_with(&self, y: &[Expr]) -> Result<Vec<Expr>> {
        lie_bracket(&self.x, y)
    }

    pub fn project_at(&self, v: &[C64], pt: &[f64]) -> Result<Vec<C64>> {
        let p = self.pi_at(pt)?;
        Ok(p.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn apply_at(&self, y: &[Expr], pt: &[f64]) -> Result<Vec<C64>> {
        self.check_idempotent(pt)?;
        let br = self
            .bracket_with(y)?
            .iter()
            .map(|e| e.eval(pt))
            .collect::<Result<Vec<_>, _>>()?;
        self.project_at(&br, pt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::coord(i)
    }

    fn c(v: f64) -> Expr {
        Expr::real(v)
    }

    fn evalv(v: &[Expr], pt: &[f64]) -> Vec<C64> {
        v.iter().map(|e| e.eval(pt).unwrap()).collect()
    }

    #[test]
    fn bracket_examples() {
        let dx = vec![c(1.0), c(0.0), c(0.0)];
        let dy = vec![c(0.0), c(1.0), c(0.0)];
        let xdz = vec![c(0.0), c(0.0), x(0)];
        let pt = [0.4, -1.0, 2.0];
        assert!(evalv(&lie_bracket(&dx, &dy).unwrap(), &pt).iter().all(|v| v.norm() == 0.0));
        assert_eq!(
            evalv(&lie_bracket(&dx, &xdz).unwrap(), &pt),
            vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
        );
    }

    #[test]
    fn nabla_of_linear_field() {
        let u = VectorField::new(vec![c(0.0), c(0.0), x(2), c(0.0)]);
        let r = nabla_x(&Metric::minkowski(4), u.comps(), &u, &[0.0, 0.0, 3.0, 0.0]).unwrap();
        assert_eq!(r[2], C64::new(3.0, 0.0));
    }

    fn heisenberg_pi() -> Vec<Vec<Expr>> {
        vec![
            vec![c(0.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), c(0.0)],
            vec![c(0.0), -x(0), c(1.0)],
        ]
    }

    #[test]
    fn projected_lie_heisenberg() {
        let p = ProjectedLie::new(heisenberg_pi(), vec![c(1.0), c(0.0), c(0.0)]).unwrap();
        let y = vec![c(0.0), c(1.0), x(0)];
        let r = p.apply_at(&y, &[0.7, 0.2, -0.3]).unwrap();
        assert_eq!(r, vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
    }

    #[test]
    fn projected_lie_integrable() {
        let p = ProjectedLie::new(heisenberg_pi(), vec![c(1.0), c(0.0), c(0.0)]).unwrap();
        let r = p.apply_at(&[c(0.0), c(1.0), c(0.0)], &[0.7, 0.2, -0.3]).unwrap();
        assert!(r.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn rejects_non_idempotent() {
        let pi = vec![
            vec![c(2.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), c(0.0)],
        ];
        let p = ProjectedLie::new(pi, vec![c(1.0), c(0.0), c(0.0)]).unwrap();
        assert!(matches!(
            p.apply_at(&[c(0.0), c(0.0), c(0.0)], &[0.0; 3]),
            Err(Error::NonIdempotentProjection(_))
        ));
    }
}
