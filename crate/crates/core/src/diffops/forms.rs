//! Exterior derivative, covariant exterior derivative and curvature.

use crate::error::{Error, Result};
use crate::expr::{Expr, C64};
use crate::exterior::{AlternatingTensor, Form, MultiIndex, Variance};
use crate::values::{LieStructure, ValueSpace, ValuedForm};

/// `dω = Σ_I Σ_a ∂_a ω_I dx^a ∧ dx^I`.
pub fn d(w: &Form<Expr>) -> Result<Form<Expr>> {
    if w.variance() != Variance::Covariant {
        return Err(Error::Variance("exterior derivative acts on forms".into()));
    }
    let n = w.dim();
    if w.degree() >= n {
        return Err(Error::Degree(format!(
            "d of a {}-form overflows dimension {n}",
            w.degree()
        )));
    }
    let mut out = AlternatingTensor::zero(n, w.degree() + 1, Variance::Covariant);
    for (idx, e) in w.components() {
        for a in 0..n {
            if idx.contains(a) {
                continue;
            }
            let de = e.diff(a);
            if de.is_zero() {
                continue;
            }
            let da = MultiIndex::single(a);
            let sign = da.merge_sign(*idx).expect("disjoint");
            let term = if sign < 0.0 { -de } else { de };
            out.add_to(da.union(*idx), &term);
        }
    }
    Ok(out)
}

/// `d(ψ^i ⊗ E_i) = dψ^i ⊗ E_i`.
pub fn exterior_d(psi: &ValuedForm<Expr>) -> Result<ValuedForm<Expr>> {
    let parts = psi.parts().iter().map(d).collect::<Result<Vec<_>>>()?;
    ValuedForm::from_parts(psi.space().clone(), parts)
}

/// `[a ∧ b]^m = C^m_jk a^j ∧ b^k`.
pub fn bracket_wedge(lie: &LieStructure, a: &ValuedForm<Expr>, b: &ValuedForm<Expr>) -> Result<Vec<Form<Expr>>> {
    let r = lie.dim();
    if a.space().dim() != r || b.space().dim() != r {
        return Err(Error::Dimension(format!(
            "bracket needs values in a {r}-dimensional algebra"
        )));
    }
    let n = a.dim();
    let mut out = vec![AlternatingTensor::zero(n, a.degree() + b.degree(), Variance::Covariant); r];
    for j in 0..r {
        if a.part(j).is_zero() {
            continue;
        }
        for k in 0..r {
            if b.part(k).is_zero() {
                continue;
            }
            let w = a.part(j).wedge(b.part(k))?;
            for (m, o) in out.iter_mut().enumerate() {
                let c = lie.c(j, k, m);
                if c != 0.0 {
                    *o = o.add(&w.scale(C64::new(c, 0.0)))?;
                }
            }
        }
    }
    Ok(out)
}

/// A connection on the value bundle.
#[derive(Debug, Clone)]
pub enum ConnectionForm {
    /// `ω = ω^j ⊗ E_j` on a Lie algebra; `DΨ = dΨ + [ω, Ψ]`.
    Lie(ValuedForm<Expr>),
    /// Matrix of 1-forms `A^i_j = Γ^i_{μj} dx^μ`; `(DΨ)^i = dψ^i + (-1)^p ψ^j ∧ A^i_j`.
    Linear(Vec<Vec<Form<Expr>>>),
}

impl ConnectionForm {
    pub fn lie(omega: ValuedForm<Expr>) -> Result<Self> {
        if omega.space().lie().is_none() {
            return Err(Error::Lie("connection form needs values in a Lie algebra".into()));
        }
        if omega.degree() != 1 || omega.variance() != Variance::Covariant {
            return Err(Error::Degree("connection form must be a 1-form".into()));
        }
        Ok(ConnectionForm::Lie(omega))
    }

    /// Reads `A^i_j` from a 1-form with `r²` value labels in row-major `(i, j)` order.
    pub fn linear_from_valued(a: &ValuedForm<Expr>, r: usize) -> Result<Self> {
        if a.space().dim() != r * r {
            return Err(Error::Dimension(format!(
                "linear connection on rank {r} needs {} value labels, got {}",
                r * r,
                a.space().dim()
            )));
        }
        if a.degree() != 1 || a.variance() != Variance::Covariant {
            return Err(Error::Degree("connection form must be a 1-form".into()));
        }
        let m = (0..r)
            .map(|i| (0..r).map(|j| a.part(i * r + j).clone()).collect())
            .collect();
        Ok(ConnectionForm::Linear(m))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConnectionForm::Lie(w) => w.dim(),
            ConnectionForm::Linear(m) => m.first().and_then(|r| r.first()).map_or(0, |f| f.dim()),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            ConnectionForm::Lie(w) => w.space().dim(),
            ConnectionForm::Linear(m) => m.len(),
        }
    }
}

pub fn covariant_d(conn: &ConnectionForm, psi: &ValuedForm<Expr>) -> Result<ValuedForm<Expr>> {
    if conn.rank() != psi.space().dim() {
        return Err(Error::Dimension(format!(
            "connection of rank {} on values of dimension {}",
            conn.rank(),
            psi.space().dim()
        )));
    }
    if conn.dim() != psi.dim() {
        return Err(Error::Dimension("connection and form live on different charts".into()));
    }
    let dpsi = exterior_d(psi)?;
    let extra = match conn {
        ConnectionForm::Lie(omega) => {
            let lie = omega
                .space()
                .lie()
                .ok_or_else(|| Error::Lie("connection form needs values in a Lie algebra".into()))?;
            bracket_wedge(lie, omega, psi)?
        }
        ConnectionForm::Linear(a) => {
            let r = a.len();
            let p = psi.degree();
            let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut out = Vec::with_capacity(r);
            for row in a {
                let mut acc = AlternatingTensor::zero(psi.dim(), p + 1, Variance::Covariant);
                for (j, aij) in row.iter().enumerate() {
                    if aij.is_zero() || psi.part(j).is_zero() {
                        continue;
                    }
                    acc = acc.add(&psi.part(j).wedge(aij)?)?;
                }
                out.push(acc.scale(C64::new(sign, 0.0)));
            }
            out
        }
    };
    let parts = dpsi
        .parts()
        .iter()
        .zip(&extra)
        .map(|(a, b)| a.add(b))
        .collect::<Result<Vec<_>>>()?;
    ValuedForm::from_parts(psi.space().clone(), parts)
}

/// `Ω = dω + ½[ω ∧ ω]`.
pub fn curvature(omega: &ValuedForm<Expr>) -> Result<ValuedForm<Expr>> {
    let lie = omega
        .space()
        .lie()
        .ok_or_else(|| Error::Lie("curvature needs a Lie-algebra-valued connection".into()))?;
    let dw = exterior_d(omega)?;
    let br = bracket_wedge(lie, omega, omega)?;
    let parts = dw
        .parts()
        .iter()
        .zip(&br)
        .map(|(a, b)| a.add(&b.scale(C64::new(0.5, 0.0))))
        .collect::<Result<Vec<_>>>()?;
    ValuedForm::from_parts(omega.space().clone(), parts)
}

/// Builds a scalar-valued form from `(indices, coefficient)` pairs.
pub fn form_from(dim: usize, degree: usize, terms: Vec<(&[usize], Expr)>) -> Result<Form<Expr>> {
    let comps = terms
        .into_iter()
        .map(|(ix, e)| Ok((MultiIndex::from_indices(ix)?, e)))
        .collect::<Result<Vec<_>>>()?;
    AlternatingTensor::from_components(dim, degree, Variance::Covariant, comps)
}

/// Packs scalar-valued forms into a form valued in `space`.
pub fn valued(space: &ValueSpace, parts: Vec<Form<Expr>>) -> Result<ValuedForm<Expr>> {
    ValuedForm::from_parts(space.clone(), parts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::coord(i)
    }

    fn eval_all(f: &Form<Expr>, pt: &[f64]) -> Vec<C64> {
        f.map(|e| e.eval(pt)).unwrap().dense()
    }

    #[test]
    fn d_of_x_dy() {
        let w = form_from(4, 1, vec![(&[1], x(0))]).unwrap();
        let dw = d(&w).unwrap();
        let expect = form_from(4, 2, vec![(&[0, 1], Expr::one())]).unwrap();
        assert_eq!(eval_all(&dw, &[0.3; 4]), eval_all(&expect, &[0.3; 4]));
    }

    #[test]
    fn plane_wave_field_is_closed() {
        // F = sin(z-xi) (dz∧dx - dxi∧dx) = -sin(z-xi) dx∧dz + sin(z-xi) dx∧dxi
        let s = (x(2) - x(3)).sin();
        let f = form_from(4, 2, vec![(&[0, 2], -s.clone()), (&[0, 3], s)]).unwrap();
        let df = d(&f).unwrap();
        for pt in [[0.1, 0.2, 0.3, 0.4], [-1.0, 2.0, 0.5, -0.7]] {
            assert!(eval_all(&df, &pt).iter().all(|v| v.norm() < 1e-14));
        }
    }

    #[test]
    fn d_at_top_degree_is_an_error() {
        let w = form_from(2, 2, vec![(&[0, 1], x(0))]).unwrap();
        assert!(matches!(d(&w), Err(Error::Degree(_))));
    }

    #[test]
    fn su2_covariant_derivative_placement() {
        // ω = x dξ ⊗ e3, Ψ = dy ⊗ e1: DΨ = ω^3 ∧ ψ^1 C^2_31 e2 = x dξ∧dy e2 = -x dy∧dξ e2
        let lie = LieStructure::su2();
        let g = ValueSpace::lie_algebra(lie);
        let z = || AlternatingTensor::<Expr>::zero(4, 1, Variance::Covariant);
        let omega = valued(&g, vec![z(), z(), form_from(4, 1, vec![(&[3], x(0))]).unwrap()]).unwrap();
        let psi = valued(&g, vec![form_from(4, 1, vec![(&[1], Expr::one())]).unwrap(), z(), z()]).unwrap();
        let dpsi = covariant_d(&ConnectionForm::lie(omega).unwrap(), &psi).unwrap();
        let pt = [1.5, 0.0, 0.0, 0.0];
        let v = dpsi.eval(&pt).unwrap();
        assert!(v.part(0).is_zero() && v.part(2).is_zero());
        let dy_dxi = MultiIndex::from_indices(&[1, 3]).unwrap();
        assert_eq!(v.part(1).get(dy_dxi), C64::new(-1.5, 0.0));
        assert_eq!(v.part(1).components().count(), 1);
    }

    #[test]
    fn abelian_connection_reduces_to_d() {
        let lie = LieStructure::abelian(2);
        let g = ValueSpace::lie_algebra(lie);
        let omega = valued(
            &g,
            vec![
                form_from(3, 1, vec![(&[0], x(1) * x(2))]).unwrap(),
                form_from(3, 1, vec![(&[2], x(0).sin())]).unwrap(),
            ],
        )
        .unwrap();
        let psi = valued(
            &g,
            vec![
                form_from(3, 1, vec![(&[1], x(0) * x(0))]).unwrap(),
                form_from(3, 1, vec![(&[0], x(2).exp())]).unwrap(),
            ],
        )
        .unwrap();
        let a = covariant_d(&ConnectionForm::lie(omega).unwrap(), &psi).unwrap();
        let b = exterior_d(&psi).unwrap();
        let pt = [0.3, -0.2, 0.9];
        let (va, vb) = (a.eval(&pt).unwrap().dense(), b.eval(&pt).unwrap().dense());
        for (p, q) in va.iter().zip(&vb) {
            assert!((p - q).norm() < 1e-14);
        }
    }

    #[test]
    fn linear_connection_sign() {
        // rank 1, A = x dy, Ψ = dz (p = 1): DΨ = d(dz) - dz∧(x dy) = x dy∧dz
        let space = ValueSpace::new(["s"], false).unwrap();
        let a = valued(&space, vec![form_from(3, 1, vec![(&[1], x(0))]).unwrap()]).unwrap();
        let psi = valued(&space, vec![form_from(3, 1, vec![(&[2], Expr::one())]).unwrap()]).unwrap();
        let conn = ConnectionForm::linear_from_valued(&a, 1).unwrap();
        let v = covariant_d(&conn, &psi).unwrap().eval(&[2.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.part(0).get(MultiIndex::from_indices(&[1, 2]).unwrap()), C64::new(2.0, 0.0));
    }

    #[test]
    fn curvature_of_pure_gauge_like_example() {
        // ω = x dy ⊗ E1 + dz ⊗ E2 on su(2): Ω^3 = ½(C^3_12 ω^1∧ω^2 + C^3_21 ω^2∧ω^1) = x dy∧dz
        let lie = LieStructure::su2();
        let g = ValueSpace::lie_algebra(lie);
        let omega = valued(
            &g,
            vec![
                form_from(3, 1, vec![(&[1], x(0))]).unwrap(),
                form_from(3, 1, vec![(&[2], Expr::one())]).unwrap(),
                AlternatingTensor::zero(3, 1, Variance::Covariant),
            ],
        )
        .unwrap();
        let om = curvature(&omega).unwrap().eval(&[3.0, 0.0, 0.0]).unwrap();
        assert_eq!(om.part(0).get(MultiIndex::from_indices(&[0, 1]).unwrap()), C64::new(1.0, 0.0));
        assert_eq!(om.part(2).get(MultiIndex::from_indices(&[1, 2]).unwrap()), C64::new(3.0, 0.0));
        assert!(om.part(1).is_zero());
    }
}
