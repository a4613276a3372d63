//! Levi-Civita Christoffel symbols, Riemann and Ricci tensors from a metric.
//!
//! `Γ^λ_{μν} = ½ g^{λρ}(∂_μ g_{ρν} + ∂_ν g_{ρμ} - ∂_ρ g_{μν})`,
//! `R^ρ_{σμν} = ∂_μΓ^ρ_{νσ} - ∂_νΓ^ρ_{μσ} + Γ^ρ_{μλ}Γ^λ_{νσ} - Γ^ρ_{νλ}Γ^λ_{μσ}`,
//! `R_{σν} = R^μ_{σμν}`.

use crate::chart::{Metric, MetricJet};
use crate::error::Result;

/// `Γ^λ_{μν}` at a point, stored as `gamma[(λ n + μ) n + ν]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffels {
    n: usize,
    gamma: Vec<f64>,
}

impl Christoffels {
    pub fn zero(n: usize) -> Self {
        Christoffels {
            n,
            gamma: vec![0.0; n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, l: usize, m: usize, nu: usize) -> f64 {
        self.gamma[(l * self.n + m) * self.n + nu]
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|v| *v == 0.0)
    }

    /// `Γ^μ_{σν} a^σ b^ν`.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|mu| {
                let mut s = 0.0;
                for sg in 0..n {
                    for nu in 0..n {
                        s += self.get(mu, sg, nu) * a[sg] * b[nu];
                    }
                }
                s
            })
            .collect()
    }
}

fn gamma_from_jet(jet: &MetricJet) -> Christoffels {
    let n = jet.at.dim();
    let dg = |a: usize, i: usize, j: usize| jet.d1[a][i * n + j];
    let mut gamma = vec![0.0; n * n * n];
    for l in 0..n {
        for m in 0..n {
            for nu in m..n {
                let mut s = 0.0;
                for r in 0..n {
                    let inv = jet.at.inv(l, r);
                    if inv != 0.0 {
                        s += inv * (dg(m, r, nu) + dg(nu, r, m) - dg(r, m, nu));
                    }
                }
                gamma[(l * n + m) * n + nu] = 0.5 * s;
                gamma[(l * n + nu) * n + m] = 0.5 * s;
            }
        }
    }
    Christoffels { n, gamma }
}

pub fn christoffels_at(metric: &Metric, pt: &[f64]) -> Result<Christoffels> {
    if metric.is_constant() {
        metric.at(pt)?;
        return Ok(Christoffels::zero(metric.dim()));
    }
    Ok(gamma_from_jet(&metric.jet(pt, false)?))
}

/// `∂_a Γ^λ_{μν}` stored as `d[a][(λ n + μ) n + ν]`.
fn gamma_derivatives(jet: &MetricJet) -> Vec<Vec<f64>> {
    let n = jet.at.dim();
    let dg = |a: usize, i: usize, j: usize| jet.d1[a][i * n + j];
    let ddg = |a: usize, b: usize, i: usize, j: usize| jet.d2[a][b][i * n + j];
    (0..n)
        .map(|a| {
            // ∂_a g^{λρ} = -g^{λα} ∂_a g_{αβ} g^{βρ}
            let mut dinv = vec![0.0; n * n];
            for l in 0..n {
                for r in 0..n {
                    let mut s = 0.0;
                    for al in 0..n {
                        let gi = jet.at.inv(l, al);
                        if gi == 0.0 {
                            continue;
                        }
                        for be in 0..n {
                            s += gi * dg(a, al, be) * jet.at.inv(be, r);
                        }
                    }
                    dinv[l * n + r] = -s;
                }
            }
            let mut out = vec![0.0; n * n * n];
            for l in 0..n {
                for m in 0..n {
                    for nu in m..n {
                        let mut s = 0.0;
                        for r in 0..n {
                            let first = dg(m, r, nu) + dg(nu, r, m) - dg(r, m, nu);
                            let second = ddg(a, m, r, nu) + ddg(a, nu, r, m) - ddg(a, r, m, nu);
                            s += dinv[l * n + r] * first + jet.at.inv(l, r) * second;
                        }
                        out[(l * n + m) * n + nu] = 0.5 * s;
                        out[(l * n + nu) * n + m] = 0.5 * s;
                    }
                }
            }
            out
        })
        .collect()
}

/// `R^ρ_{σμν}` at a point, stored as `r[((ρ n + σ) n + μ) n + ν]`.
#[derive(Debug, Clone)]
pub struct Riemann {
    n: usize,
    r: Vec<f64>,
}

impl Riemann {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, rho: usize, sigma: usize, mu: usize, nu: usize) -> f64 {
        let n = self.n;
        self.r[((rho * n + sigma) * n + mu) * n + nu]
    }

    /// `R_{σν} = R^μ_{σμν}`, row-major `n × n`.
    pub fn ricci(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for s in 0..n {
            for nu in 0..n {
                out[s * n + nu] = (0..n).map(|m| self.get(m, s, m, nu)).sum();
            }
        }
        out
    }
}

pub fn riemann_at(metric: &Metric, pt: &[f64]) -> Result<Riemann> {
    let n = metric.dim();
    if metric.is_constant() {
        metric.at(pt)?;
        return Ok(Riemann {
            n,
            r: vec![0.0; n * n * n * n],
        });
    }
    let jet = metric.jet(pt, true)?;
    let g = gamma_from_jet(&jet);
    let dg = gamma_derivatives(&jet);
    let mut r = vec![0.0; n * n * n * n];
    for rho in 0..n {
        for s in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let mut v = dg[mu][(rho * n + nu) * n + s] - dg[nu][(rho * n + mu) * n + s];
                    for l in 0..n {
                        v += g.get(rho, mu, l) * g.get(l, nu, s) - g.get(rho, nu, l) * g.get(l, mu, s);
                    }
                    r[((rho * n + s) * n + mu) * n + nu] = v;
                }
            }
        }
    }
    Ok(Riemann { n, r })
}

pub fn ricci_at(metric: &Metric, pt: &[f64]) -> Result<Vec<f64>> {
    Ok(riemann_at(metric, pt)?.ricci())
}

/// Largest `|∇_a g_{bc}| = |∂_a g_{bc} - Γ^λ_{ab} g_{λc} - Γ^λ_{ac} g_{bλ}|` at a point.
pub fn metricity_at(metric: &Metric, pt: &[f64]) -> Result<f64> {
    let n = metric.dim();
    let jet = metric.jet(pt, false)?;
    let g = gamma_from_jet(&jet);
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut v = jet.d1[a][b * n + c];
                for l in 0..n {
                    v -= g.get(l, a, b) * jet.at.g(l, c) + g.get(l, a, c) * jet.at.g(b, l);
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn sphere() -> Metric {
        let th = Expr::coord(0);
        let s = th.sin();
        Metric::from_rows(vec![
            vec![Expr::one(), Expr::zero()],
            vec![Expr::zero(), &s * &s],
        ])
        .unwrap()
    }

    #[test]
    fn constant_metric_has_no_christoffels() {
        let g = christoffels_at(&Metric::minkowski(4), &[0.0; 4]).unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn sphere_christoffels() {
        let th: f64 = 0.7;
        let g = christoffels_at(&sphere(), &[th, 0.3]).unwrap();
        assert!((g.get(0, 1, 1) + th.sin() * th.cos()).abs() < 1e-14);
        assert!((g.get(1, 0, 1) - th.cos() / th.sin()).abs() < 1e-14);
        assert!((g.get(1, 1, 0) - th.cos() / th.sin()).abs() < 1e-14);
        assert_eq!(g.get(0, 0, 0), 0.0);
    }

    #[test]
    fn sphere_ricci_equals_metric() {
        for th in [0.3, 1.1, 2.5] {
            let r = ricci_at(&sphere(), &[th, 0.0]).unwrap();
            let s2 = f64::sin(th).powi(2);
            assert!((r[0] - 1.0).abs() < 1e-12);
            assert!((r[3] - s2).abs() < 1e-12);
            assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
        }
    }
}
