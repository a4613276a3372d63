//! Schrödinger and Dirac operators.

use crate::error::{Error, Result};
use crate::expr::{Expr, C64};
use crate::exterior::{Form, MultiIndex};

/// `H = -ħ²/2m Δ + V`; the last chart coordinate is time.
#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    pub hbar: f64,
    pub mass: f64,
    pub potential: Expr,
}

impl HamiltonianSpec {
    pub fn new(hbar: f64, mass: f64, potential: Expr) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "hbar".into(),
                reason: "must be positive".into(),
            });
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mass".into(),
                reason: "must be positive".into(),
            });
        }
        Ok(HamiltonianSpec { hbar, mass, potential })
    }
}

/// `iħ ∂_t ψ - (-ħ²/2m Δψ + Vψ)` on a chart of dimension `dim` with time last.
pub fn schrodinger_apply(h: &HamiltonianSpec, psi: &Expr, dim: usize) -> Result<Expr> {
    if dim < 2 {
        return Err(Error::Dimension("Schrödinger operator needs space and time coordinates".into()));
    }
    if h.potential.max_coord().is_some_and(|c| c + 1 >= dim) {
        return Err(Error::InvalidParameter {
            name: "potential".into(),
            reason: "potential may only depend on spatial coordinates".into(),
        });
    }
    let t = dim - 1;
    let mut lap = Expr::zero();
    for k in 0..t {
        lap = lap + psi.diff(k).diff(k);
    }
    let dt = Expr::constant(C64::new(0.0, h.hbar)) * psi.diff(t);
    let kinetic = Expr::real(h.hbar * h.hbar / (2.0 * h.mass)) * lap;
    Ok(dt + kinetic - &h.potential * psi)
}

/// Sign in front of `m` in the reduced residual `iγ^μ∂_μψ ∓ mψ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiracSign {
    /// `iγ^μ∂_μψ - mψ`
    Minus,
    /// `iγ^μ∂_μψ + mψ`
    Plus,
}

impl DiracSign {
    /// Coefficient of `½ m γ^{-1}` inside the first-order operator.
    pub fn operator_coefficient(self) -> f64 {
        match self {
            DiracSign::Minus => 1.0,
            DiracSign::Plus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DiracSign::Minus => "minus",
            DiracSign::Plus => "plus",
        }
    }
}

pub type Mat4 = [[C64; 4]; 4];

fn zero4() -> Mat4 {
    [[C64::new(0.0, 0.0); 4]; 4]
}

fn mul4(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = zero4();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

/// Four lower-index gamma matrices on Minkowski space with signature (-,-,-,+),
/// time last, plus the mass, sign and optional electromagnetic coupling.
#[derive(Debug, Clone)]
pub struct GammaSystem {
    gammas: [Mat4; 4],
    inverses: [Mat4; 4],
    eta: [f64; 4],
    pub mass: f64,
    pub sign: DiracSign,
    pub charge: f64,
    pub potential: Option<Form<Expr>>,
}

impl GammaSystem {
    /// Dirac representation: `γ_4 = diag(1,1,-1,-1)`, `γ^k = [[0, σ_k], [-σ_k, 0]]`, `γ_k = -γ^k`.
    pub fn dirac(mass: f64, sign: DiracSign) -> Result<Self> {
        let o = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let sigma = [
            [[o, one], [one, o]],
            [[o, -i], [i, o]],
            [[one, o], [o, -one]],
        ];
        let mut gammas = [zero4(); 4];
        for (k, s) in sigma.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    // lower index: γ_k = -γ^k
                    gammas[k][a][b + 2] = -s[a][b];
                    gammas[k][a + 2][b] = s[a][b];
                }
            }
        }
        gammas[3] = [
            [one, o, o, o],
            [o, one, o, o],
            [o, o, -one, o],
            [o, o, o, -one],
        ];
        GammaSystem::from_matrices(gammas, mass, sign)
    }

    pub fn from_matrices(gammas: [Mat4; 4], mass: f64, sign: DiracSign) -> Result<Self> {
        let eta = [-1.0, -1.0, -1.0, 1.0];
        let mut inverses = [zero4(); 4];
        for (mu, g) in gammas.iter().enumerate() {
            // γ_μ² = η_μμ I under the Clifford relation, so γ_μ⁻¹ = η_μμ γ_μ.
            for a in 0..4 {
                for b in 0..4 {
                    inverses[mu][a][b] = g[a][b] * eta[mu];
                }
            }
        }
        let gs = GammaSystem {
            gammas,
            inverses,
            eta,
            mass,
            sign,
            charge: 0.0,
            potential: None,
        };
        gs.check()?;
        Ok(gs)
    }

    pub fn with_field(mut self, charge: f64, potential: Form<Expr>) -> Result<Self> {
        if potential.degree() != 1 || potential.dim() != 4 {
            return Err(Error::Degree("electromagnetic potential must be a 1-form on a 4-chart".into()));
        }
        self.charge = charge;
        self.potential = Some(potential);
        Ok(self)
    }

    /// Verifies `γ_μγ_ν + γ_νγ_μ = 2η_μν I`, `γ_μ γ_μ⁻¹ = I` and `η^{μν}γ_μγ_ν⁻¹ = -2I` exactly.
    pub fn check(&self) -> Result<()> {
        for mu in 0..4 {
            for nu in 0..4 {
                let a = mul4(&self.gammas[mu], &self.gammas[nu]);
                let b = mul4(&self.gammas[nu], &self.gammas[mu]);
                for i in 0..4 {
                    for j in 0..4 {
                        let want = if i == j && mu == nu { 2.0 * self.eta[mu] } else { 0.0 };
                        if a[i][j] + b[i][j] != C64::new(want, 0.0) {
                            return Err(Error::GammaConvention(format!(
                                "anticommutator of γ_{} and γ_{} differs from 2η",
                                mu + 1,
                                nu + 1
                            )));
                        }
                    }
                }
            }
            let id = mul4(&self.gammas[mu], &self.inverses[mu]);
            for i in 0..4 {
                for j in 0..4 {
                    if id[i][j] != C64::new(if i == j { 1.0 } else { 0.0 }, 0.0) {
                        return Err(Error::GammaConvention(format!("γ_{} is not invertible", mu + 1)));
                    }
                }
            }
        }
        let mut trace = zero4();
        for mu in 0..4 {
            let p = mul4(&self.gammas[mu], &self.inverses[mu]);
            for i in 0..4 {
                for j in 0..4 {
                    trace[i][j] += p[i][j] * self.eta[mu];
                }
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                if trace[i][j] != C64::new(if i == j { -2.0 } else { 0.0 }, 0.0) {
                    return Err(Error::GammaConvention("η^{μν}γ_μγ_ν⁻¹ differs from -2I".into()));
                }
            }
        }
        Ok(())
    }

    pub fn lower(&self, mu: usize) -> &Mat4 {
        &self.gammas[mu]
    }

    pub fn inverse(&self, mu: usize) -> &Mat4 {
        &self.inverses[mu]
    }

    /// `γ^μ = η^{μμ} γ_μ`.
    pub fn upper(&self, mu: usize) -> Mat4 {
        let mut m = self.gammas[mu];
        for row in m.iter_mut() {
            for v in row.iter_mut() {
                *v *= self.eta[mu];
            }
        }
        m
    }

    pub fn eta(&self, mu: usize) -> f64 {
        self.eta[mu]
    }
}

/// Reduced residual `iγ^μ(∂_μ + ieA_μ)ψ ∓ mψ`, component by component.
pub fn dirac_apply(gs: &GammaSystem, psi: &[Expr]) -> Result<Vec<Expr>> {
    if psi.len() != 4 {
        return Err(Error::Dimension(format!("Dirac spinor needs 4 components, got {}", psi.len())));
    }
    let mass_term = -gs.sign.operator_coefficient() * gs.mass;
    let mut out = Vec::with_capacity(4);
    for j in 0..4 {
        let mut acc = Expr::real(mass_term) * &psi[j];
        for mu in 0..4 {
            let up = gs.upper(mu);
            for (i, p) in psi.iter().enumerate() {
                let c = up[j][i];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut d = Expr::constant(C64::new(0.0, 1.0) * c) * p.diff(mu);
                if let Some(a) = &gs.potential {
                    let amu = a.get(MultiIndex::single(mu));
                    d = d - Expr::constant(c * gs.charge) * amu * p;
                }
                acc = acc + d;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> Expr {
        Expr::coord(i)
    }

    fn max_abs(v: &[Expr], pt: &[f64]) -> f64 {
        v.iter().map(|e| e.eval(pt).unwrap().norm()).fold(0.0, f64::max)
    }

    #[test]
    fn shipped_gammas_pass_startup_check() {
        GammaSystem::dirac(1.0, DiracSign::Minus).unwrap();
    }

    #[test]
    fn bad_gammas_rejected() {
        let mut g = GammaSystem::dirac(1.0, DiracSign::Minus).unwrap().gammas;
        g[0] = g[1];
        assert!(matches!(
            GammaSystem::from_matrices(g, 1.0, DiracSign::Minus),
            Err(Error::GammaConvention(_))
        ));
    }

    #[test]
    fn rest_frame_spinor() {
        let phase = (Expr::constant(C64::new(0.0, -1.0)) * x(3)).exp();
        let psi = vec![phase, Expr::zero(), Expr::zero(), Expr::zero()];
        let pt = [0.3, -0.4, 1.2, 0.9];
        let ok = GammaSystem::dirac(1.0, DiracSign::Minus).unwrap();
        assert!(max_abs(&dirac_apply(&ok, &psi).unwrap(), &pt) < 1e-12);
        let wrong = GammaSystem::dirac(2.0, DiracSign::Minus).unwrap();
        assert!((max_abs(&dirac_apply(&wrong, &psi).unwrap(), &pt) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn schrodinger_plane_wave() {
        let h = HamiltonianSpec::new(1.0, 1.0, Expr::zero()).unwrap();
        let wave = |w: f64| (Expr::constant(C64::new(0.0, 1.0)) * (2.0 * x(0) - w * x(1))).exp();
        let pt = [0.37, -1.2];
        let r = schrodinger_apply(&h, &wave(2.0), 2).unwrap();
        assert!(r.eval(&pt).unwrap().norm() < 1e-12);
        let r = schrodinger_apply(&h, &wave(3.0), 2).unwrap();
        assert!((r.eval(&pt).unwrap().norm() - 1.0).abs() < 1e-12);
    }
}
