//! Fixed-step RK4 integration of `x'' = -Γ(x', x')`.

use crate::chart::Metric;
use crate::error::{Error, Result};

use super::riemann::christoffels_at;

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub ds: f64,
    /// `(x, u)` after each step, starting with the initial state.
    pub states: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Trajectory {
    pub fn last(&self) -> &(Vec<f64>, Vec<f64>) {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn accel(metric: &Metric, x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    let g = christoffels_at(metric, x)?;
    Ok(g.contract(u, u).into_iter().map(|v| -v).collect())
}

fn axpy(a: &[f64], h: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(p, q)| p + h * q).collect()
}

pub fn geodesic_integrate(metric: &Metric, x0: &[f64], u0: &[f64], steps: usize, ds: f64) -> Result<Trajectory> {
    let n = metric.dim();
    if x0.len() != n || u0.len() != n {
        return Err(Error::Dimension(format!("initial state must have {n} components")));
    }
    if !(ds > 0.0 && ds.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "ds".into(),
            reason: "step must be positive".into(),
        });
    }
    let mut x = x0.to_vec();
    let mut u = u0.to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    states.push((x.clone(), u.clone()));
    for step in 1..=steps {
        let k1x = u.clone();
        let k1u = accel(metric, &x, &u)?;
        let x2 = axpy(&x, 0.5 * ds, &k1x);
        let u2 = axpy(&u, 0.5 * ds, &k1u);
        let k2u = accel(metric, &x2, &u2)?;
        let x3 = axpy(&x, 0.5 * ds, &u2);
        let u3 = axpy(&u, 0.5 * ds, &k2u);
        let k3u = accel(metric, &x3, &u3)?;
        let x4 = axpy(&x, ds, &u3);
        let u4 = axpy(&u, ds, &k3u);
        let k4u = accel(metric, &x4, &u4)?;
        for i in 0..n {
            x[i] += ds / 6.0 * (k1x[i] + 2.0 * u2[i] + 2.0 * u3[i] + u4[i]);
            u[i] += ds / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
        }
        if x.iter().chain(&u).any(|v| !v.is_finite()) {
            return Err(Error::Step(step));
        }
        states.push((x.clone(), u.clone()));
    }
    Ok(Trajectory { ds, states })
}

/// `g(u, u)` at `x`.
pub fn norm_squared(metric: &Metric, x: &[f64], u: &[f64]) -> Result<f64> {
    let g = metric.at(x)?;
    let n = u.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += g.g(i, j) * u[i] * u[j];
        }
    }
    Ok(s)
}
