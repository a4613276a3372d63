//! Differential operators: exterior and covariant exterior derivatives,
//! Levi-Civita data from a metric, vector-field operators, the Schrödinger
//! and Dirac operators, and a geodesic integrator.

pub mod forms;
pub mod geodesic;
pub mod quantum;
pub mod riemann;
pub mod vector;

pub use forms::{covariant_d, curvature, d, exterior_d, ConnectionForm};
pub use geodesic::{geodesic_integrate, Trajectory};
pub use quantum::{dirac_apply, schrodinger_apply, DiracSign, GammaSystem, HamiltonianSpec};
pub use riemann::{christoffels_at, metricity_at, ricci_at, riemann_at, Christoffels, Riemann};
pub use vector::{lie_bracket, nabla_x, ProjectedLie, VectorField};
