//! Verifier for parallel-section field equations: symbolic scalar fields,
//! valued exterior forms, differential operators, a residual engine, a catalog
//! of field equations and a small declarative check language.

pub mod catalog;
pub mod chart;
pub mod cli;
pub mod diffops;
pub mod dsl;
pub mod engine;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod sample;
pub mod values;

pub use chart::{Chart, Metric, MetricAt, MetricSpec};
pub use error::{Error, EvalError, Result};
pub use expr::{Expr, ScalarExpr, C64};
pub use exterior::{AlternatingTensor, Form, MultiIndex, Scalar, Variance};
pub use sample::SampleSet;
pub use values::{FormPairing, LieStructure, PhiMap, ValueSpace, ValuedForm};
