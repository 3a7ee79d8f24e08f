//! Sturm–Liouville operators `-(p u')' + q u + i((r u)' + r u')` with
//! distributional potentials `q = Q' + s`, handled through the quasi-derivative
//! `u^[1] = p u' - (Q + i r) u` and the associated first-order 2×2 system.
//!
//! The numerical core is generic over the scalar type (`f32`, `f64`) through
//! [`Real`]; the `*F64` aliases at the crate root fix the common choice.

// `!(a < b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bracket;
pub mod coeff;
pub mod error;
pub mod expr;
pub mod integrator;
pub mod quad;
pub mod quadform;
pub mod report;
pub mod sacheck;
pub mod scalar;
pub mod shinzettl;
pub mod spectral;

pub use coeff::{CoefficientSet, GrowthClass, GrowthTag, Interval, PiecewiseFn, Problem, StepFn};
pub use error::{Error, Result};
pub use expr::Expr;
pub use integrator::{Direction, QuasiTrajectory, Tolerances};
pub use report::{ConditionReport, Verdict};
pub use scalar::Real;
pub use shinzettl::{QuasiState, ShinZettlMatrix};

pub type QuasiStateF64 = shinzettl::QuasiState<f64>;
pub type QuasiTrajectoryF64 = integrator::QuasiTrajectory<f64>;
pub type EigenResultF64 = spectral::EigenResult<f64>;
pub type RhoMapF64 = sacheck::RhoMap<f64>;
pub type BracketValueF64 = bracket::BracketValue<f64>;
pub type Complex64 = num_complex::Complex<f64>;
