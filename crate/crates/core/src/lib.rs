//! Numerical renormalization-group engine for self-similar asymptotics of
//! one-dimensional diffusive initial-value problems.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod field;
pub mod homog;
pub mod integrator;
pub mod oracles;
pub mod params;
pub mod report;
pub mod rg;
pub mod validation;

pub use diagnostics::{Regime, SlopeFit};
pub use error::{Result, RgError};
pub use field::{Field1D, Mesh, NodeSpan};
pub use homog::HomogProblem;
pub use integrator::{euler_step, evolve, stability_bounds, StabilityBounds};
pub use params::{BetaMode, EquationParams, RescaleMode, RgPolicy};
pub use report::{IterationRecord, RunError, RunReport, StopReason};
pub use rg::rg_run;
