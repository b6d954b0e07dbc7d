use std::fmt;

use crate::diagnostics::SlopeFit;
use crate::error::RgError;
use crate::field::Field1D;
use crate::params::EquationParams;

/// One RG iteration: exponents, prefactors and profile change.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Amplitude prefactor `A_n`.
    pub amp: f64,
    /// Spatial prefactor `B_n`.
    pub width: f64,
    pub rel_diff_l1: f64,
    pub rel_diff_linf: f64,
    /// Coefficients after renormalization, i.e. those used by iteration `n + 1`.
    pub params: EquationParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<IterationRecord>,
    pub final_profile: Field1D,
    pub alpha_hat: f64,
    pub slope_fit: Option<SlopeFit>,
    pub loglog_fit: Option<SlopeFit>,
    pub stop: StopReason,
    /// Total negative samples clamped inside `u^a`.
    pub clamped: u64,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("run report always holds at least one record")
    }

    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }
}

/// An aborted run: the error plus every record completed before it.
#[derive(Debug, Clone)]
pub struct RunError {
    pub error: RgError,
    pub records: Vec<IterationRecord>,
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RG run aborted after {} iterations: {}", self.records.len(), self.error)
    }
}

impl std::error::Error for RunError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<RgError> for RunError {
    fn from(error: RgError) -> Self {
        Self { error, records: Vec::new() }
    }
}
