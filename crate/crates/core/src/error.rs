use thiserror::Error;

/// Errors raised by the integrator, the RG engine and the diagnostics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RgError {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid equation parameters: {0}")]
    InvalidParams(String),

    #[error("invalid RG policy: {0}")]
    InvalidPolicy(String),

    #[error("diffusion coefficient is {value} (must be > 0) at x = {x}, t = {t}")]
    NonPositiveCoefficient { value: f64, x: f64, t: f64 },

    #[error("unstable configuration: {0}")]
    UnstableConfiguration(String),

    #[error("sample {index} stayed negative ({value:e}) for a full step with a non-integer exponent")]
    SignViolation { index: usize, value: f64 },

    #[error("non-finite value produced at t = {t}")]
    NumericOverflow { t: f64 },

    #[error("solution at the origin is {0}, cannot extract a decay exponent")]
    NonPositiveOrigin(f64),

    #[error("marginal beta selection needs b + 2c > 0")]
    DegenerateMarginal,

    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("quadrature failed: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, RgError>;
