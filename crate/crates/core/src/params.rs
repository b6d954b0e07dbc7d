//! Equation coefficients and RG iteration policy.

use crate::error::{Result, RgError};

/// Coefficients of
///
/// ```text
/// u_t = χ(t^p + δ t^r)·[1 + ε H(−u_xx)]·[1 + μ cos(ω x)]·u_xx + λ u^a u_x^b u_xx^c
/// ```
///
/// The porous exponent `m` is carried for completeness and must be 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationParams {
    pub chi: f64,
    pub p: f64,
    pub delta: f64,
    pub r: f64,
    pub eps: f64,
    pub mu: f64,
    pub omega: f64,
    pub m: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: u32,
    pub c: u32,
}

impl Default for EquationParams {
    /// The heat equation `u_t = u_xx`.
    fn default() -> Self {
        Self {
            chi: 1.0,
            p: 0.0,
            delta: 0.0,
            r: 0.0,
            eps: 0.0,
            mu: 0.0,
            omega: 1.0,
            m: 1.0,
            lambda: 0.0,
            a: 0.0,
            b: 0,
            c: 0,
        }
    }
}

impl EquationParams {
    pub fn heat() -> Self {
        Self::default()
    }

    /// `u_t = χ(t^p + δ t^r) u_xx`.
    pub fn time_dependent(p: f64, delta: f64, r: f64) -> Self {
        Self { p, delta, r, ..Self::default() }
    }

    /// Heat equation plus `λ u^a u_x^b u_xx^c`.
    pub fn nonlinear(lambda: f64, a: f64, b: u32, c: u32) -> Self {
        Self { lambda, a, b, c, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(RgError::InvalidParams(msg));
        let all = [
            self.chi, self.p, self.delta, self.r, self.eps, self.mu, self.omega, self.m,
            self.lambda, self.a,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return bad("all coefficients must be finite".into());
        }
        if self.chi <= 0.0 {
            return bad(format!("chi must be > 0, got {}", self.chi));
        }
        if self.p < 0.0 {
            return bad(format!("p must be >= 0, got {}", self.p));
        }
        if self.delta != 0.0 && self.r >= self.p {
            return bad(format!("subleading exponent r = {} must be < p = {}", self.r, self.p));
        }
        if self.eps < 0.0 {
            return bad(format!("eps must be >= 0, got {}", self.eps));
        }
        if self.mu.abs() >= 1.0 {
            return bad(format!(
                "|mu| = {} violates 1 + mu·cos(omega x) > 0 for all x (need |mu| < 1)",
                self.mu.abs()
            ));
        }
        if self.omega <= 0.0 {
            return bad(format!("omega must be > 0, got {}", self.omega));
        }
        if self.m != 1.0 {
            return bad(format!("only m = 1 is supported, got {}", self.m));
        }
        if self.a < 0.0 {
            return bad(format!("a must be >= 0, got {}", self.a));
        }
        if self.lambda != 0.0 && self.a == 0.0 && self.b == 0 && self.c == 0 {
            return bad("a = b = c = 0 turns the nonlinear term into a uniform source".into());
        }
        Ok(())
    }

    /// Non-integer `a`: `u^a` is only defined for `u ≥ 0`.
    pub fn sign_restricted(&self) -> bool {
        self.lambda != 0.0 && self.a.fract() != 0.0
    }

    /// Time factor `χ(t^p + δ t^r)`.
    #[inline]
    pub fn time_factor(&self, t: f64) -> f64 {
        let lead = if self.p == 0.0 { 1.0 } else { t.powf(self.p) };
        let sub = if self.delta == 0.0 {
            0.0
        } else if self.r == 0.0 {
            self.delta
        } else {
            self.delta * t.powf(self.r)
        };
        self.chi * (lead + sub)
    }
}

/// How `β_n` is chosen each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    /// Constant β, keeping the chosen linear part invariant.
    Fixed(f64),
    /// β solving `1 − (b+2c)β + (1−a−b−c)α = 0`, keeping the nonlinear term invariant.
    Marginal,
}

/// How space is rescaled between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RescaleMode {
    /// Keep the samples, shrink the mesh spacing by `L^{-β}`.
    MeshShrink,
    /// Keep the mesh spacing, interpolate the rescaled function onto it.
    FixedMeshInterp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RgPolicy {
    /// Scale factor `L > 1`.
    pub scale: f64,
    pub beta_mode: BetaMode,
    pub rescale_mode: RescaleMode,
    /// Fraction of the stability bound used as time step.
    pub dt_safety: f64,
    /// Stop once the L¹ relative profile difference drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RgPolicy {
    fn default() -> Self {
        Self {
            scale: 1.4,
            beta_mode: BetaMode::Fixed(0.5),
            rescale_mode: RescaleMode::FixedMeshInterp,
            dt_safety: 0.8,
            tol: 1e-4,
            max_iter: 200,
        }
    }
}

impl RgPolicy {
    /// Default policy for the given rescale mode (L = 1.4 with interpolation, 1.02 without).
    pub fn for_mode(mode: RescaleMode) -> Self {
        let scale = match mode {
            RescaleMode::FixedMeshInterp => 1.4,
            RescaleMode::MeshShrink => 1.02,
        };
        Self { scale, rescale_mode: mode, ..Self::default() }
    }

    pub fn validate(&self, params: &EquationParams) -> Result<()> {
        let bad = |msg: String| Err(RgError::InvalidPolicy(msg));
        if !(self.scale > 1.0 && self.scale.is_finite()) {
            return bad(format!("scale factor L must be > 1, got {}", self.scale));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return bad(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1".into());
        }
        match self.beta_mode {
            BetaMode::Fixed(beta) if !beta.is_finite() => bad(format!("beta must be finite, got {beta}")),
            BetaMode::Marginal if params.b + 2 * params.c == 0 => Err(RgError::DegenerateMarginal),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_is_valid() {
        EquationParams::heat().validate().unwrap();
        assert!(!EquationParams::heat().sign_restricted());
    }

    #[test]
    fn periodic_amplitude_must_keep_coefficient_positive() {
        let p = EquationParams { mu: 1.0, ..EquationParams::default() };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("1 + mu"), "{err}");
        let p = EquationParams { mu: -0.99, ..EquationParams::default() };
        p.validate().unwrap();
    }

    #[test]
    fn subleading_exponent_must_be_below_p() {
        EquationParams::time_dependent(0.5, 1.0, 0.25).validate().unwrap();
        assert!(EquationParams::time_dependent(0.5, 1.0, 0.5).validate().is_err());
        // r is irrelevant when δ = 0
        EquationParams::time_dependent(0.5, 0.0, 3.0).validate().unwrap();
    }

    #[test]
    fn only_m_one() {
        let p = EquationParams { m: 2.0, ..EquationParams::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn non_integer_exponent_is_sign_restricted() {
        assert!(EquationParams::nonlinear(-1.0, 7.0 / 3.0, 0, 0).sign_restricted());
        assert!(!EquationParams::nonlinear(0.1, 3.0, 1, 0).sign_restricted());
    }

    #[test]
    fn time_factor_arithmetic() {
        let p = EquationParams::time_dependent(0.5, 1.0, 0.25);
        assert!((p.time_factor(16.0) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn policy_checks() {
        let heat = EquationParams::heat();
        RgPolicy::default().validate(&heat).unwrap();
        let p = RgPolicy { scale: 1.0, ..RgPolicy::default() };
        assert!(p.validate(&heat).is_err());
        let p = RgPolicy { dt_safety: 1.5, ..RgPolicy::default() };
        assert!(p.validate(&heat).is_err());
        let p = RgPolicy { beta_mode: BetaMode::Marginal, ..RgPolicy::default() };
        assert_eq!(p.validate(&heat), Err(RgError::DegenerateMarginal));
        let nl = EquationParams::nonlinear(0.1, 0.0, 1, 1);
        p.validate(&nl).unwrap();
    }

    #[test]
    fn mode_defaults() {
        assert_eq!(RgPolicy::for_mode(RescaleMode::MeshShrink).scale, 1.02);
        assert_eq!(RgPolicy::for_mode(RescaleMode::FixedMeshInterp).scale, 1.4);
    }
}
