//! Closed-form and quadrature reference solutions used to check the engine.

use std::f64::consts::{E, PI};

use crate::error::{Result, RgError};
use crate::field::{Field1D, Mesh};

/// Kernel convolution is truncated at this many standard deviations.
const KERNEL_SIGMAS: f64 = 8.0;

/// Heat kernel `(4πτ)^{-1/2} e^{−z²/4τ}`.
pub fn heat_kernel(z: f64, tau: f64) -> f64 {
    (-z * z / (4.0 * tau)).exp() / (4.0 * PI * tau).sqrt()
}

/// Solution of `u_t = u_xx` at time `t` from data `f` given at `f.t()`,
/// sampled on `mesh` (end samples are zero by the field invariant).
pub fn heat_solution(f: &Field1D, t: f64, mesh: Mesh) -> Result<Field1D> {
    let tau = t - f.t();
    if !(tau > 0.0) {
        return Err(RgError::InvalidField(format!("target time {t} must exceed the data time {}", f.t())));
    }
    heat_convolve(f, tau, mesh).map(|g| g.with_time(t))
}

/// Convolution of `f` with the heat kernel of elapsed time `tau`.
fn heat_convolve(f: &Field1D, tau: f64, mesh: Mesh) -> Result<Field1D> {
    let reach = KERNEL_SIGMAS * (2.0 * tau).sqrt();
    let dy = f.dx();
    let n = f.len() as isize;
    let values = f.values();
    Field1D::from_fn(mesh, f.t() + tau, |x| {
        // source nodes within `reach` of x
        let c = x / dy + f.center() as f64;
        let lo = ((c - reach / dy).floor() as isize).max(0);
        let hi = ((c + reach / dy).ceil() as isize).min(n - 1);
        let mut acc = 0.0;
        for j in lo..=hi {
            let v = values[j as usize];
            if v != 0.0 {
                acc += v * heat_kernel(x - f.x(j as usize), tau);
            }
        }
        acc * dy
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    /// `e^{−x²/4}`
    Star,
    /// `e^{−(p+1)x²/4}`
    P(f64),
    /// `e^{−x²/4σ}`
    Sigma(f64),
}

/// Gaussian profiles normalized to 1 at the origin.
pub fn gaussian_profile(kind: ProfileKind, x: f64) -> f64 {
    let k = match kind {
        ProfileKind::Star => 1.0,
        ProfileKind::P(p) => p + 1.0,
        ProfileKind::Sigma(sigma) => 1.0 / sigma,
    };
    (-k * x * x / 4.0).exp()
}

/// `∫_{t0}^{t1} K(s) ds` by composite Simpson.
pub fn kernel_time(k: impl Fn(f64) -> f64, t0: f64, t1: f64) -> Result<f64> {
    const PANELS: usize = 4096;
    let h = (t1 - t0) / PANELS as f64;
    let mut acc = k(t0) + k(t1);
    for i in 1..PANELS {
        let s = t0 + i as f64 * h;
        let ks = k(s);
        if !(ks > 0.0) {
            return Err(RgError::NonPositiveCoefficient { value: ks, x: 0.0, t: s });
        }
        acc += if i % 2 == 1 { 4.0 * ks } else { 2.0 * ks };
    }
    let tau = acc * h / 3.0;
    if !tau.is_finite() {
        return Err(RgError::Quadrature(format!("kernel time over [{t0}, {t1}] is not finite")));
    }
    Ok(tau)
}

/// Solution of `u_t = K(t) u_xx` at time `t`: the heat solution after the
/// elapsed kernel time `τ = ∫ K`.
pub fn timedep_linear_solution(
    f: &Field1D,
    k: impl Fn(f64) -> f64,
    t: f64,
    mesh: Mesh,
) -> Result<Field1D> {
    if !(t > f.t()) {
        return Err(RgError::InvalidField(format!("target time {t} must exceed the data time {}", f.t())));
    }
    let tau = kernel_time(k, f.t(), t)?;
    heat_convolve(f, tau, mesh).map(|g| g.with_time(t))
}

/// First-order Barenblatt decay exponent `1/2 + ε/√(2πe)`.
pub fn barenblatt_alpha_first_order(eps: f64) -> f64 {
    0.5 + eps / (2.0 * PI * E).sqrt()
}
