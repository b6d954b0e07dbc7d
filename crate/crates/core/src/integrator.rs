//! Explicit finite-difference integration of the equation family.
//!
//! Forward Euler in time, the three-point Laplacian and centered first
//! differences in space. Every step appends one zero node on each side of the
//! grid so compactly supported data never feels an artificial boundary.

use crate::error::{Result, RgError};
use crate::field::{linf_norm, Field1D};
use crate::params::EquationParams;

/// Relative level below which edge samples are flushed to zero by [`evolve`].
const FLUSH_LEVEL: f64 = 1e-100;

/// Samples below `-SIGN_TOL·‖u‖∞` count as genuine sign violations.
const SIGN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBounds {
    pub dt_max: f64,
    /// Largest admissible mesh; infinite when the bound does not apply.
    pub dx_max: f64,
    pub k_lo: f64,
    pub k_hi: f64,
}

/// Bookkeeping accumulated while stepping.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub steps: usize,
    /// Negative samples clamped to zero inside `u^a`.
    pub clamped: u64,
}

/// `χ(t^p + δt^r)·[1 + ε H(−u_xx)]·[1 + μ cos(ωx)]`, with `H(0) = 0`.
pub fn diffusion_coefficient(params: &EquationParams, x: f64, t: f64, uxx: f64) -> Result<f64> {
    let switch = if uxx < 0.0 { 1.0 + params.eps } else { 1.0 };
    let k = params.time_factor(t) * switch * (1.0 + params.mu * (params.omega * x).cos());
    if k > 0.0 {
        Ok(k)
    } else {
        Err(RgError::NonPositiveCoefficient { value: k, x, t })
    }
}

/// Extremes of the time factor `χ(t^p + δt^r)` over `[t0, t1]`.
fn time_factor_range(params: &EquationParams, t0: f64, t1: f64) -> (f64, f64) {
    let mut lo = params.time_factor(t0).min(params.time_factor(t1));
    let mut hi = params.time_factor(t0).max(params.time_factor(t1));
    // interior stationary point of t^p + δ t^r
    if params.delta != 0.0 && params.p > 0.0 && params.r != 0.0 {
        let ratio = -params.delta * params.r / params.p;
        if ratio > 0.0 {
            let ts = ratio.powf(1.0 / (params.p - params.r));
            if ts > t0 && ts < t1 {
                let v = params.time_factor(ts);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    (lo, hi)
}

/// Sufficient stability bounds for the explicit scheme over the time window.
///
/// For `λ ≠ 0` the bounds assume `|u|, |u_x|, |u_xx| ≤ 1`.
pub fn stability_bounds(params: &EquationParams, dx: f64, t0: f64, t1: f64) -> Result<StabilityBounds> {
    if !(dx > 0.0) {
        return Err(RgError::UnstableConfiguration(format!("dx must be > 0, got {dx}")));
    }
    let (tf_lo, tf_hi) = time_factor_range(params, t0.min(t1), t0.max(t1));
    if tf_lo <= 0.0 {
        return Err(RgError::NonPositiveCoefficient { value: tf_lo, x: 0.0, t: t0 });
    }
    let k_hi = tf_hi * (1.0 + params.eps.max(0.0)) * (1.0 + params.mu.abs());
    let k_lo = tf_lo * (1.0 + params.eps.min(0.0)) * (1.0 - params.mu.abs());
    if !(k_lo > 0.0) {
        return Err(RgError::NonPositiveCoefficient { value: k_lo, x: 0.0, t: t0 });
    }

    let lam = params.lambda.abs();
    let (dt_max, dx_max) = if lam == 0.0 {
        (dx * dx / (2.0 * k_hi), f64::INFINITY)
    } else {
        let c = params.c as f64;
        let dx_max = if params.b > 0 {
            let margin = k_lo - c * lam;
            if margin <= 0.0 {
                return Err(RgError::UnstableConfiguration(format!(
                    "K_lo - c|lambda| = {margin} <= 0 with b > 0"
                )));
            }
            2.0 / (params.b as f64 * lam) * margin
        } else {
            f64::INFINITY
        };
        let dt = dx * dx / (dx * dx * params.a * lam + 2.0 * k_hi + 2.0 * c * lam);
        (dt, dx_max)
    };
    if !(dt_max > 0.0 && dt_max.is_finite()) {
        return Err(RgError::UnstableConfiguration(format!("dt_max = {dt_max}")));
    }
    Ok(StabilityBounds { dt_max, dx_max, k_lo, k_hi })
}

/// `1 + μ cos(ωx)` per node offset from the center, grown on demand.
struct SpatialFactor {
    mu: f64,
    omega: f64,
    dx: f64,
    lo: isize,
    vals: Vec<f64>,
}

impl SpatialFactor {
    fn new(params: &EquationParams, dx: f64) -> Option<Self> {
        (params.mu != 0.0).then(|| Self { mu: params.mu, omega: params.omega, dx, lo: 0, vals: Vec::new() })
    }

    fn ensure(&mut self, lo: isize, hi: isize) {
        let cur_hi = self.lo + self.vals.len() as isize - 1;
        if !self.vals.is_empty() && lo >= self.lo && hi <= cur_hi {
            return;
        }
        let margin = ((hi - lo) / 4).max(64);
        self.lo = lo - margin;
        let n = (hi - lo + 2 * margin + 1) as usize;
        self.vals = (0..n)
            .map(|i| {
                let x = (self.lo + i as isize) as f64 * self.dx;
                1.0 + self.mu * (self.omega * x).cos()
            })
            .collect();
    }

    #[inline]
    fn at(&self, offset: isize) -> f64 {
        self.vals[(offset - self.lo) as usize]
    }
}

#[inline]
fn int_pow(v: f64, n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => v,
        2 => v * v,
        _ => v.powi(n as i32),
    }
}

/// One Euler step from `old` into `out` (two nodes longer). Returns the new center.
#[allow(clippy::too_many_arguments)]
fn step_into(
    old: &[f64],
    center: usize,
    dx: f64,
    t: f64,
    dt: f64,
    params: &EquationParams,
    spatial: Option<&mut SpatialFactor>,
    out: &mut Vec<f64>,
    stats: &mut StepStats,
) -> Result<usize> {
    let n_old = old.len();
    let n_new = n_old + 2;
    let new_center = center + 1;
    let tf = params.time_factor(t);
    if !(tf > 0.0) {
        return Err(RgError::NonPositiveCoefficient { value: tf, x: 0.0, t });
    }
    let spatial = spatial.map(|s| {
        s.ensure(-(new_center as isize), (n_new - 1 - new_center) as isize);
        &*s
    });

    let inv_dx2 = 1.0 / (dx * dx);
    let inv_2dx = 0.5 / dx;
    let lam = params.lambda;
    let eps = params.eps;
    let integer_a = params.a.fract() == 0.0;
    let a_int = params.a as u32;
    let sign_restricted = params.sign_restricted();
    let sign_floor = if sign_restricted {
        -SIGN_TOL * old.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    } else {
        0.0
    };
    // old sample at new index j is old[j - 1]; exterior is zero
    let get = |k: isize| -> f64 {
        if k < 0 || k >= n_old as isize {
            0.0
        } else {
            old[k as usize]
        }
    };

    out.clear();
    out.reserve(n_new);
    for j in 0..n_new {
        let k = j as isize - 1;
        let u = get(k);
        let ul = get(k - 1);
        let ur = get(k + 1);
        let uxx = (ur - 2.0 * u + ul) * inv_dx2;
        let mut kcoef = if uxx < 0.0 { tf * (1.0 + eps) } else { tf };
        if let Some(s) = spatial {
            kcoef *= s.at(j as isize - new_center as isize);
        }
        let mut g = kcoef * uxx;
        if lam != 0.0 {
            let ua = if integer_a {
                int_pow(u, a_int)
            } else if u < 0.0 {
                stats.clamped += 1;
                0.0
            } else {
                u.powf(params.a)
            };
            let ux = (ur - ul) * inv_2dx;
            g += lam * ua * int_pow(ux, params.b) * int_pow(uxx, params.c);
        }
        let v = u + dt * g;
        if !v.is_finite() {
            return Err(RgError::NumericOverflow { t: t + dt });
        }
        if sign_restricted && v < sign_floor && u < sign_floor {
            return Err(RgError::SignViolation { index: j, value: v });
        }
        out.push(v);
    }
    // exterior neighbours are zero, so the appended end nodes stay exactly zero
    debug_assert!(out[0] == 0.0 && out[n_new - 1] == 0.0);
    stats.steps += 1;
    Ok(new_center)
}

/// Single explicit Euler step; the output grid is one node wider on each side.
pub fn euler_step(u: &Field1D, params: &EquationParams, dt: f64) -> Result<Field1D> {
    euler_step_counted(u, params, dt, &mut StepStats::default())
}

pub fn euler_step_counted(
    u: &Field1D,
    params: &EquationParams,
    dt: f64,
    stats: &mut StepStats,
) -> Result<Field1D> {
    let mut spatial = SpatialFactor::new(params, u.dx());
    let mut out = Vec::new();
    let center = step_into(u.values(), u.center(), u.dx(), u.t(), dt, params, spatial.as_mut(), &mut out, stats)?;
    Ok(Field1D::from_parts(u.dx(), center, out, u.t() + dt))
}

/// Removes edge nodes whose magnitude is below `floor`, keeping zero end samples.
fn trim_tails(values: &mut Vec<f64>, center: &mut usize, floor: f64) {
    let n = values.len();
    let mut left = 0;
    while left + 1 < *center && values[left + 1].abs() <= floor {
        left += 1;
    }
    let mut right = 0;
    while n - 1 - right > *center + 1 && values[n - 2 - right].abs() <= floor {
        right += 1;
    }
    if right > 0 {
        values.truncate(n - right);
        let last = values.len() - 1;
        values[last] = 0.0;
    }
    if left > 0 {
        values.drain(..left);
        values[0] = 0.0;
        *center -= left;
    }
}

/// Integrates from `u.t()` to `t_end` with `dt = dt_safety·dt_max`, the last
/// step shortened to land exactly on `t_end`.
pub fn evolve(u: &Field1D, params: &EquationParams, t_end: f64, dt_safety: f64) -> Result<Field1D> {
    evolve_counted(u, params, t_end, dt_safety).map(|(f, _)| f)
}

pub fn evolve_counted(
    u: &Field1D,
    params: &EquationParams,
    t_end: f64,
    dt_safety: f64,
) -> Result<(Field1D, StepStats)> {
    let mut stats = StepStats::default();
    let t0 = u.t();
    if !(dt_safety > 0.0) {
        return Err(RgError::UnstableConfiguration(format!("dt_safety must be > 0, got {dt_safety}")));
    }
    if !(t_end >= t0) {
        return Err(RgError::InvalidField(format!("cannot evolve backwards from t = {t0} to {t_end}")));
    }
    if t_end == t0 {
        return Ok((u.clone(), stats));
    }
    let dx = u.dx();
    let bounds = stability_bounds(params, dx, t0, t_end)?;
    if dx > bounds.dx_max {
        return Err(RgError::UnstableConfiguration(format!(
            "dx = {dx} exceeds the admissible mesh {}",
            bounds.dx_max
        )));
    }
    let dt = dt_safety * bounds.dt_max;
    let span = t_end - t0;
    let n_steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;

    let floor = FLUSH_LEVEL * linf_norm(u);
    let mut spatial = SpatialFactor::new(params, dx);
    let mut cur = u.values().to_vec();
    let mut center = u.center();
    let mut next = Vec::with_capacity(cur.len() + 2);
    for k in 0..n_steps {
        let t = t0 + k as f64 * dt;
        let h = if k + 1 == n_steps { t_end - t } else { dt };
        center = step_into(&cur, center, dx, t, h, params, spatial.as_mut(), &mut next, &mut stats)?;
        std::mem::swap(&mut cur, &mut next);
        trim_tails(&mut cur, &mut center, floor);
    }
    Ok((Field1D::from_parts(dx, center, cur, t_end), stats))
}
