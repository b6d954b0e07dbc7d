//! The RG iteration: evolve over `[1, L]`, read off the exponents, rescale
//! space and amplitude, accumulate prefactors, renormalize the equation.
//!
//! After `n` iterations the rescaled profile `f_n` relates to the original
//! solution through
//!
//! ```text
//! u_0(x, L^n) = A_n L^{-n α_n} f_n(B_n x / L^{n β_n})
//! A_n = L^{n α_n − (α_1 + … + α_n)},   B_n = L^{n β_n − (β_1 + … + β_n)}
//! ```

use crate::diagnostics::{loglog_prefactor_fit, profile_slope};
use crate::error::{Result, RgError};
use crate::field::{Field1D, NodeSpan};
use crate::integrator::evolve_counted;
use crate::params::{BetaMode, EquationParams, RescaleMode, RgPolicy};
use crate::report::{IterationRecord, RunError, RunReport, StopReason};

/// Cutoff used for the profile slope attached to every run report.
pub const DEFAULT_SLOPE_CUTOFF: f64 = 0.01;
/// Tail fraction used for the log-log prefactor fit attached to run reports.
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// `α = −ln u(0, L) / ln L`, so that the next profile is 1 at the origin.
pub fn alpha_from_origin(u_at_l: &Field1D, scale: f64) -> Result<f64> {
    let u0 = u_at_l.origin();
    if !(u0 > 0.0) {
        return Err(RgError::NonPositiveOrigin(u0));
    }
    Ok(-u0.ln() / scale.ln())
}

pub fn beta_select(policy: &RgPolicy, params: &EquationParams, alpha: f64) -> Result<f64> {
    match policy.beta_mode {
        BetaMode::Fixed(beta) => Ok(beta),
        BetaMode::Marginal => {
            let k = params.b + 2 * params.c;
            if k == 0 {
                return Err(RgError::DegenerateMarginal);
            }
            let s = params.a + (params.b + params.c) as f64;
            Ok((1.0 + (1.0 - s) * alpha) / k as f64)
        }
    }
}

/// `f(x) = L^α u(L^β x, L)`, re-tagged at `t = 1`.
///
/// With [`RescaleMode::FixedMeshInterp`] the output covers `span` nodes around
/// the center (default: the source window contracted by `L^β`); samples whose
/// source point leaves the old support are zero.
pub fn rescale_field(
    u_at_l: &Field1D,
    alpha: f64,
    beta: f64,
    scale: f64,
    mode: RescaleMode,
    span: Option<NodeSpan>,
) -> Field1D {
    let amp = (alpha * scale.ln()).exp();
    match mode {
        RescaleMode::MeshShrink => {
            let dx = u_at_l.dx() * (-beta * scale.ln()).exp();
            let values = u_at_l.values().iter().map(|v| v * amp).collect();
            Field1D::from_parts(dx, u_at_l.center(), values, 1.0)
        }
        RescaleMode::FixedMeshInterp => {
            let stretch = (beta * scale.ln()).exp();
            let span = span.unwrap_or_else(|| {
                let src = u_at_l.mesh().span();
                NodeSpan {
                    left: ((src.left as f64 / stretch).floor() as usize).max(1),
                    right: ((src.right as f64 / stretch).floor() as usize).max(1),
                }
            });
            let len = span.left + span.right + 1;
            let mut values: Vec<f64> = (0..len)
                .map(|j| {
                    let offset = j as f64 - span.left as f64;
                    amp * u_at_l.interpolate_nodes(stretch * offset)
                })
                .collect();
            values[0] = 0.0;
            values[len - 1] = 0.0;
            Field1D::from_parts(u_at_l.dx(), span.left, values, 1.0)
        }
    }
}

/// Coefficients of the equation satisfied by `L^α u(L^β x, L t)`.
pub fn renormalize_params(params: &EquationParams, alpha: f64, beta: f64, scale: f64) -> EquationParams {
    let ln_l = scale.ln();
    let lam_exp = 1.0
        - (params.b + 2 * params.c) as f64 * beta
        - (params.a + (params.b + params.c) as f64 - 1.0) * alpha;
    EquationParams {
        chi: params.chi * ((1.0 + params.p - 2.0 * beta) * ln_l).exp(),
        delta: params.delta * ((params.r - params.p) * ln_l).exp(),
        omega: params.omega * (beta * ln_l).exp(),
        lambda: params.lambda * (lam_exp * ln_l).exp(),
        ..*params
    }
}

/// `(A_n, B_n)` from the exponent histories; `n` is the history length.
pub fn prefactors(alpha_history: &[f64], beta_history: &[f64], scale: f64) -> (f64, f64) {
    let pref = |h: &[f64]| match h.last() {
        Some(&last) => {
            let n = h.len() as f64;
            let sum: f64 = h.iter().sum();
            ((n * last - sum) * scale.ln()).exp()
        }
        None => 1.0,
    };
    (pref(alpha_history), pref(beta_history))
}

/// `‖f − g‖ / ‖f‖` in L¹ and L∞, with `g` sampled at the nodes of `f`.
fn relative_difference(f: &Field1D, g: &Field1D) -> (f64, f64) {
    let mut l1 = 0.0;
    let mut l1_norm = 0.0;
    let mut linf: f64 = 0.0;
    let mut linf_norm: f64 = 0.0;
    for (j, &v) in f.values().iter().enumerate() {
        let d = (v - g.interpolate(f.x(j))).abs();
        l1 += d;
        l1_norm += v.abs();
        linf = linf.max(d);
        linf_norm = linf_norm.max(v.abs());
    }
    let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else { 0.0 };
    (ratio(l1, l1_norm), ratio(linf, linf_norm))
}

/// Runs the RG iteration from `f0` (given at `t = 1`) until the L¹ relative
/// profile difference drops below `policy.tol` or `policy.max_iter` is reached.
pub fn rg_run(
    f0: &Field1D,
    params0: &EquationParams,
    policy: &RgPolicy,
) -> std::result::Result<RunReport, RunError> {
    params0.validate()?;
    policy.validate(params0)?;
    if (f0.t() - 1.0).abs() > 1e-12 {
        return Err(RgError::InvalidField(format!("initial data must be given at t = 1, got t = {}", f0.t())).into());
    }

    let scale = policy.scale;
    let mut notes = Vec::new();
    let span = match policy.rescale_mode {
        RescaleMode::FixedMeshInterp => {
            let span = f0.mesh().span();
            notes.push(format!(
                "fixed mesh keeps {} nodes per iteration; samples rescaled from outside the evolved support are zero",
                span.left + span.right + 1
            ));
            Some(span)
        }
        RescaleMode::MeshShrink => None,
    };

    let mut f = f0.clone();
    let mut params = *params0;
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut clamped = 0;
    let mut stop = StopReason::MaxIterations;

    for n in 1..=policy.max_iter {
        let step = (|| -> Result<(Field1D, f64, f64, u64)> {
            let (u_l, stats) = evolve_counted(&f, &params, scale, policy.dt_safety)?;
            let alpha = alpha_from_origin(&u_l, scale)?;
            let beta = beta_select(policy, &params, alpha)?;
            let next = rescale_field(&u_l, alpha, beta, scale, policy.rescale_mode, span);
            Ok((next, alpha, beta, stats.clamped))
        })();
        let (next, alpha, beta, c) = match step {
            Ok(v) => v,
            Err(error) => return Err(RunError { error, records }),
        };
        clamped += c;
        alphas.push(alpha);
        betas.push(beta);
        let (amp, width) = prefactors(&alphas, &betas, scale);
        params = renormalize_params(&params, alpha, beta, scale);
        let (rel_diff_l1, rel_diff_linf) = relative_difference(&next, &f);
        records.push(IterationRecord { n, alpha, beta, amp, width, rel_diff_l1, rel_diff_linf, params });
        f = next;
        if rel_diff_l1 < policy.tol {
            stop = StopReason::Converged;
            break;
        }
    }

    if clamped > 0 {
        notes.push(format!("{clamped} slightly negative samples clamped to zero inside u^a"));
    }
    let slope_fit = profile_slope(&f, DEFAULT_SLOPE_CUTOFF).ok();
    let loglog_fit = loglog_prefactor_fit(&records, DEFAULT_TAIL_FRACTION).ok();
    let alpha_hat = records.last().map(|r| r.alpha).unwrap_or(f64::NAN);
    Ok(RunReport { records, final_profile: f, alpha_hat, slope_fit, loglog_fit, stop, clamped, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Mesh;
    use approx::assert_abs_diff_eq;

    fn spike(value: f64) -> Field1D {
        Field1D::new(0.1, 2, vec![0.0, 0.3, value, 0.3, 0.0], 1.4).unwrap()
    }

    #[test]
    fn alpha_readback() {
        assert_eq!(alpha_from_origin(&spike(1.0), 1.4).unwrap(), 0.0);
        let l: f64 = 1.4;
        assert_abs_diff_eq!(alpha_from_origin(&spike(l.powf(-0.5)), l).unwrap(), 0.5, epsilon = 1e-14);
        assert!(matches!(alpha_from_origin(&spike(0.0), l), Err(RgError::NonPositiveOrigin(_))));
        assert!(matches!(alpha_from_origin(&spike(-0.1), l), Err(RgError::NonPositiveOrigin(_))));
    }

    #[test]
    fn beta_policies() {
        let heat = EquationParams::heat();
        let fixed = RgPolicy { beta_mode: BetaMode::Fixed(0.5), ..RgPolicy::default() };
        assert_eq!(beta_select(&fixed, &heat, 0.9).unwrap(), 0.5);
        let p = 0.5;
        let fixed = RgPolicy { beta_mode: BetaMode::Fixed((p + 1.0) / 2.0), ..RgPolicy::default() };
        assert_eq!(beta_select(&fixed, &heat, 0.9).unwrap(), 0.75);
        let marginal = RgPolicy { beta_mode: BetaMode::Marginal, ..RgPolicy::default() };
        let nl = EquationParams::nonlinear(0.1, 0.0, 1, 1);
        assert_abs_diff_eq!(beta_select(&marginal, &nl, 0.5).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        assert_eq!(beta_select(&marginal, &heat, 0.5), Err(RgError::DegenerateMarginal));
    }

    #[test]
    fn zero_beta_interpolation_is_pure_amplitude_scaling() {
        let mesh = Mesh::symmetric(0.1, 3.0).unwrap();
        let u = Field1D::bump(mesh, 0.7, 2.0).unwrap().with_time(1.4);
        let f = rescale_field(&u, 0.5, 0.0, 1.4, RescaleMode::FixedMeshInterp, Some(mesh.span()));
        let amp = 1.4f64.powf(0.5);
        for (a, b) in f.values().iter().zip(u.values()) {
            assert_abs_diff_eq!(*a, amp * b, epsilon = 1e-15);
        }
        assert_eq!(f.t(), 1.0);
    }

    #[test]
    fn mesh_shrink_bookkeeping() {
        let u = spike(0.25).with_time(2.0);
        let f = rescale_field(&u, 1.0, 1.0, 2.0, RescaleMode::MeshShrink, None);
        assert_abs_diff_eq!(f.dx(), 0.05, epsilon = 1e-16);
        assert_abs_diff_eq!(f.origin(), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(f.values()[1], 0.6, epsilon = 1e-15);
        assert_eq!(f.t(), 1.0);
    }

    #[test]
    fn origin_rule_normalizes_center() {
        let mesh = Mesh::symmetric(0.05, 5.0).unwrap();
        let u = Field1D::bump(mesh, 0.37, 3.0).unwrap().with_time(1.4);
        let alpha = alpha_from_origin(&u, 1.4).unwrap();
        for mode in [RescaleMode::MeshShrink, RescaleMode::FixedMeshInterp] {
            let f = rescale_field(&u, alpha, 0.5, 1.4, mode, None);
            assert_abs_diff_eq!(f.origin(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn fixed_mesh_truncates_outside_support() {
        let mesh = Mesh::symmetric(0.1, 1.0).unwrap();
        let u = Field1D::bump(mesh, 1.0, 0.9).unwrap().with_time(1.4);
        let wide = NodeSpan { left: 30, right: 30 };
        let f = rescale_field(&u, 0.0, 0.5, 1.4, RescaleMode::FixedMeshInterp, Some(wide));
        assert_eq!(f.len(), 61);
        // source point L^β·j·dx leaves [-1, 1] beyond |j| ≈ 8.5
        assert!(f.values()[..21].iter().all(|&v| v == 0.0));
        assert!(f.values()[40..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn heat_is_invariant_under_half_beta() {
        let p = renormalize_params(&EquationParams::heat(), 0.5, 0.5, 1.4);
        assert_abs_diff_eq!(p.chi, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn nonlinear_flow_with_time_dependence() {
        let p = EquationParams { p: 0.5, ..EquationParams::nonlinear(0.2, 3.0, 0, 0) };
        let q = renormalize_params(&p, 0.75, 0.75, 1.4);
        assert_abs_diff_eq!(q.lambda, 0.2 * 1.4f64.powf(-0.5), epsilon = 1e-15);
        assert_abs_diff_eq!(q.chi, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn frequency_and_subleading_flow() {
        let p = EquationParams { mu: 0.8, ..EquationParams::heat() };
        let q = renormalize_params(&p, 0.5, 0.5, 1.4);
        assert_abs_diff_eq!(q.omega, 1.1832159566199232, epsilon = 1e-12);
        assert_eq!(q.mu, 0.8);

        let p = EquationParams::time_dependent(0.5, 1.0, 0.25);
        let q = renormalize_params(&p, 0.75, 0.75, 1.4);
        assert_abs_diff_eq!(q.delta, 0.9193227152249185, epsilon = 1e-12);
    }

    #[test]
    fn lambda_shrinks_exactly_when_d_f_positive() {
        use crate::diagnostics::d_f;
        for &(a, b, c) in &[(3.0, 1, 0), (1.0, 1, 1), (0.0, 1, 1), (1.0, 0, 1), (3.0, 0, 0), (2.0, 0, 0), (1.0, 1, 0)] {
            let p = EquationParams::nonlinear(0.3, a, b, c);
            let q = renormalize_params(&p, 0.5, 0.5, 1.4);
            let shrinks = q.lambda.abs() < p.lambda.abs() - 1e-15;
            assert_eq!(shrinks, d_f(a, b, c) > 0.0, "a={a} b={b} c={c}");
        }
    }

    #[test]
    fn prefactor_examples() {
        let (a, b) = prefactors(&[0.4, 0.4, 0.4], &[0.5, 0.5, 0.5], 1.4);
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);
        let (a, _) = prefactors(&[1.0, 0.5], &[0.5, 0.5], 2.0);
        assert_abs_diff_eq!(a, 2f64.powf(-0.5), epsilon = 1e-15);
    }

    #[test]
    fn run_rejects_bad_input() {
        let mesh = Mesh::symmetric(0.1, 8.0).unwrap();
        let f0 = Field1D::bump(mesh, 1.0, 2.0).unwrap();
        let bad = EquationParams { mu: 1.2, ..EquationParams::heat() };
        assert!(rg_run(&f0, &bad, &RgPolicy::default()).is_err());
        let late = f0.clone().with_time(2.0);
        assert!(rg_run(&late, &EquationParams::heat(), &RgPolicy::default()).is_err());
    }

    #[test]
    fn short_heat_run_normalizes_every_profile() {
        let mesh = Mesh::symmetric(0.1, 12.0).unwrap();
        let f0 = Field1D::bump(mesh, 1.0, 2.0).unwrap();
        let policy = RgPolicy { max_iter: 12, tol: 1e-12, ..RgPolicy::default() };
        let report = rg_run(&f0, &EquationParams::heat(), &policy).unwrap();
        assert_eq!(report.records.len(), 12);
        assert_eq!(report.stop, StopReason::MaxIterations);
        assert_abs_diff_eq!(report.final_profile.origin(), 1.0, epsilon = 1e-13);
        assert_eq!(report.alpha_hat, report.last().alpha);
        assert!(report.records.iter().all(|r| r.amp > 0.0 && r.width > 0.0));
        assert!(report.records.iter().all(|r| r.rel_diff_l1 >= 0.0 && r.rel_diff_linf >= 0.0));
    }

    #[test]
    fn aborted_run_keeps_partial_records() {
        // a narrow positive spike on top of a wide negative well: the origin
        // turns negative once the spike has spread
        let mesh = Mesh::symmetric(0.05, 12.0).unwrap();
        let spike = Field1D::bump(mesh, 1.0, 2.0).unwrap();
        let well = Field1D::bump(mesh, 0.3, 8.0).unwrap();
        let values = spike.values().iter().zip(well.values()).map(|(a, b)| a - b).collect();
        let f0 = Field1D::new(mesh.dx, mesh.center, values, 1.0).unwrap();
        let policy = RgPolicy { max_iter: 50, tol: 1e-12, ..RgPolicy::default() };
        let err = rg_run(&f0, &EquationParams::heat(), &policy).unwrap_err();
        assert!(matches!(err.error, RgError::NonPositiveOrigin(_)), "{err}");
        assert!(!err.records.is_empty());
    }
}
