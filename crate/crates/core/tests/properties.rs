use std::sync::Arc;

use proptest::prelude::*;
use rgscope_core::field::{linf_norm, mass};
use rgscope_core::homog::{self, HomogProblem, Sampler};
use rgscope_core::oracles::heat_solution;
use rgscope_core::rg::{prefactors, renormalize_params};
use rgscope_core::*;

fn shrink_policy(scale: f64, max_iter: usize) -> RgPolicy {
    RgPolicy {
        scale,
        beta_mode: BetaMode::Fixed(0.5),
        rescale_mode: RescaleMode::MeshShrink,
        dt_safety: 0.8,
        tol: 1e-300,
        max_iter,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_profile_is_normalized_at_the_origin(h in 0.2..2.0f64, w in 1.0..4.0f64, interp in any::<bool>()) {
        let mesh = Mesh::symmetric(0.1, 8.0).unwrap();
        let f0 = Field1D::bump(mesh, h, w).unwrap();
        let mode = if interp { RescaleMode::FixedMeshInterp } else { RescaleMode::MeshShrink };
        let policy = RgPolicy { rescale_mode: mode, max_iter: 6, tol: 1e-300, ..RgPolicy::for_mode(mode) };
        let r = rg_run(&f0, &EquationParams::nonlinear(0.1, 3.0, 1, 0), &policy).unwrap();
        prop_assert_eq!(r.records.len(), 6);
        prop_assert!((r.final_profile.origin() - 1.0).abs() < 1e-13);
        prop_assert_eq!(r.alpha_hat, r.last().alpha);
        for rec in &r.records {
            prop_assert!(rec.amp > 0.0 && rec.width > 0.0);
            prop_assert!(rec.rel_diff_l1 >= 0.0 && rec.rel_diff_linf >= 0.0);
        }
    }

    #[test]
    fn mesh_shrink_reconstructs_the_direct_solution(h in 0.2..2.0f64, w in 1.0..3.0f64, n in 1usize..4) {
        let scale: f64 = 1.4;
        let mesh = Mesh::symmetric(0.1, 6.0).unwrap();
        let f0 = Field1D::bump(mesh, h, w).unwrap();
        let params = EquationParams::heat();
        let r = rg_run(&f0, &params, &shrink_policy(scale, n)).unwrap();
        let mut direct = f0.clone();
        for k in 1..=n {
            direct = evolve(&direct, &params, scale.powi(k as i32), 0.8).unwrap();
        }
        let alphas: Vec<f64> = r.records.iter().map(|x| x.alpha).collect();
        let betas: Vec<f64> = r.records.iter().map(|x| x.beta).collect();
        let (amp, width) = prefactors(&alphas, &betas, scale);
        let t = scale.powi(n as i32);
        let norm = linf_norm(&direct);
        for (j, &v) in direct.values().iter().enumerate() {
            let rebuilt = amp * t.powf(-r.last().alpha) * r.final_profile.interpolate(direct.x(j) / (width * t.sqrt()));
            prop_assert!((rebuilt - v).abs() <= 1e-8 * norm);
        }
    }

    #[test]
    fn coupling_shrinks_iff_its_exponent_is_negative(
        lambda in -1.0..1.0f64, a in 0.0..4.0f64, b in 0u32..3, c in 0u32..3,
        alpha in 0.3..1.0f64, beta in 0.3..1.0f64,
    ) {
        prop_assume!(lambda.abs() > 1e-3);
        let exponent = 1.0 - (b + 2 * c) as f64 * beta - (a + (b + c) as f64 - 1.0) * alpha;
        prop_assume!(exponent.abs() > 1e-6);
        let p = EquationParams { lambda, a, b, c, ..EquationParams::heat() };
        let next = renormalize_params(&p, alpha, beta, 1.4);
        prop_assert_eq!(next.lambda.abs() < lambda.abs(), exponent < 0.0);
    }

    #[test]
    fn heat_solution_scales_with_the_data(c in -3.0..3.0f64, w in 0.5..3.0f64) {
        let mesh = Mesh::symmetric(0.1, 8.0).unwrap();
        let f = Field1D::bump(mesh, 1.0, w).unwrap();
        let a = heat_solution(&f, 1.7, mesh).unwrap();
        let b = heat_solution(&f.clone().scaled(c), 1.7, mesh).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((y - c * x).abs() <= 1e-12);
        }
    }

    #[test]
    fn harmonic_mean_and_boundary_values(mu in 0.0..0.9f64, k in 1.0..4.0f64, eps in 0.01..0.5f64) {
        let d: Sampler = Arc::new(move |y: f64| 1.0 + mu * (2.0 * std::f64::consts::PI * y).sin());
        let f: Sampler = Arc::new(move |x: f64| (k * x).cos());
        let problem = HomogProblem::new(d.clone(), f, 64).unwrap();
        let d_star = homog::effective_coefficient(&d, 64).unwrap();
        prop_assert!(d_star >= 1.0 - mu - 1e-12 && d_star <= 1.0 + 1e-12);
        let ue = homog::solve_eps(&problem, eps).unwrap();
        let u0 = homog::solve_homogenized(&problem).unwrap();
        for x in [-1.0, 1.0] {
            prop_assert!(ue.eval(x).abs() < 1e-8 && u0.eval(x).abs() < 1e-8);
        }
    }
}

#[test]
fn heat_mass_is_carried_by_the_prefactor() {
    // with β = α = 1/2 the rescaling preserves mass, so A_n·√(4π) tends to the data mass
    let mesh = Mesh::symmetric(0.05, 16.0).unwrap();
    let f0 = Field1D::bump(mesh, 0.7, 2.5).unwrap();
    let policy = RgPolicy { tol: 1e-6, ..RgPolicy::default() };
    let r = rg_run(&f0, &EquationParams::heat(), &policy).unwrap();
    assert!(r.converged());
    let predicted = mass(&f0) / (4.0 * std::f64::consts::PI).sqrt();
    assert!((r.last().amp / predicted - 1.0).abs() < 1e-3, "{} vs {predicted}", r.last().amp);
}
