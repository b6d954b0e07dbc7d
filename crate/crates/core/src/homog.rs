//! One-dimensional homogenization of `−(D(x/ε) u′)′ = f` on `[−1, 1]` with `u(±1) = 0`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, RgError};

pub type Sampler = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Smallest accepted quadrature resolution.
pub const MIN_QUAD_N: usize = 64;
/// Panels per unit length are at least this multiple of `1/ε`.
const PANELS_PER_EPS: f64 = 20.0;
/// Relative tolerance of the doubling check on the integration constants.
const DOUBLING_TOL: f64 = 1e-8;
/// Upper bound on panels per unit length.
const MAX_PANELS: usize = 1 << 22;

#[derive(Clone)]
pub struct HomogProblem {
    /// Period-1 positive coefficient.
    pub d: Sampler,
    /// Source term on `[−1, 1]`.
    pub f: Sampler,
    pub quad_n: usize,
}

impl fmt::Debug for HomogProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogProblem").field("quad_n", &self.quad_n).finish_non_exhaustive()
    }
}

impl HomogProblem {
    pub fn new(d: Sampler, f: Sampler, quad_n: usize) -> Result<Self> {
        if quad_n < MIN_QUAD_N {
            return Err(RgError::Quadrature(format!("quad_n must be at least {MIN_QUAD_N}, got {quad_n}")));
        }
        check_positive(&d, quad_n.max(1024))?;
        Ok(Self { d, f, quad_n })
    }

    /// `D(y) = 1 + μ cos(2πy)` with source `f`.
    pub fn cosine(mu: f64, f: Sampler, quad_n: usize) -> Result<Self> {
        let d: Sampler = Arc::new(move |y: f64| 1.0 + mu * (2.0 * std::f64::consts::PI * y).cos());
        Self::new(d, f, quad_n)
    }

    pub fn effective_coefficient(&self) -> Result<f64> {
        effective_coefficient(&self.d, self.quad_n)
    }
}

fn check_positive(d: &Sampler, samples: usize) -> Result<()> {
    for i in 0..samples {
        let y = i as f64 / samples as f64;
        let v = d(y);
        if !(v > 0.0) || !v.is_finite() {
            return Err(RgError::NonPositiveCoefficient { value: v, x: y, t: 0.0 });
        }
    }
    Ok(())
}

fn midpoint_recip(d: &Sampler, n: usize) -> Result<f64> {
    let h = 1.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let y = (i as f64 + 0.5) * h;
        let v = d(y);
        if !(v > 0.0) {
            return Err(RgError::NonPositiveCoefficient { value: v, x: y, t: 0.0 });
        }
        acc += 1.0 / v;
    }
    Ok(acc * h)
}

/// Harmonic mean `⟨1/D⟩⁻¹` over one period by composite midpoint,
/// doubling `quad_n` until two successive values agree.
pub fn effective_coefficient(d: &Sampler, quad_n: usize) -> Result<f64> {
    let mut n = quad_n.max(MIN_QUAD_N);
    let mut prev = midpoint_recip(d, n)?;
    loop {
        n *= 2;
        let next = midpoint_recip(d, n)?;
        if (next - prev).abs() <= 1e-13 * next.abs() || n >= MAX_PANELS {
            if !next.is_finite() {
                return Err(RgError::Quadrature("mean of 1/D is not finite".into()));
            }
            return Ok(1.0 / next);
        }
        prev = next;
    }
}

/// Nodes `x_k = −1 + k·h`, `k = 0..=2m`; node `m` is the origin.
#[derive(Debug, Clone, Copy)]
struct Grid {
    m: usize,
    h: f64,
}

impl Grid {
    fn new(per_unit: usize) -> Self {
        Self { m: per_unit, h: 1.0 / per_unit as f64 }
    }

    fn len(&self) -> usize {
        2 * self.m + 1
    }

    fn x(&self, k: usize) -> f64 {
        (k as f64 - self.m as f64) * self.h
    }

    /// Node at or left of `x`, clamped so that `k + 1` is a node.
    fn locate(&self, x: f64) -> usize {
        let k = ((x + 1.0) / self.h).floor();
        (k.max(0.0) as usize).min(2 * self.m - 1)
    }

    /// `∫₀^{x_k} g` for every node by composite midpoint; `g` sees the panel index.
    fn cumulative(&self, g: impl Fn(usize, f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for k in self.m..2 * self.m {
            out[k + 1] = out[k] + self.h * g(k, self.x(k) + 0.5 * self.h);
        }
        for k in (1..=self.m).rev() {
            out[k - 1] = out[k] - self.h * g(k - 1, self.x(k - 1) + 0.5 * self.h);
        }
        out
    }
}

/// `F(x) = ∫₀ˣ f` at the nodes.
fn source_primitive(grid: Grid, f: &Sampler) -> Vec<f64> {
    grid.cumulative(|_, x| f(x))
}

/// Tabulated `u^ε`, evaluated between nodes by a partial midpoint panel.
#[derive(Clone)]
pub struct EpsSolution {
    pub eps: f64,
    pub c1: f64,
    pub c2: f64,
    grid: Grid,
    big_f: Vec<f64>,
    u: Vec<f64>,
    d: Sampler,
}

impl fmt::Debug for EpsSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EpsSolution")
            .field("eps", &self.eps)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("panels", &(2 * self.grid.m))
            .finish()
    }
}

impl EpsSolution {
    /// `u^ε(x)`; zero outside `[−1, 1]`.
    pub fn eval(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        let k = self.grid.locate(x);
        let xk = self.grid.x(k);
        let s = x - xk;
        if s == 0.0 {
            return self.u[k];
        }
        let mid = xk + 0.5 * s;
        let fm = self.big_f[k] + (self.big_f[k + 1] - self.big_f[k]) * (0.5 * s / self.grid.h);
        self.u[k] + s * (self.c1 - fm) / (self.d)(mid / self.eps)
    }

    pub fn panels(&self) -> usize {
        2 * self.grid.m
    }
}

fn solve_on(problem: &HomogProblem, eps: f64, per_unit: usize) -> Result<EpsSolution> {
    let grid = Grid::new(per_unit);
    let big_f = source_primitive(grid, &problem.f);
    let d = &problem.d;
    let recip = grid.cumulative(|_, x| 1.0 / d(x / eps));
    // F at panel midpoints by averaging the node values
    let weighted = grid.cumulative(|k, x| 0.5 * (big_f[k] + big_f[k + 1]) / d(x / eps));
    let last = grid.len() - 1;
    let (i_plus, i_minus) = (recip[last], recip[0]);
    let (j_plus, j_minus) = (weighted[last], weighted[0]);
    let c1 = (j_plus - j_minus) / (i_plus - i_minus);
    // sgn(0) = 0: the two half-line integrals enter with opposite signs
    let c2 = 0.5 * ((j_plus + j_minus) - c1 * (i_plus + i_minus));
    if !(c1.is_finite() && c2.is_finite()) {
        return Err(RgError::Quadrature(format!("non-finite integration constants at eps = {eps}")));
    }
    let u = recip.iter().zip(&weighted).map(|(i, j)| c2 + c1 * i - j).collect();
    Ok(EpsSolution { eps, c1, c2, grid, big_f, u, d: Arc::clone(d) })
}

/// Solution of the ε-problem from the explicit primitive formula.
pub fn solve_eps(problem: &HomogProblem, eps: f64) -> Result<EpsSolution> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(RgError::InvalidParams(format!("eps must be positive, got {eps}")));
    }
    let mut per_unit = problem.quad_n.max((PANELS_PER_EPS / eps).ceil() as usize);
    let mut coarse = solve_on(problem, eps, per_unit)?;
    loop {
        if per_unit * 2 > MAX_PANELS {
            return Ok(coarse);
        }
        per_unit *= 2;
        let fine = solve_on(problem, eps, per_unit)?;
        let scale = 1.0 + fine.c1.abs() + fine.c2.abs();
        if (fine.c1 - coarse.c1).abs() + (fine.c2 - coarse.c2).abs() <= DOUBLING_TOL * scale {
            return Ok(fine);
        }
        coarse = fine;
    }
}

/// The homogenized solution `u⁰`.
#[derive(Debug, Clone)]
pub struct HomogenizedSolution {
    pub d_star: f64,
    pub c1: f64,
    pub c2: f64,
    grid: Grid,
    big_f: Vec<f64>,
    /// `∫₀ˣ F` at the nodes.
    big_g: Vec<f64>,
}

impl HomogenizedSolution {
    pub fn eval(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        let k = self.grid.locate(x);
        let s = x - self.grid.x(k);
        let slope = (self.big_f[k + 1] - self.big_f[k]) / self.grid.h;
        // trapezoid on the linear interpolant of F
        let g = self.big_g[k] + s * self.big_f[k] + 0.5 * s * s * slope;
        self.c2 + self.c1 * x / self.d_star - g / self.d_star
    }
}

pub fn solve_homogenized(problem: &HomogProblem) -> Result<HomogenizedSolution> {
    let d_star = problem.effective_coefficient()?;
    let grid = Grid::new(problem.quad_n.max(4096));
    let big_f = source_primitive(grid, &problem.f);
    let big_g = grid.cumulative(|k, _| 0.5 * (big_f[k] + big_f[k + 1]));
    let last = grid.len() - 1;
    let c1 = 0.5 * (big_g[last] - big_g[0]);
    let c2 = 0.5 * (big_g[last] + big_g[0]) / d_star;
    Ok(HomogenizedSolution { d_star, c1, c2, grid, big_f, big_g })
}

/// Points of the fixed evaluation grid used by [`convergence_curve`].
pub const EVAL_POINTS: usize = 2001;

/// `sup |u^ε − u⁰|` over a fixed grid of [`EVAL_POINTS`] points, per ε.
pub fn convergence_curve(problem: &HomogProblem, eps_list: &[f64]) -> Result<Vec<(f64, f64)>> {
    let u0 = solve_homogenized(problem)?;
    let xs: Vec<f64> = (0..EVAL_POINTS).map(|i| -1.0 + 2.0 * i as f64 / (EVAL_POINTS - 1) as f64).collect();
    eps_list
        .par_iter()
        .map(|&eps| {
            let ue = solve_eps(problem, eps)?;
            let err = xs.iter().map(|&x| (ue.eval(x) - u0.eval(x)).abs()).fold(0.0, f64::max);
            Ok((eps, err))
        })
        .collect()
}

/// `|∫_a^b F(x/ε, x) dx − ∫_a^b F̄(x) dx|` per ε, where `F̄(x) = ∫₀¹ F(y, x) dy`.
pub fn mean_value_check<F>(big_f: F, a: f64, b: f64, eps_list: &[f64]) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    if !(b > a) {
        return Err(RgError::InvalidParams(format!("need a < b, got [{a}, {b}]")));
    }
    const INNER: usize = 256;
    let outer = 4096;
    let hx = (b - a) / outer as f64;
    let mean = |x: f64| (0..INNER).map(|i| big_f((i as f64 + 0.5) / INNER as f64, x)).sum::<f64>() / INNER as f64;
    let rhs: f64 = (0..outer).map(|i| mean(a + (i as f64 + 0.5) * hx)).sum::<f64>() * hx;
    eps_list
        .par_iter()
        .map(|&eps| {
            if !(eps > 0.0) {
                return Err(RgError::InvalidParams(format!("eps must be positive, got {eps}")));
            }
            let n = outer.max((40.0 * (b - a) / eps).ceil() as usize);
            let h = (b - a) / n as f64;
            let lhs: f64 = (0..n)
                .map(|i| {
                    let x = a + (i as f64 + 0.5) * h;
                    big_f(x / eps, x)
                })
                .sum::<f64>()
                * h;
            if !lhs.is_finite() {
                return Err(RgError::Quadrature(format!("non-finite oscillatory integral at eps = {eps}")));
            }
            Ok((eps, (lhs - rhs).abs()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn constant(c: f64) -> Sampler {
        Arc::new(move |_| c)
    }

    fn cosine_d(mu: f64) -> Sampler {
        Arc::new(move |y: f64| 1.0 + mu * (2.0 * PI * y).cos())
    }

    #[test]
    fn effective_coefficient_examples() {
        assert_abs_diff_eq!(effective_coefficient(&constant(2.5), 64).unwrap(), 2.5, epsilon = 1e-14);
        assert_abs_diff_eq!(effective_coefficient(&cosine_d(0.8), 64).unwrap(), 0.6, epsilon = 1e-6);
        let step: Sampler = Arc::new(|y: f64| if y.rem_euclid(1.0) < 0.5 { 1.0 } else { 2.0 });
        assert_abs_diff_eq!(effective_coefficient(&step, 64).unwrap(), 4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn closed_form_for_cosine() {
        for &mu in &[0.1f64, 0.5, 0.9] {
            let expected = (1.0 - mu * mu).sqrt();
            assert_abs_diff_eq!(effective_coefficient(&cosine_d(mu), 64).unwrap(), expected, epsilon = 1e-10);
        }
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(matches!(
            HomogProblem::new(cosine_d(1.2), constant(1.0), 64),
            Err(RgError::NonPositiveCoefficient { .. })
        ));
        assert!(HomogProblem::new(cosine_d(0.5), constant(1.0), 32).is_err());
        let p = HomogProblem::new(constant(1.0), constant(1.0), 64).unwrap();
        assert!(solve_eps(&p, 0.0).is_err());
    }

    #[test]
    fn unit_problem_is_parabola() {
        let p = HomogProblem::new(constant(1.0), constant(1.0), 64).unwrap();
        let u0 = solve_homogenized(&p).unwrap();
        assert_abs_diff_eq!(u0.c1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u0.c2, 0.5, epsilon = 1e-14);
        for &eps in &[0.5, 0.1, 0.01] {
            let ue = solve_eps(&p, eps).unwrap();
            for i in 0..=40 {
                let x = -1.0 + i as f64 * 0.05 + 0.0123 * (i % 3) as f64;
                let x = x.min(1.0);
                assert_abs_diff_eq!(ue.eval(x), (1.0 - x * x) / 2.0, epsilon = 1e-12);
                assert_abs_diff_eq!(u0.eval(x), (1.0 - x * x) / 2.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn homogenized_examples() {
        let p = HomogProblem::cosine(0.8, constant(1.0), 64).unwrap();
        let u0 = solve_homogenized(&p).unwrap();
        assert_abs_diff_eq!(u0.c1, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(u0.c2, 1.0 / 1.2, epsilon = 1e-9);
        assert_abs_diff_eq!(u0.eval(0.3), (1.0 - 0.09) / 1.2, epsilon = 1e-9);
        let z = HomogProblem::cosine(0.8, constant(0.0), 64).unwrap();
        let u0 = solve_homogenized(&z).unwrap();
        assert_eq!(u0.eval(0.4), 0.0);
    }

    #[test]
    fn boundary_values_vanish() {
        let f: Sampler = Arc::new(|x: f64| (3.0 * x).sin() + x * x);
        let p = HomogProblem::cosine(0.6, f, 128).unwrap();
        for &eps in &[0.3, 0.07, 0.01] {
            let ue = solve_eps(&p, eps).unwrap();
            assert!(ue.eval(1.0).abs() < 1e-8 && ue.eval(-1.0).abs() < 1e-8, "{:?}", ue);
        }
        let u0 = solve_homogenized(&p).unwrap();
        assert!(u0.eval(1.0).abs() < 1e-8 && u0.eval(-1.0).abs() < 1e-8);
    }

    #[test]
    fn small_eps_is_close_to_homogenized() {
        let p = HomogProblem::cosine(0.8, constant(1.0), 64).unwrap();
        let ue = solve_eps(&p, 1e-3).unwrap();
        let u0 = solve_homogenized(&p).unwrap();
        let sup = (0..=400).map(|i| -1.0 + i as f64 / 200.0).map(|x| (ue.eval(x) - u0.eval(x)).abs()).fold(0.0, f64::max);
        assert!(sup < 0.01, "{sup}");
    }

    #[test]
    fn convergence_with_constant_coefficient_is_exact() {
        let f: Sampler = Arc::new(|x: f64| 1.0 + x);
        let p = HomogProblem::new(constant(2.0), f, 64).unwrap();
        for (_, err) in convergence_curve(&p, &[0.2, 0.05]).unwrap() {
            assert!(err < 1e-10, "{err}");
        }
    }

    #[test]
    fn mean_value_examples() {
        let osc = mean_value_check(|y, x| (2.0 * PI * y).cos() * x.exp(), -0.3, 0.9, &[0.1, 0.01, 0.001]).unwrap();
        assert!(osc.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12));
        assert!(osc[2].1 < 1e-3);
        let flat = mean_value_check(|_, x| x * x, 0.0, 1.0, &[0.1, 0.01]).unwrap();
        assert!(flat.iter().all(|&(_, d)| d < 1e-12));
        let mix = mean_value_check(|y, x| (1.0 + 0.5 * (2.0 * PI * y).cos()) * x * x, 0.0, 1.0, &[1e-3]).unwrap();
        assert!(mix[0].1 < 1e-4, "{:?}", mix);
        assert!(mean_value_check(|_, x| x, 1.0, 0.0, &[0.1]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn harmonic_between_min_and_mean(mu in 0.05..0.95f64, shift in 0.0..1.0f64) {
            let d = cosine_d(mu);
            let dstar = effective_coefficient(&d, 64).unwrap();
            prop_assert!(dstar > 1.0 - mu && dstar < 1.0);
            let shifted: Sampler = Arc::new(move |y: f64| 1.0 + mu * (2.0 * PI * (y + shift)).cos());
            prop_assert!((effective_coefficient(&shifted, 64).unwrap() - dstar).abs() < 1e-10);
        }
    }
}
