//! Classifiers and fits that turn RG runs into exponents and phase data.

use num_rational::Ratio;

use crate::error::{Result, RgError};
use crate::field::Field1D;
use crate::report::IterationRecord;

/// Least-squares line through a point set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS of the residuals.
    pub residual: f64,
    pub n_points: usize,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return Err(RgError::TooFewPoints { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(RgError::TooFewPoints { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    Ok(SlopeFit { slope, intercept, residual: (ss / nf).sqrt(), n_points: n })
}

/// `d_F = a + 2b + 3c − 3`; irrelevant when positive.
pub fn d_f(a: f64, b: u32, c: u32) -> f64 {
    a + 2.0 * b as f64 + 3.0 * c as f64 - 3.0
}

/// `η_F = a + 2b + 3c − (p+3)/(p+1)`; the time-dependent analogue of [`d_f`].
pub fn eta_f(a: f64, b: u32, c: u32, p: f64) -> f64 {
    a + 2.0 * b as f64 + 3.0 * c as f64 - (p + 3.0) / (p + 1.0)
}

/// Critical curve `a_c(p) = (p+3)/(p+1)` for `u_t = t^p u_xx − u^a`.
pub fn a_critical(p: f64) -> f64 {
    (p + 3.0) / (p + 1.0)
}

/// `α(p, a) = max{(1+p)/2, 1/(a−1)}`.
pub fn alpha_theory(p: f64, a: f64) -> f64 {
    ((1.0 + p) / 2.0).max(1.0 / (a - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `a > a_c(p)`: the absorption is irrelevant, α = (p+1)/2.
    Linear,
    /// `a = a_c(p)`: logarithmic corrections.
    Critical,
    /// `a < a_c(p)`: α = 1/(a−1).
    Nonlinear,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Linear => "linear",
            Regime::Critical => "critical",
            Regime::Nonlinear => "nonlinear",
        }
    }
}

/// Floating-point classification; `|a − a_c| ≤ 1e-12·max(1, a_c)` counts as critical.
pub fn classify_regime(p: f64, a: f64) -> Regime {
    let ac = a_critical(p);
    let tol = 1e-12 * ac.abs().max(1.0);
    if (a - ac).abs() <= tol {
        Regime::Critical
    } else if a > ac {
        Regime::Linear
    } else {
        Regime::Nonlinear
    }
}

/// Exact classification for rational inputs.
pub fn classify_regime_exact(p: Ratio<i64>, a: Ratio<i64>) -> Regime {
    let one = Ratio::from_integer(1);
    let three = Ratio::from_integer(3);
    let ac = (p + three) / (p + one);
    match a.cmp(&ac) {
        std::cmp::Ordering::Equal => Regime::Critical,
        std::cmp::Ordering::Greater => Regime::Linear,
        std::cmp::Ordering::Less => Regime::Nonlinear,
    }
}

/// Minimum number of samples above the cutoff for a profile slope.
pub const MIN_SLOPE_POINTS: usize = 8;

/// Fits `−ln φ` against `x²/4` over the nodes with `φ ≥ cutoff`.
///
/// A Gaussian `e^{−k x²/4}` gives slope `k`.
pub fn profile_slope(phi: &Field1D, cutoff: f64) -> Result<SlopeFit> {
    if (phi.origin() - 1.0).abs() > 1e-9 {
        return Err(RgError::InvalidField(format!(
            "profile must equal 1 at the origin, got {}",
            phi.origin()
        )));
    }
    if !(cutoff > 0.0 && cutoff < 1.0) {
        return Err(RgError::InvalidField(format!("cutoff must lie in (0, 1), got {cutoff}")));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = phi
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= cutoff)
        .map(|(j, &v)| {
            let x = phi.x(j);
            (x * x / 4.0, -v.ln())
        })
        .unzip();
    if xs.len() < MIN_SLOPE_POINTS {
        return Err(RgError::TooFewPoints { needed: MIN_SLOPE_POINTS, got: xs.len() });
    }
    fit_line(&xs, &ys)
}

/// Fits `ln A_n` against `ln n` over the last `tail_fraction` of the records.
pub fn loglog_prefactor_fit(records: &[IterationRecord], tail_fraction: f64) -> Result<SlopeFit> {
    if records.len() < 10 {
        return Err(RgError::TooFewPoints { needed: 10, got: records.len() });
    }
    if let Some(r) = records.iter().find(|r| !(r.amp > 0.0)) {
        return Err(RgError::InvalidField(format!("prefactor A_{} = {} is not positive", r.n, r.amp)));
    }
    let frac = tail_fraction.clamp(0.0, 1.0);
    let take = ((records.len() as f64 * frac).ceil() as usize).max(2).min(records.len());
    let tail = &records[records.len() - take..];
    let xs: Vec<f64> = tail.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|r| r.amp.ln()).collect();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Mesh;
    use crate::params::EquationParams;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn classifier_values() {
        assert_eq!(d_f(3.0, 1, 0), 2.0);
        assert_eq!(d_f(3.0, 0, 0), 0.0);
        assert_abs_diff_eq!(eta_f(3.0, 0, 0, 0.5), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a_critical(0.5), 7.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn alpha_surface_table_values() {
        assert_abs_diff_eq!(alpha_theory(0.5, 2.133333), 0.882353, epsilon = 5e-7);
        assert_abs_diff_eq!(alpha_theory(0.7, 7.0 / 3.0), 0.85, epsilon = 1e-12);
        assert_abs_diff_eq!(alpha_theory(0.5, 7.0 / 3.0), 0.75, epsilon = 1e-12);
    }

    #[test]
    fn alpha_surface_kink_on_critical_curve() {
        for &p in &[0.0, 0.25, 0.5, 1.0] {
            let ac = a_critical(p);
            let h = 1e-6;
            let left = (alpha_theory(p, ac) - alpha_theory(p, ac - h)) / h;
            let right = (alpha_theory(p, ac + h) - alpha_theory(p, ac)) / h;
            assert_abs_diff_eq!(left, -1.0 / ((ac - 1.0) * (ac - 1.0)), epsilon = 1e-4);
            assert_abs_diff_eq!(right, 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(0.5, 2.5), Regime::Linear);
        assert_eq!(classify_regime(0.5, 7.0 / 3.0), Regime::Critical);
        assert_eq!(classify_regime(0.5, 2.1), Regime::Nonlinear);
        for &p in &[0.0, 0.1, 0.3, 0.5, 0.55, 0.7, 1.0, 2.0] {
            assert_eq!(classify_regime(p, a_critical(p)), Regime::Critical);
        }
        let r = |n, d| Ratio::new(n, d);
        assert_eq!(classify_regime_exact(r(1, 2), r(7, 3)), Regime::Critical);
        assert_eq!(classify_regime_exact(r(1, 2), r(2333333, 1000000)), Regime::Nonlinear);
        assert_eq!(classify_regime_exact(r(1, 2), r(5, 2)), Regime::Linear);
    }

    #[test]
    fn gaussian_slopes_are_exact() {
        for &k in &[0.5, 1.0, 1.5, 2.0] {
            for &(dx, cutoff) in &[(0.05, 0.01), (0.1, 0.001), (0.2, 0.3)] {
                let mesh = Mesh::symmetric(dx, 12.0).unwrap();
                let phi = Field1D::from_fn(mesh, 1.0, |x| (-k * x * x / 4.0).exp()).unwrap();
                let fit = profile_slope(&phi, cutoff).unwrap();
                assert_abs_diff_eq!(fit.slope, k, epsilon = 1e-6);
                assert_abs_diff_eq!(fit.intercept, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn slope_needs_points_and_normalization() {
        let mesh = Mesh::symmetric(1.0, 3.0).unwrap();
        let phi = Field1D::from_fn(mesh, 1.0, |x| (-x * x / 4.0).exp()).unwrap();
        assert!(matches!(profile_slope(&phi, 0.01), Err(RgError::TooFewPoints { .. })));
        let mesh = Mesh::symmetric(0.05, 12.0).unwrap();
        let phi = Field1D::from_fn(mesh, 1.0, |x| 2.0 * (-x * x / 4.0).exp()).unwrap();
        assert!(profile_slope(&phi, 0.01).is_err());
    }

    fn synthetic(amps: impl Fn(f64) -> f64, n: usize) -> Vec<IterationRecord> {
        (1..=n)
            .map(|k| IterationRecord {
                n: k,
                alpha: 0.75,
                beta: 0.75,
                amp: amps(k as f64),
                width: 1.0,
                rel_diff_l1: 0.0,
                rel_diff_linf: 0.0,
                params: EquationParams::heat(),
            })
            .collect()
    }

    #[test]
    fn loglog_recovers_power_law() {
        let fit = loglog_prefactor_fit(&synthetic(|n| 0.37 * n.powf(-0.75), 40), 0.5).unwrap();
        assert_abs_diff_eq!(fit.slope, -0.75, epsilon = 1e-6);
        assert_abs_diff_eq!(fit.intercept, 0.37f64.ln(), epsilon = 1e-9);
        assert_eq!(fit.n_points, 20);
        assert!(matches!(
            loglog_prefactor_fit(&synthetic(|_| 1.0, 9), 0.5),
            Err(RgError::TooFewPoints { .. })
        ));
    }

    proptest! {
        #[test]
        fn fit_line_recovers_exact_lines(m in -5.0..5.0f64, c in -5.0..5.0f64, n in 2usize..50) {
            let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.3 - 1.0).collect();
            let ys: Vec<f64> = xs.iter().map(|x| m * x + c).collect();
            let fit = fit_line(&xs, &ys).unwrap();
            prop_assert!((fit.slope - m).abs() < 1e-9);
            prop_assert!((fit.intercept - c).abs() < 1e-9);
            prop_assert!(fit.residual >= 0.0 && fit.residual < 1e-9);
        }
    }
}
