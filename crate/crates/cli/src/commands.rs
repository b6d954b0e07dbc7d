use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use rgscope_core::diagnostics::{alpha_theory, classify_regime};
use rgscope_core::homog::{self, HomogProblem, Sampler};
use rgscope_core::validation::{run_checks, ValidationConfig};
use rgscope_core::{rg_run, StopReason};

use crate::config::{self, Coefficient, Source};
use crate::error::{CliError, EXIT_NOT_CONVERGED};
use crate::output::{self, num};

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))
}

pub fn run(path: &Path) -> Result<u8, CliError> {
    let cfg = config::load_run(path)?;
    let f0 = cfg.validate_point(&cfg.params)?;
    let policy = cfg.policy_for(&cfg.params);
    let out = config::resolve_out_dir(cfg.out_dir.as_deref());
    output::ensure_dir(&out)?;
    match rg_run(&f0, &cfg.params, &policy) {
        Ok(report) => {
            output::write_records(&out.join("records.csv"), &report.records)?;
            output::write_profile(&out.join("profile.csv"), &report.final_profile)?;
            output::write_json(&out.join("report.json"), &output::report_json(&cfg.params, &report))?;
            let last = report.last();
            println!(
                "{} after {} iterations: alpha = {:.6}, beta = {:.6}, A = {:.6}, rel_diff_l1 = {:.3e}",
                if report.converged() { "converged" } else { "stopped at max_iter" },
                report.records.len(),
                report.alpha_hat,
                last.beta,
                last.amp,
                last.rel_diff_l1
            );
            if let Some(fit) = report.slope_fit {
                println!("profile slope = {:.6}", fit.slope);
            }
            for note in &report.notes {
                println!("note: {note}");
            }
            println!("output written to {}", out.display());
            Ok(match report.stop {
                StopReason::Converged => 0,
                StopReason::MaxIterations => EXIT_NOT_CONVERGED,
            })
        }
        Err(err) => {
            output::write_records(&out.join("records.csv"), &err.records)?;
            output::write_json(
                &out.join("report.json"),
                &output::failure_json(&cfg.params, &err.error.to_string(), &err.records),
            )?;
            Err(CliError::Numeric(err.to_string()))
        }
    }
}

struct SweepRow {
    status: String,
    iterations: usize,
    alpha_hat: f64,
    loglog_slope: f64,
    error: String,
}

pub fn sweep(path: &Path, jobs: usize) -> Result<u8, CliError> {
    let cfg = config::load_sweep(path)?;
    let out = config::resolve_out_dir(cfg.base.out_dir.as_deref());
    output::ensure_dir(&out)?;
    let total = cfg.len();
    let rows: Vec<SweepRow> = pool(jobs)?.install(|| {
        (0..total)
            .into_par_iter()
            .map(|i| {
                let failed = |status: &str, error: String| SweepRow {
                    status: status.into(),
                    iterations: 0,
                    alpha_hat: f64::NAN,
                    loglog_slope: f64::NAN,
                    error,
                };
                let params = match cfg.params_at(i) {
                    Ok(p) => p,
                    Err(e) => return failed("config_error", e.to_string()),
                };
                let f0 = match cfg.base.validate_point(&params) {
                    Ok(f) => f,
                    Err(e) => return failed("config_error", e.to_string()),
                };
                match rg_run(&f0, &params, &cfg.base.policy_for(&params)) {
                    Ok(r) => SweepRow {
                        status: if r.converged() { "converged" } else { "max_iter" }.into(),
                        iterations: r.records.len(),
                        alpha_hat: r.alpha_hat,
                        loglog_slope: r.loglog_fit.map(|f| f.slope).unwrap_or(f64::NAN),
                        error: String::new(),
                    },
                    Err(e) => SweepRow {
                        status: "error".into(),
                        iterations: e.records.len(),
                        alpha_hat: e.records.last().map(|r| r.alpha).unwrap_or(f64::NAN),
                        loglog_slope: f64::NAN,
                        error: e.error.to_string(),
                    },
                }
            })
            .collect()
    });

    let mut w = csv::Writer::from_path(out.join("sweep.csv"))?;
    let mut header: Vec<String> = vec!["index".into()];
    header.extend(cfg.axes.iter().map(|(n, _)| n.clone()));
    header.extend(
        ["status", "iterations", "alpha_hat", "alpha_theory", "loglog_slope", "regime", "error"].map(String::from),
    );
    w.write_record(&header)?;
    let mut failures = 0;
    for (i, row) in rows.iter().enumerate() {
        let params = cfg.params_at(i).unwrap_or(cfg.base.params);
        let mut rec: Vec<String> = vec![i.to_string()];
        rec.extend(cfg.point(i).into_iter().map(num));
        rec.push(row.status.clone());
        rec.push(row.iterations.to_string());
        rec.push(num(row.alpha_hat));
        rec.push(num(alpha_theory(params.p, params.a)));
        rec.push(num(row.loglog_slope));
        rec.push(classify_regime(params.p, params.a).as_str().into());
        rec.push(row.error.clone());
        w.write_record(&rec)?;
        if !row.error.is_empty() {
            failures += 1;
        }
    }
    w.flush()?;
    println!("{total} points, {failures} failed; results in {}", out.join("sweep.csv").display());
    Ok(if failures == 0 { 0 } else { 1 })
}

fn coefficient_sampler(c: Coefficient) -> Sampler {
    match c {
        Coefficient::Cosine(mu) => Arc::new(move |y: f64| 1.0 + mu * (2.0 * PI * y).cos()),
        Coefficient::Constant(v) => Arc::new(move |_| v),
        Coefficient::Step(low, high) => Arc::new(move |y: f64| if y.rem_euclid(1.0) < 0.5 { low } else { high }),
    }
}

fn source_sampler(s: &Source) -> Sampler {
    match s.clone() {
        Source::Constant(v) => Arc::new(move |_| v),
        Source::Poly(coeffs) => Arc::new(move |x: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)),
        Source::Sine(k) => Arc::new(move |x: f64| (k * x).sin()),
    }
}

/// Evaluation points written to `homog_profiles.csv`.
const PROFILE_POINTS: usize = 401;

pub fn homog(path: &Path) -> Result<u8, CliError> {
    let cfg = config::load_homog(path)?;
    let f = source_sampler(&cfg.source);
    let problem = HomogProblem::new(coefficient_sampler(cfg.coefficient), f.clone(), cfg.quad_n)
        .map_err(|e| CliError::Config(format!("[homog]: {e}")))?;
    let out = config::resolve_out_dir(cfg.out_dir.as_deref());
    output::ensure_dir(&out)?;
    let numeric = |e: rgscope_core::RgError| CliError::Numeric(e.to_string());

    let d_star = problem.effective_coefficient().map_err(numeric)?;
    println!("D* = {d_star:.6}");

    let curve = homog::convergence_curve(&problem, &cfg.eps).map_err(numeric)?;
    output::write_pairs(&out.join("homog_convergence.csv"), ["eps", "sup_error"], &curve)?;
    for (eps, err) in &curve {
        println!("eps = {eps:.6e}  sup|u_eps - u_0| = {err:.6e}");
    }

    let amp = cfg.mean_value_amp;
    let (a, b) = cfg.mean_value_interval;
    let fm = f.clone();
    let mv = homog::mean_value_check(move |y, x| (1.0 + amp * (2.0 * PI * y).cos()) * fm(x), a, b, &cfg.eps)
        .map_err(numeric)?;
    output::write_pairs(&out.join("mean_value.csv"), ["eps", "discrepancy"], &mv)?;

    let smallest = cfg.eps.iter().cloned().fold(f64::INFINITY, f64::min);
    let ue = homog::solve_eps(&problem, smallest).map_err(numeric)?;
    let u0 = homog::solve_homogenized(&problem).map_err(numeric)?;
    let mut w = csv::Writer::from_path(out.join("homog_profiles.csv"))?;
    w.write_record(["x", "u0", "u_eps"])?;
    for i in 0..PROFILE_POINTS {
        let x = -1.0 + 2.0 * i as f64 / (PROFILE_POINTS - 1) as f64;
        w.write_record([num(x), num(u0.eval(x)), num(ue.eval(x))])?;
    }
    w.flush()?;
    output::write_json(
        &out.join("homog.json"),
        &serde_json::json!({
            "d_star": d_star,
            "profile_eps": smallest,
            "convergence": curve.iter().map(|&(e, s)| serde_json::json!({"eps": e, "sup_error": s})).collect::<Vec<_>>(),
            "mean_value": mv.iter().map(|&(e, d)| serde_json::json!({"eps": e, "discrepancy": d})).collect::<Vec<_>>(),
        }),
    )?;
    println!("output written to {}", out.display());
    Ok(0)
}

pub fn validate(only: &[String], jobs: usize, dt_safety: f64) -> Result<u8, CliError> {
    if !(dt_safety > 0.0) {
        return Err(CliError::Config(format!("dt-safety must be positive, got {dt_safety}")));
    }
    let config = ValidationConfig { dt_safety, jobs };
    let outcomes = run_checks(only, &config).map_err(|e| CliError::Config(e.to_string()))?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", outcomes.len() - failed);
    Ok(if failed == 0 { 0 } else { 1 })
}
