//! CSV and JSON writers. Floats carry 17 significant digits.

use std::fs;
use std::path::Path;

use rgscope_core::diagnostics::{d_f, eta_f, SlopeFit};
use rgscope_core::{EquationParams, Field1D, IterationRecord, RunReport, StopReason};
use serde_json::{json, Value};

use crate::error::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("cannot create {}: {e}", dir.display())))
}

pub const RECORD_COLUMNS: [&str; 11] = [
    "n",
    "alpha_n",
    "beta_n",
    "A_n",
    "B_n",
    "rel_diff_l1",
    "rel_diff_linf",
    "lambda_n",
    "chi_n",
    "omega_n",
    "delta_n",
];

pub fn write_records(path: &Path, records: &[IterationRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            num(r.alpha),
            num(r.beta),
            num(r.amp),
            num(r.width),
            num(r.rel_diff_l1),
            num(r.rel_diff_linf),
            num(r.params.lambda),
            num(r.params.chi),
            num(r.params.omega),
            num(r.params.delta),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_profile(path: &Path, phi: &Field1D) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "phi"])?;
    for (j, &v) in phi.values().iter().enumerate() {
        w.write_record([num(phi.x(j)), num(v)])?;
    }
    w.flush()?;
    Ok(())
}

fn fit_json(fit: Option<SlopeFit>) -> Value {
    match fit {
        Some(f) => json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "residual": f.residual,
            "n_points": f.n_points,
        }),
        None => Value::Null,
    }
}

fn params_json(p: &EquationParams) -> Value {
    json!({
        "chi": p.chi, "p": p.p, "delta": p.delta, "r": p.r, "eps": p.eps,
        "mu": p.mu, "omega": p.omega, "m": p.m, "lambda": p.lambda,
        "a": p.a, "b": p.b, "c": p.c,
    })
}

pub fn report_json(initial: &EquationParams, report: &RunReport) -> Value {
    let last = report.last();
    json!({
        "status": match report.stop {
            StopReason::Converged => "converged",
            StopReason::MaxIterations => "max_iter",
        },
        "iterations": report.records.len(),
        "alpha_hat": report.alpha_hat,
        "beta_last": last.beta,
        "A_last": last.amp,
        "B_last": last.width,
        "rel_diff_l1": last.rel_diff_l1,
        "slope_fit": fit_json(report.slope_fit),
        "loglog_fit": fit_json(report.loglog_fit),
        "d_F": d_f(initial.a, initial.b, initial.c),
        "eta_F": eta_f(initial.a, initial.b, initial.c, initial.p),
        "clamped_samples": report.clamped,
        "notes": report.notes,
        "initial_params": params_json(initial),
        "final_params": params_json(&last.params),
    })
}

pub fn failure_json(initial: &EquationParams, error: &str, records: &[IterationRecord]) -> Value {
    json!({
        "status": "error",
        "error": error,
        "iterations": records.len(),
        "alpha_hat": records.last().map(|r| r.alpha),
        "initial_params": params_json(initial),
    })
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

pub fn write_pairs(path: &Path, header: [&str; 2], rows: &[(f64, f64)]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for &(a, b) in rows {
        w.write_record([num(a), num(b)])?;
    }
    w.flush()?;
    Ok(())
}
