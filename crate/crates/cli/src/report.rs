//! Report rendering and exit codes.

use std::process::ExitCode;

use elemnorm_core::elemop::{Certificate, NormReport, IDENTITY_TOL};
use elemnorm_core::hermitian::CMat;
use serde_json::{json, Value};

use crate::io::{entries_of, matrix_to_file, vector_entries};

pub enum Output {
    /// A norm report, rendered as a summary in text mode.
    Report(Value),
    /// Any other JSON result, pretty-printed in text mode.
    Value(Value),
    /// Pre-rendered text written as is.
    Raw(String),
    Silent,
}

impl Output {
    pub fn report(v: Value) -> Self {
        Output::Report(v)
    }

    pub fn value(v: Value) -> Self {
        Output::Value(v)
    }
}

#[derive(Debug)]
pub enum Failure {
    /// Unreadable or inconsistent input; exit code 1.
    Input(String),
    /// A tolerance check failed after computing; exit code 2. The partial
    /// result is still printed.
    Tolerance {
        message: String,
        partial: Option<Value>,
    },
}

pub fn matrix_json(m: &CMat) -> Value {
    if m.nrows() == m.ncols() {
        json!(matrix_to_file(m))
    } else {
        json!({ "rows": m.nrows(), "cols": m.ncols(), "entries": entries_of(m) })
    }
}

fn certificate_json(c: &Certificate) -> Value {
    match c {
        Certificate::Vectors { xi, eta } => json!({
            "xi": vector_entries(xi.as_ref()),
            "eta": vector_entries(eta.as_ref()),
        }),
        Certificate::Unitary { x } => json!({ "x": matrix_json(x) }),
        Certificate::States { rho1, rho2 } => json!({
            "rho1": matrix_json(rho1.matrix()),
            "rho2": matrix_json(rho2.matrix()),
        }),
    }
}

pub fn norm_report_json(r: &NormReport, haagerup: f64, cb: Option<f64>) -> Value {
    json!({
        "value": r.value,
        "method": r.method.as_str(),
        "certificate": r.certificate.as_ref().map(certificate_json),
        "restarts_used": r.restarts_used,
        "converged": r.converged,
        "seed": r.seed,
        "bounds": { "haagerup": haagerup, "cb": cb },
        "diagnostics": {
            "converged_fraction": r.converged_fraction,
            "certificate_error": r.certificate_error,
            "identity_residual": r.identity_residual,
        },
    })
}

/// Fails when the certificate does not reproduce the value within `tol` or
/// the two functional-norm routes drifted apart during the search.
pub fn check_report(r: &NormReport, tol: f64) -> Result<(), Failure> {
    let mut problems = Vec::new();
    if let Some(e) = r.certificate_error {
        if e.is_nan() || e > tol {
            problems.push(format!("certificate reproduces the value only to {e:.3e}"));
        }
    }
    if let Some(res) = r.identity_residual {
        if res.is_nan() || res > IDENTITY_TOL {
            problems.push(format!("tgm and trace-norm routes differ by {res:.3e}"));
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Tolerance {
            message: problems.join("; "),
            partial: Some(norm_report_json(r, f64::NAN, None)),
        })
    }
}

fn summary(v: &Value) -> String {
    let mut out = format!(
        "value: {}\nmethod: {}\nconverged: {} ({} restarts, seed {})\n",
        v["value"],
        v["method"].as_str().unwrap_or("?"),
        v["converged"],
        v["restarts_used"],
        v["seed"]
    );
    out += &format!("haagerup bound: {}\n", v["bounds"]["haagerup"]);
    if !v["bounds"]["cb"].is_null() {
        out += &format!("cb norm: {}\n", v["bounds"]["cb"]);
    }
    if let Some(cross) = v.get("cross_check") {
        out += &format!(
            "{}: {} (relative difference {})\n",
            cross["method"].as_str().unwrap_or("?"),
            cross["value"],
            cross["relative_difference"]
        );
    }
    out
}

fn render(output: &Output, json: bool) -> Option<String> {
    match output {
        Output::Report(v) if !json => Some(summary(v)),
        Output::Report(v) | Output::Value(v) => Some(if json {
            serde_json::to_string(v).expect("serializable") + "\n"
        } else {
            serde_json::to_string_pretty(v).expect("serializable") + "\n"
        }),
        Output::Raw(s) => Some(s.clone() + "\n"),
        Output::Silent => None,
    }
}

pub fn emit(result: Result<Output, Failure>, json: bool) -> ExitCode {
    match result {
        Ok(out) => {
            if let Some(text) = render(&out, json) {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Tolerance { message, partial }) => {
            if let Some(v) = partial {
                print!("{}", render(&Output::Value(v), json).unwrap_or_default());
            }
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use elemnorm_core::elemop::{norm_tgm, ElementaryOperator, NormSettings};
    use elemnorm_core::optimizer::OptimizerConfig;

    #[test]
    fn report_has_contract_fields() {
        let st = NormSettings::with_optimizer(OptimizerConfig::default().with_restarts(4));
        let r = norm_tgm(&ElementaryOperator::identity(2), &st).unwrap();
        let v = norm_report_json(&r, 1.0, None);
        for key in [
            "value",
            "method",
            "certificate",
            "restarts_used",
            "converged",
            "seed",
            "bounds",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["bounds"]["cb"].is_null());
        assert_eq!(v["method"], "tgm_formula");
        assert!(check_report(&r, 1e-6).is_ok());
    }

    #[test]
    fn rectangular_matrices_keep_shape() {
        let v = matrix_json(&CMat::zeros(2, 3));
        assert_eq!(v["rows"], 2);
        assert_eq!(v["cols"], 3);
    }
}
