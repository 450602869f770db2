//! Coefficient and factorization check for the PM scheme.

use std::fmt::Write;

use hyperinv::coeffs::{verify_pm_factorization, PmCoefficients, CLOSED_FORMS};
use hyperinv::scalar::{Ext, Precision, Real};
use serde::Serialize;

use crate::config::Perturbation;
use crate::error::{BenchError, Result};

/// Digits of the extended-precision check.
pub const VERIFY_DIGITS: u32 = 150;
pub const DOUBLE_TOL: f64 = 1e-12;
pub const EXTENDED_TOL: f64 = 1e-140;
/// Significant digits printed for each coefficient.
const SHOWN_DIGITS: usize = 40;

#[derive(Clone, Debug, Serialize)]
pub struct CoefficientLine {
    pub name: &'static str,
    pub closed_form: &'static str,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSet {
    /// `None` for double precision.
    pub digits: Option<u32>,
    pub tol: f64,
    /// Largest residual of the seven-equation system, the three-equation
    /// system and the two-equation system.
    pub system_residuals: [f64; 3],
    pub polynomial_error: f64,
    pub worst_degree: usize,
    /// `|coefficient of tⁱ − 1|` for `i = 0..17`.
    pub coefficient_errors: Vec<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoeffReport {
    pub perturbation: Option<String>,
    pub coefficients: Vec<CoefficientLine>,
    pub checks: Vec<CheckSet>,
    pub passed: bool,
}

fn max_abs<R: Real>(v: &[R]) -> f64 {
    v.iter().map(|r| r.abs().to_f64().abs()).fold(0.0, f64::max)
}

fn check<R: Real>(
    prec: Precision,
    tol: f64,
    perturb: Option<&Perturbation>,
) -> Result<(PmCoefficients<R>, CheckSet)> {
    let mut c = PmCoefficients::<R>::new(prec);
    if let Some(p) = perturb {
        let slot = c
            .get_mut(&p.name)
            .ok_or_else(|| BenchError::Config(format!("no coefficient named `{}`", p.name)))?;
        *slot = slot.clone() + R::from_f64(p.delta, prec);
    }
    let res = c.system_residuals();
    let system_residuals = [
        max_abs(&res.outer),
        max_abs(&res.inner_a),
        max_abs(&res.inner_b),
    ];
    let fact = verify_pm_factorization(&c, &R::from_f64(tol, prec));
    let polynomial_error = fact.max_coefficient_error.to_f64();
    let coefficient_errors = fact
        .coefficients
        .iter()
        .map(|v| (v.clone() - R::one()).abs().to_f64())
        .collect();
    let passed = fact.ok && system_residuals.iter().all(|r| *r <= tol);
    let set = CheckSet {
        digits: prec.is_extended().then(|| prec.decimal_digits()),
        tol,
        system_residuals,
        polynomial_error,
        worst_degree: fact.worst_degree,
        coefficient_errors,
        passed,
    };
    Ok((c, set))
}

/// Evaluates the coefficients at double and at 150 digits, optionally
/// perturbing one of them, and checks the defining systems and the
/// polynomial identity.
pub fn verify_coeffs(perturb: Option<&Perturbation>) -> Result<CoeffReport> {
    let (_, double) = check::<f64>(Precision::Double, DOUBLE_TOL, perturb)?;
    let (ext, extended) = check::<Ext>(Precision::extended(VERIFY_DIGITS), EXTENDED_TOL, perturb)?;
    let coefficients = ext
        .named()
        .iter()
        .zip(CLOSED_FORMS)
        .map(|((name, v), (_, form))| CoefficientLine {
            name,
            closed_form: form,
            value: v.to_decimal(Some(SHOWN_DIGITS)),
        })
        .collect();
    Ok(CoeffReport {
        perturbation: perturb.map(|p| p.to_string()),
        passed: double.passed && extended.passed,
        coefficients,
        checks: vec![double, extended],
    })
}

impl CoeffReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(p) = &self.perturbation {
            let _ = writeln!(out, "perturbed: {p}");
        }
        for c in &self.coefficients {
            let _ = writeln!(out, "{:<4} = {:<28} ≈ {}", c.name, c.closed_form, c.value);
        }
        for s in &self.checks {
            let label = match s.digits {
                Some(d) => format!("{d} digits"),
                None => "double".to_string(),
            };
            let _ = writeln!(
                out,
                "{label:<10} systems {:.3e} {:.3e} {:.3e}  polynomial {:.3e} (degree {})  tol {:.0e}  {}",
                s.system_residuals[0],
                s.system_residuals[1],
                s.system_residuals[2],
                s.polynomial_error,
                s.worst_degree,
                s.tol,
                if s.passed { "ok" } else { "FAILED" },
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_passes() {
        let r = verify_coeffs(None).unwrap();
        assert!(r.passed);
        let a3 = r.coefficients.iter().find(|c| c.name == "a3").unwrap();
        assert_eq!(a3.closed_form, "1/2");
        assert!(r.render().contains("a3   = 1/2 "));
    }

    #[test]
    fn perturbed_mu_fails_at_cubic_term() {
        let p: Perturbation = "mu=1e-3".parse().unwrap();
        let r = verify_coeffs(Some(&p)).unwrap();
        assert!(!r.passed);
        for s in &r.checks {
            assert!((s.polynomial_error - 1e-3).abs() < 1e-12);
            assert!((s.coefficient_errors[3] - 1e-3).abs() < 1e-12);
            assert!(s.coefficient_errors[4] < 1e-12);
        }
    }

    #[test]
    fn unknown_coefficient_is_an_error() {
        let p: Perturbation = "zeta=1".parse().unwrap();
        assert!(verify_coeffs(Some(&p)).is_err());
    }
}
