//! Coefficients of the seven-product 18th-order scheme and the check that
//! its nested factorization reproduces `1 + t + … + t¹⁷`.
//!
//! All factors are polynomials in the single matrix `R = I − AX`, so the
//! identity can be checked on commuting scalar polynomials.

use crate::scalar::{Precision, Real};

/// Real parameters of the factored scheme.
///
/// With `s = R²`:
///
/// ```text
/// M = (I + c1 s + s²)(I + c2 s + s²)
/// T = M + c3 s                    = I + a1 s + a2 s² + a3 s³ + s⁴
/// S = M + d1 s + d2 s²            = I + b1 s + b2 s² + b3 s³ + s⁴
/// X⁺ = X (I + R) (T S + mu s + psi s²)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct PmCoefficients<R> {
    pub a1: R,
    pub a2: R,
    pub a3: R,
    pub b1: R,
    pub b2: R,
    pub b3: R,
    pub mu: R,
    pub psi: R,
    pub c1: R,
    pub c2: R,
    pub c3: R,
    pub d1: R,
    pub d2: R,
    pub precision: Precision,
}

/// Closed-form rendering of each coefficient, in field order.
pub const CLOSED_FORMS: [(&str, &str); 13] = [
    ("a1", "5(31+√93)/496"),
    ("a2", "(3+√93)/8"),
    ("a3", "1/2"),
    ("b1", "−5(√93−31)/496"),
    ("b2", "(3−√93)/8"),
    ("b3", "1/2"),
    ("mu", "3/8"),
    ("psi", "321/1984"),
    ("c1", "(√(27−2√93)+1)/4"),
    ("c2", "(1−√(27−2√93))/4"),
    ("c3", "(5√93−93)/496"),
    ("d1", "(−93−5√93)/496"),
    ("d2", "−√93/4"),
];

impl<R: Real> PmCoefficients<R> {
    /// Evaluates the closed forms at precision `prec`; the surds are computed
    /// at working precision rather than read from decimal literals.
    pub fn new(prec: Precision) -> Self {
        let q = |n: i64, d: i64| R::from_ratio(n, d, prec);
        let r93 = q(93, 1).sqrt();
        let w = (q(27, 1) - q(2, 1) * r93.clone()).sqrt();
        Self {
            a1: q(5, 496) * (q(31, 1) + r93.clone()),
            a2: (q(3, 1) + r93.clone()) * q(1, 8),
            a3: q(1, 2),
            b1: -(q(5, 496) * (r93.clone() - q(31, 1))),
            b2: (q(3, 1) - r93.clone()) * q(1, 8),
            b3: q(1, 2),
            mu: q(3, 8),
            psi: q(321, 1984),
            c1: (w.clone() + q(1, 1)) * q(1, 4),
            c2: (q(1, 1) - w) * q(1, 4),
            c3: (q(5, 1) * r93.clone() - q(93, 1)) * q(1, 496),
            d1: (-q(93, 1) - q(5, 1) * r93.clone()) * q(1, 496),
            d2: -(r93 * q(1, 4)),
            precision: prec,
        }
    }

    /// Coefficients paired with their names, in [`CLOSED_FORMS`] order.
    pub fn named(&self) -> [(&'static str, &R); 13] {
        [
            ("a1", &self.a1),
            ("a2", &self.a2),
            ("a3", &self.a3),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("b3", &self.b3),
            ("mu", &self.mu),
            ("psi", &self.psi),
            ("c1", &self.c1),
            ("c2", &self.c2),
            ("c3", &self.c3),
            ("d1", &self.d1),
            ("d2", &self.d2),
        ]
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut R> {
        Some(match name {
            "a1" => &mut self.a1,
            "a2" => &mut self.a2,
            "a3" => &mut self.a3,
            "b1" => &mut self.b1,
            "b2" => &mut self.b2,
            "b3" => &mut self.b3,
            "mu" => &mut self.mu,
            "psi" => &mut self.psi,
            "c1" => &mut self.c1,
            "c2" => &mut self.c2,
            "c3" => &mut self.c3,
            "d1" => &mut self.d1,
            "d2" => &mut self.d2,
            _ => return None,
        })
    }

    /// Residuals of the three defining systems: the seven equations for
    /// `a, b, mu, psi`, the three for `c`, and the two for `d`.
    pub fn system_residuals(&self) -> SystemResiduals<R> {
        let one = R::one();
        let two = one.clone() + one.clone();
        let half = one.clone() / two.clone();
        let Self {
            a1,
            a2,
            a3,
            b1,
            b2,
            b3,
            mu,
            psi,
            c1,
            c2,
            c3,
            d1,
            d2,
            precision,
        } = self.clone();
        let outer = vec![
            mu.clone() + a1.clone() + b1.clone() - one.clone(),
            a2.clone() + psi.clone() + a1.clone() * b1.clone() + b2.clone() - one.clone(),
            two.clone() * a3.clone() + a2.clone() * b1.clone() + a1.clone() * b2.clone()
                - one.clone(),
            two.clone()
                + a1.clone() * a3.clone()
                + a3.clone() * b1.clone()
                + a2.clone() * b2.clone()
                - one.clone(),
            a1.clone() + a2.clone() * a3.clone() + b1.clone() + a3.clone() * b2.clone()
                - one.clone(),
            a2.clone() + a3.clone() * a3.clone() + b2.clone() - one.clone(),
            two.clone() * a3.clone() - one.clone(),
            b3.clone() - a3.clone(),
        ];
        let inner_a = vec![
            c1.clone() + c2.clone() + c3 - a1,
            two.clone() + c1.clone() * c2.clone() - a2.clone(),
            c1 + c2 - a3,
        ];
        let eight = two.clone() * two.clone() * two.clone();
        let r93 = R::from_ratio(93, 1, precision).sqrt();
        let three = R::from_ratio(3, 1, precision);
        let inner_b = vec![
            d1 + half - b1,
            (eight.clone() * d2 + r93 + three) / eight - b2,
        ];
        SystemResiduals {
            outer,
            inner_a,
            inner_b,
        }
    }
}

/// Residual vectors of the three nonlinear systems.
#[derive(Clone, Debug)]
pub struct SystemResiduals<R> {
    pub outer: Vec<R>,
    pub inner_a: Vec<R>,
    pub inner_b: Vec<R>,
}

impl<R: Real> SystemResiduals<R> {
    pub fn max_abs(&self) -> R {
        self.outer
            .iter()
            .chain(&self.inner_a)
            .chain(&self.inner_b)
            .map(|r| r.abs())
            .fold(R::zero(), Real::max_of)
    }
}

/// Dense polynomial, lowest degree first.
fn poly_mul<R: Real>(p: &[R], q: &[R]) -> Vec<R> {
    let mut out = vec![R::zero(); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] = out[i + j].clone() + a.clone() * b.clone();
        }
    }
    out
}

fn poly_add<R: Real>(p: &[R], q: &[R]) -> Vec<R> {
    let n = p.len().max(q.len());
    (0..n)
        .map(|i| {
            let a = p.get(i).cloned().unwrap_or_else(R::zero);
            let b = q.get(i).cloned().unwrap_or_else(R::zero);
            a + b
        })
        .collect()
}

/// Expands the factored update polynomial in `t` (degree 17).
pub fn expand_pm_polynomial<R: Real>(c: &PmCoefficients<R>) -> Vec<R> {
    let z = R::zero;
    let one = R::one;
    // Polynomials in t; s = t².
    let quad = |ci: &R| vec![one(), z(), ci.clone(), z(), one()];
    let m = poly_mul(&quad(&c.c1), &quad(&c.c2));
    let t_poly = poly_add(&m, &[z(), z(), c.c3.clone()]);
    let s_poly = poly_add(&m, &[z(), z(), c.d1.clone(), z(), c.d2.clone()]);
    let ts = poly_mul(&t_poly, &s_poly);
    let b = poly_add(&ts, &[z(), z(), c.mu.clone(), z(), c.psi.clone()]);
    poly_mul(&[one(), one()], &b)
}

/// Evaluates the factored polynomial at a scalar point.
pub fn evaluate_pm_polynomial<R: Real>(c: &PmCoefficients<R>, t: &R) -> R {
    let s = t.clone() * t.clone();
    let s2 = s.clone() * s.clone();
    let one = R::one();
    let m = (one.clone() + c.c1.clone() * s.clone() + s2.clone())
        * (one.clone() + c.c2.clone() * s.clone() + s2.clone());
    let tt = m.clone() + c.c3.clone() * s.clone();
    let ss = m + c.d1.clone() * s.clone() + c.d2.clone() * s2.clone();
    (one + t.clone()) * (tt * ss + c.mu.clone() * s + c.psi.clone() * s2)
}

/// Outcome of [`verify_pm_factorization`].
#[derive(Clone, Debug)]
pub struct FactorizationCheck<R> {
    pub ok: bool,
    pub max_coefficient_error: R,
    /// Degree at which the largest deviation occurs.
    pub worst_degree: usize,
    pub coefficients: Vec<R>,
}

/// Compares the expanded factored polynomial with `Σ_{i<18} tⁱ`.
pub fn verify_pm_factorization<R: Real>(c: &PmCoefficients<R>, tol: &R) -> FactorizationCheck<R> {
    let coeffs = expand_pm_polynomial(c);
    let mut worst = R::zero();
    let mut worst_degree = 0;
    for (deg, v) in coeffs.iter().enumerate() {
        let target = if deg < 18 { R::one() } else { R::zero() };
        let err = (v.clone() - target).abs();
        if err > worst {
            worst = err;
            worst_degree = deg;
        }
    }
    FactorizationCheck {
        ok: worst <= *tol,
        max_coefficient_error: worst,
        worst_degree,
        coefficients: coeffs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Ext, Scalar};

    #[test]
    fn rational_coefficients_are_exact() {
        let c = PmCoefficients::<f64>::new(Precision::Double);
        assert_eq!(c.a3, 0.5);
        assert_eq!(c.b3, 0.5);
        assert_eq!(c.mu, 0.375);
        assert_eq!(c.psi, 321.0 / 1984.0);
        assert!((c.psi - 0.161_794_354_8).abs() < 1e-10);
    }

    #[test]
    fn surd_coefficients_match_reference_decimals() {
        // 5(31+√93)/496 and −√93/4 evaluated independently at 40 digits.
        let p = Precision::extended(40);
        let c = PmCoefficients::<Ext>::new(p);
        let a1 = Ext::parse_decimal("0.4097142213809773689088712807200873304829", p).unwrap();
        let d2 = Ext::parse_decimal("-2.410912690248238748940007761858165795977", p).unwrap();
        let tol = Ext::from_f64(1e-38, p);
        assert!((c.a1.clone() - a1).abs() < tol);
        assert!((c.d2.clone() - d2).abs() < tol);
    }

    #[test]
    fn factorization_holds_in_double() {
        let c = PmCoefficients::<f64>::new(Precision::Double);
        let check = verify_pm_factorization(&c, &1e-12);
        assert!(check.ok, "max error {}", check.max_coefficient_error);
        assert!(c.system_residuals().max_abs() < 1e-12);
        assert!((evaluate_pm_polynomial(&c, &1.0) - 18.0).abs() < 1e-12);
    }

    #[test]
    fn factorization_holds_at_150_digits() {
        let p = Precision::extended(150);
        let c = PmCoefficients::<Ext>::new(p);
        let tol = Ext::from_f64(1e-140, p);
        let check = verify_pm_factorization(&c, &tol);
        assert!(check.ok, "max error {:?}", check.max_coefficient_error);
        assert!(c.system_residuals().max_abs() < tol);
    }

    #[test]
    fn perturbed_mu_fails_at_cubic_term() {
        let mut c = PmCoefficients::<f64>::new(Precision::Double);
        c.mu += 1e-3;
        let check = verify_pm_factorization(&c, &1e-12);
        assert!(!check.ok);
        assert!(check.max_coefficient_error >= 1e-3 - 1e-12);
        assert!((check.coefficients[3] - 1.0).abs() >= 1e-3 - 1e-12);
    }
}
