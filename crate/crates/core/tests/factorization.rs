//! Exact check of the 18th-order factorization over Q(√93)(w), with
//! w² = 27 − 2√93, independent of the floating-point expansion in the crate.

use std::ops::{Add, Mul};

use hyperinv::coeffs::{verify_pm_factorization, PmCoefficients, CLOSED_FORMS};
use hyperinv::scalar::{Ext, Precision, Real, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `a + b√93`.
#[derive(Clone, Debug, PartialEq)]
struct K {
    a: BigRational,
    b: BigRational,
}

impl K {
    fn rat(n: i64, d: i64) -> Self {
        K {
            a: q(n, d),
            b: BigRational::zero(),
        }
    }
    fn new(a: BigRational, b: BigRational) -> Self {
        K { a, b }
    }
    fn zero() -> Self {
        K::rat(0, 1)
    }
}

impl Add for K {
    type Output = K;
    fn add(self, o: K) -> K {
        K::new(self.a + o.a, self.b + o.b)
    }
}

impl Mul for K {
    type Output = K;
    fn mul(self, o: K) -> K {
        let b93 = q(93, 1) * &self.b * &o.b;
        K::new(&self.a * &o.a + b93, &self.a * &o.b + &self.b * &o.a)
    }
}

/// `x + y·w`.
#[derive(Clone, Debug, PartialEq)]
struct L {
    x: K,
    y: K,
}

fn w_squared() -> K {
    K::new(q(27, 1), q(-2, 1))
}

impl L {
    fn from_k(x: K) -> Self {
        L { x, y: K::zero() }
    }
    fn rat(n: i64, d: i64) -> Self {
        L::from_k(K::rat(n, d))
    }
    fn zero() -> Self {
        L::rat(0, 1)
    }
    fn one() -> Self {
        L::rat(1, 1)
    }
    fn is_rational(&self, n: i64) -> bool {
        self.y == K::zero() && self.x.b.is_zero() && self.x.a == q(n, 1)
    }
    fn approx(&self) -> f64 {
        let r93 = 93f64.sqrt();
        let w = (27.0 - 2.0 * r93).sqrt();
        let k = |v: &K| v.a.to_f64().unwrap() + v.b.to_f64().unwrap() * r93;
        k(&self.x) + k(&self.y) * w
    }
    fn at(&self, prec: Precision) -> Ext {
        let r93 = Ext::from_i64(93, prec).sqrt();
        let w = (Ext::from_i64(27, prec) - Ext::from_i64(2, prec) * r93.clone()).sqrt();
        let rat = |r: &BigRational| {
            // Numerators and denominators here are small.
            Ext::from_i64(r.numer().to_i64().unwrap(), prec)
                / Ext::from_i64(r.denom().to_i64().unwrap(), prec)
        };
        let k = |v: &K| rat(&v.a) + rat(&v.b) * r93.clone();
        k(&self.x) + k(&self.y) * w
    }
}

impl Add for L {
    type Output = L;
    fn add(self, o: L) -> L {
        L {
            x: self.x + o.x,
            y: self.y + o.y,
        }
    }
}

impl Mul for L {
    type Output = L;
    fn mul(self, o: L) -> L {
        let yy = self.y.clone() * o.y.clone() * w_squared();
        L {
            x: self.x.clone() * o.x.clone() + yy,
            y: self.x * o.y + self.y * o.x,
        }
    }
}

fn poly_mul(p: &[L], r: &[L]) -> Vec<L> {
    let mut out = vec![L::zero(); p.len() + r.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in r.iter().enumerate() {
            out[i + j] = out[i + j].clone() + a.clone() * b.clone();
        }
    }
    out
}

fn poly_add(p: &[L], r: &[L]) -> Vec<L> {
    let n = p.len().max(r.len());
    (0..n)
        .map(|i| {
            p.get(i).cloned().unwrap_or_else(L::zero) + r.get(i).cloned().unwrap_or_else(L::zero)
        })
        .collect()
}

fn surd(a: (i64, i64), b: (i64, i64)) -> L {
    L::from_k(K::new(q(a.0, a.1), q(b.0, b.1)))
}

/// The thirteen coefficients, in the same order as `CLOSED_FORMS`.
fn exact() -> Vec<(&'static str, L)> {
    vec![
        ("a1", surd((155, 496), (5, 496))),
        ("a2", surd((3, 8), (1, 8))),
        ("a3", L::rat(1, 2)),
        ("b1", surd((155, 496), (-5, 496))),
        ("b2", surd((3, 8), (-1, 8))),
        ("b3", L::rat(1, 2)),
        ("mu", L::rat(3, 8)),
        ("psi", L::rat(321, 1984)),
        (
            "c1",
            L {
                x: K::rat(1, 4),
                y: K::rat(1, 4),
            },
        ),
        (
            "c2",
            L {
                x: K::rat(1, 4),
                y: K::rat(-1, 4),
            },
        ),
        ("c3", surd((-93, 496), (5, 496))),
        ("d1", surd((-93, 496), (-5, 496))),
        ("d2", surd((0, 1), (-1, 4))),
    ]
}

fn get(name: &str) -> L {
    exact().into_iter().find(|(n, _)| *n == name).unwrap().1
}

#[test]
fn exact_expansion_is_geometric_sum() {
    let z = L::zero;
    let quad = |c: L| vec![L::one(), z(), c, z(), L::one()];
    let m = poly_mul(&quad(get("c1")), &quad(get("c2")));
    let t = poly_add(&m, &[z(), z(), get("c3")]);
    let s = poly_add(&m, &[z(), z(), get("d1"), z(), get("d2")]);
    let b = poly_add(&poly_mul(&t, &s), &[z(), z(), get("mu"), z(), get("psi")]);
    let p = poly_mul(&[L::one(), L::one()], &b);
    assert_eq!(p.len(), 18);
    for (deg, c) in p.iter().enumerate() {
        assert!(c.is_rational(1), "degree {deg}: {c:?}");
    }
    // T and S carry the a and b coefficients.
    for (i, name) in ["a1", "a2", "a3"].iter().enumerate() {
        assert_eq!(t[2 * (i + 1)], get(name));
    }
    for (i, name) in ["b1", "b2", "b3"].iter().enumerate() {
        assert_eq!(s[2 * (i + 1)], get(name));
    }
}

#[test]
fn double_coefficients_match_exact_values() {
    let c = PmCoefficients::<f64>::new(Precision::Double);
    for ((name, v), (ename, e)) in c.named().iter().zip(exact()) {
        assert_eq!(*name, ename);
        let want = e.approx();
        assert!(
            (**v - want).abs() <= 4.0 * f64::EPSILON * want.abs().max(1.0),
            "{name}: {v} vs {want}"
        );
    }
    assert!(verify_pm_factorization(&c, &1e-12).ok);
}

#[test]
fn extended_coefficients_match_exact_values() {
    let prec = Precision::extended(150);
    let c = PmCoefficients::<Ext>::new(prec);
    let tol = Ext::from_f64(1e-140, prec);
    for ((name, v), (_, e)) in c.named().iter().zip(exact()) {
        let diff = (*v).clone() - e.at(prec);
        assert!(diff.abs() <= tol, "{name}: {}", diff.to_f64());
    }
    assert!(verify_pm_factorization(&c, &tol).ok);
    assert!(c.system_residuals().max_abs() <= tol);
}

#[test]
fn closed_form_table_is_in_field_order() {
    let names: Vec<_> = CLOSED_FORMS.iter().map(|(n, _)| *n).collect();
    let exact_names: Vec<_> = exact().iter().map(|(n, _)| *n).collect();
    assert_eq!(names, exact_names);
    assert_eq!(CLOSED_FORMS[2].1, "1/2");
}
