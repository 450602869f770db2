//! The hyperpower scheme catalog and its one-loop updates.
//!
//! Every scheme computes `X⁺ = X·P(R)` with `R = I − AX` and `P` some
//! factorization of `1 + t + … + t^(p−1)`; they differ only in how many
//! matrix products that costs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coeffs::PmCoefficients;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{Precision, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SchemeId {
    /// Newton–Schulz, order 2.
    Sm,
    /// Chebyshev, order 3.
    Cm,
    /// Factored seventh-order scheme.
    Fm,
    /// 18th order through the five-factor cyclotomic split.
    Hm,
    /// 18th order in seven products.
    Pm,
    /// `Pm` followed by the symmetrizing update `X A X`.
    PmStable,
    /// Plain hyperpower iteration of order `p` evaluated by Horner's rule.
    Hyperpower(u32),
}

impl SchemeId {
    pub const CATALOG: [SchemeId; 6] = [
        SchemeId::Sm,
        SchemeId::Cm,
        SchemeId::Fm,
        SchemeId::Hm,
        SchemeId::Pm,
        SchemeId::PmStable,
    ];

    /// Convergence order.
    pub fn order(self) -> u32 {
        match self {
            SchemeId::Sm => 2,
            SchemeId::Cm => 3,
            SchemeId::Fm => 7,
            SchemeId::Hm | SchemeId::Pm | SchemeId::PmStable => 18,
            SchemeId::Hyperpower(p) => p,
        }
    }

    /// Nominal number of matrix products per loop.
    ///
    /// For `PmStable` this is the usually quoted 8; the update as written
    /// performs 9 (see [`SchemeId::matmuls_per_loop`]).
    pub fn nominal_matmuls(self) -> u32 {
        match self {
            SchemeId::Sm => 2,
            SchemeId::Cm => 3,
            SchemeId::Fm => 5,
            SchemeId::Hm => 9,
            SchemeId::Pm => 7,
            SchemeId::PmStable => 8,
            SchemeId::Hyperpower(p) => p,
        }
    }

    /// Products actually performed by [`SchemeStep::step`].
    pub fn matmuls_per_loop(self) -> u32 {
        match self {
            SchemeId::PmStable => 9,
            other => other.nominal_matmuls(),
        }
    }

    pub fn efficiency_index(self) -> f64 {
        crate::driver::efficiency_index(self.order(), self.nominal_matmuls())
    }

    fn validate(self) -> Result<Self> {
        match self {
            SchemeId::Hyperpower(p) if p < 2 => Err(Error::InvalidInput(format!(
                "hyperpower order must be at least 2, got {p}"
            ))),
            other => Ok(other),
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeId::Sm => f.write_str("SM"),
            SchemeId::Cm => f.write_str("CM"),
            SchemeId::Fm => f.write_str("FM"),
            SchemeId::Hm => f.write_str("HM"),
            SchemeId::Pm => f.write_str("PM"),
            SchemeId::PmStable => f.write_str("PM_STABLE"),
            SchemeId::Hyperpower(p) => write!(f, "HYPERPOWER({p})"),
        }
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    /// Accepts `sm`, `pm-stable`, `pm_stable`, `hyperpower(5)`,
    /// `hyperpower:5`, `hp5` and so on, case-insensitively.
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase().replace('-', "_");
        let id = match lower.as_str() {
            "sm" => SchemeId::Sm,
            "cm" => SchemeId::Cm,
            "fm" => SchemeId::Fm,
            "hm" => SchemeId::Hm,
            "pm" => SchemeId::Pm,
            "pm_stable" | "pms" => SchemeId::PmStable,
            other => {
                let digits = other
                    .strip_prefix("hyperpower")
                    .or_else(|| other.strip_prefix("hp"))
                    .map(|rest| rest.trim_matches(|c| matches!(c, '(' | ')' | ':' | '_')))
                    .ok_or_else(|| Error::InvalidInput(format!("unknown scheme `{s}`")))?;
                let p = digits
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad hyperpower order in `{s}`")))?;
                SchemeId::Hyperpower(p)
            }
        };
        id.validate()
    }
}

impl From<SchemeId> for String {
    fn from(id: SchemeId) -> String {
        id.to_string()
    }
}

impl TryFrom<String> for SchemeId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Stateful one-loop updater. Holds the scheme's coefficients at the working
/// precision and counts every matrix product it performs.
#[derive(Clone, Debug)]
pub struct SchemeStep<T: Scalar> {
    id: SchemeId,
    coeffs: Option<PmCoefficients<T::Real>>,
    matmuls: usize,
    last_matmuls: usize,
}

impl<T: Scalar> SchemeStep<T> {
    pub fn new(id: SchemeId, precision: Precision) -> Result<Self> {
        let id = id.validate()?;
        let coeffs =
            matches!(id, SchemeId::Pm | SchemeId::PmStable).then(|| PmCoefficients::new(precision));
        Ok(Self {
            id,
            coeffs,
            matmuls: 0,
            last_matmuls: 0,
        })
    }

    /// Uses explicit coefficients instead of the closed forms.
    pub fn with_coefficients(mut self, coeffs: PmCoefficients<T::Real>) -> Self {
        if self.coeffs.is_some() {
            self.coeffs = Some(coeffs);
        }
        self
    }

    pub fn id(&self) -> SchemeId {
        self.id
    }

    /// Products performed since construction.
    pub fn total_matmuls(&self) -> usize {
        self.matmuls
    }

    /// Products performed by the most recent [`step`](Self::step).
    pub fn last_matmuls(&self) -> usize {
        self.last_matmuls
    }

    /// One full loop of the scheme.
    pub fn step(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if a.rows() != x.cols() || a.cols() != x.rows() {
            return Err(Error::Shape {
                op: "scheme step",
                left: a.shape(),
                right: x.shape(),
            });
        }
        let before = self.matmuls;
        let next = match self.id {
            SchemeId::Sm => self.sm(a, x),
            SchemeId::Cm => self.cm(a, x),
            SchemeId::Fm => self.fm(a, x),
            SchemeId::Hm => self.hm(a, x),
            SchemeId::Pm => self.pm(a, x),
            SchemeId::PmStable => self.pm(a, x).and_then(|half| {
                let y = self.mm(a, &half)?;
                self.mm(&half, &y)
            }),
            SchemeId::Hyperpower(p) => self.hyperpower(a, x, p),
        };
        self.last_matmuls = self.matmuls - before;
        let next = next?;
        if !next.all_finite() {
            return Err(Error::NonFinite { op: "scheme step" });
        }
        Ok(next)
    }

    fn mm(&mut self, l: &DenseMatrix<T>, r: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.matmuls += 1;
        l.matmul(r)
    }

    fn residual(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        self.mm(a, x)?.identity_minus(&T::one())
    }

    fn int(&self, k: i64, x: &DenseMatrix<T>) -> T {
        T::from_ratio(k, 1, x.precision())
    }

    fn sm(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let ax = self.mm(a, x)?;
        let two = self.int(2, x);
        self.mm(x, &ax.identity_minus(&two)?)
    }

    fn cm(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let three = self.int(3, x);
        let y = self.mm(a, x)?;
        let z = self.mm(&y, &y.identity_minus(&three)?)?;
        self.mm(x, &z.identity_minus(&three)?)
    }

    fn fm(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let psi = self.residual(a, x)?;
        let psi2 = self.mm(&psi, &psi)?;
        let psi4 = self.mm(&psi2, &psi2)?;
        let zeta = psi.add(&psi2)?.add_identity(&T::one())?;
        let upsilon = psi.add(&psi4)?;
        let uz = self.mm(&upsilon, &zeta)?;
        self.mm(x, &uz.add_identity(&T::one())?)
    }

    fn hm(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let one = T::one();
        let r = self.residual(a, x)?;
        let r2 = self.mm(&r, &r)?;
        let r3 = self.mm(&r2, &r)?;
        let r6 = self.mm(&r3, &r3)?;
        let f1 = r.add_identity(&one)?;
        let f2 = r2.sub(&r)?.add_identity(&one)?;
        let f3 = r2.add(&r)?.add_identity(&one)?;
        let f4 = r6.sub(&r3)?.add_identity(&one)?;
        let f5 = r6.add(&r3)?.add_identity(&one)?;
        let mut p = self.mm(&f1, &f2)?;
        for f in [&f3, &f4, &f5] {
            p = self.mm(&p, f)?;
        }
        self.mm(x, &p)
    }

    fn pm(&mut self, a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        let c = self
            .coeffs
            .clone()
            .expect("PM coefficients are set at construction");
        let one = T::one();
        let r = self.residual(a, x)?;
        let r2 = self.mm(&r, &r)?;
        let r4 = self.mm(&r2, &r2)?;
        let base = r4.add_identity(&one)?;
        let m = self.mm(&base.add_scaled(&c.c1, &r2)?, &base.add_scaled(&c.c2, &r2)?)?;
        let t = m.add_scaled(&c.c3, &r2)?;
        let s = m.add_scaled(&c.d1, &r2)?.add_scaled(&c.d2, &r4)?;
        let b = self
            .mm(&t, &s)?
            .add_scaled(&c.mu, &r2)?
            .add_scaled(&c.psi, &r4)?;
        let d = self.mm(&r.add_identity(&one)?, &b)?;
        self.mm(x, &d)
    }

    fn hyperpower(
        &mut self,
        a: &DenseMatrix<T>,
        x: &DenseMatrix<T>,
        p: u32,
    ) -> Result<DenseMatrix<T>> {
        let one = T::one();
        let r = self.residual(a, x)?;
        let mut s = r.add_identity(&one)?;
        for _ in 2..p {
            s = self.mm(&r, &s)?.add_identity(&one)?;
        }
        self.mm(x, &s)
    }
}

/// One loop of `id` from `x`, returning the new iterate and the number of
/// products it took.
pub fn scheme_step<T: Scalar>(
    id: SchemeId,
    a: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
) -> Result<(DenseMatrix<T>, usize)> {
    let mut stepper = SchemeStep::new(id, x.precision())?;
    let next = stepper.step(a, x)?;
    Ok((next, stepper.last_matmuls()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ext;

    fn m1(v: f64) -> DenseMatrix<f64> {
        DenseMatrix::from_f64_rows(&[vec![v]], Precision::Double).unwrap()
    }

    #[test]
    fn parse_and_display() {
        for id in SchemeId::CATALOG {
            assert_eq!(id.to_string().parse::<SchemeId>().unwrap(), id);
        }
        assert_eq!("pm-stable".parse::<SchemeId>().unwrap(), SchemeId::PmStable);
        assert_eq!(
            "hyperpower:5".parse::<SchemeId>().unwrap(),
            SchemeId::Hyperpower(5)
        );
        assert_eq!(
            "HP18".parse::<SchemeId>().unwrap(),
            SchemeId::Hyperpower(18)
        );
        assert!("hyperpower(1)".parse::<SchemeId>().is_err());
        assert!("xm".parse::<SchemeId>().is_err());
        let json = serde_json::to_string(&SchemeId::Hyperpower(4)).unwrap();
        assert_eq!(json, "\"HYPERPOWER(4)\"");
        assert_eq!(
            serde_json::from_str::<SchemeId>(&json).unwrap(),
            SchemeId::Hyperpower(4)
        );
    }

    #[test]
    fn newton_scalar_step() {
        let (x, n) = scheme_step(SchemeId::Sm, &m1(2.0), &m1(0.4)).unwrap();
        assert!((x[(0, 0)] - 0.48).abs() < 1e-15);
        assert_eq!(n, 2);
    }

    #[test]
    fn pm_scalar_matches_closed_form() {
        let (x, _) = scheme_step(SchemeId::Pm, &m1(2.0), &m1(0.4)).unwrap();
        let want = (1.0 - 0.2f64.powi(18)) / 2.0;
        assert!((x[(0, 0)] - want).abs() < 1e-15);
    }

    #[test]
    fn fixed_point() {
        let a =
            DenseMatrix::<f64>::from_f64_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]], Precision::Double)
                .unwrap();
        let x = crate::decomp::inverse(&a).unwrap();
        for id in SchemeId::CATALOG {
            let (y, _) = scheme_step(id, &a, &x).unwrap();
            assert!(y.max_abs_diff(&x).unwrap() < 1e-14, "{id}");
        }
    }

    #[test]
    fn counts_per_loop() {
        let a = crate::matrix::hilbert::<f64>(4, 3, Precision::Double);
        let x = a.transpose().scale(&0.5);
        for id in SchemeId::CATALOG
            .into_iter()
            .chain([2, 3, 7, 18].map(SchemeId::Hyperpower))
        {
            let mut s = SchemeStep::new(id, Precision::Double).unwrap();
            s.step(&a, &x).unwrap();
            assert_eq!(s.last_matmuls() as u32, id.matmuls_per_loop(), "{id}");
            s.step(&a, &x).unwrap();
            assert_eq!(s.total_matmuls() as u32, 2 * id.matmuls_per_loop());
        }
    }

    #[test]
    fn non_finite_is_reported() {
        let err = scheme_step(SchemeId::Sm, &m1(1e200), &m1(1e200)).unwrap_err();
        assert_eq!(err, Error::NonFinite { op: "scheme step" });
    }

    #[test]
    fn shape_mismatch() {
        let a = DenseMatrix::<f64>::zeros(3, 2, Precision::Double);
        let x = DenseMatrix::<f64>::zeros(3, 2, Precision::Double);
        assert!(matches!(
            scheme_step(SchemeId::Pm, &a, &x),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn pm_extended_scalar() {
        let prec = Precision::extended(60);
        let a = DenseMatrix::<Ext>::new(1, 1, vec![Ext::from_i64(2, prec)], prec).unwrap();
        let x0 = DenseMatrix::new(1, 1, vec![Ext::from_f64(0.4, prec)], prec).unwrap();
        let (x1, _) = scheme_step(SchemeId::Pm, &a, &x0).unwrap();
        let r0 = Ext::from_i64(1, prec) - Ext::from_i64(2, prec) * x0[(0, 0)].clone();
        let r1 = Ext::from_i64(1, prec) - Ext::from_i64(2, prec) * x1[(0, 0)].clone();
        let want = crate::scalar::Real::powi(&r0, 18);
        let err = Scalar::abs(&(r1 - want.clone())) / Scalar::abs(&want);
        assert!(err.to_f64() < 1e-40, "{err:?}");
    }
}
