//! Scalar fields the matrix code is generic over.
//!
//! Four configurations are supported: `f64`, `Complex<f64>`, [`Ext`] and
//! `Complex<Ext>`. The extended type carries its binary precision at run time,
//! so a single build can work at double precision or at a few hundred decimal
//! digits depending on the [`Precision`] a matrix was created with.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::{DBig, FBig};
use num_complex::{Complex, Complex64};
use num_traits::{Num, One, Zero};
use serde::{Deserialize, Serialize};

/// Working precision of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// IEEE binary64.
    Double,
    /// Arbitrary precision carrying at least `digits` decimal digits.
    Extended { digits: u32 },
}

impl Precision {
    pub const fn extended(digits: u32) -> Self {
        Precision::Extended { digits }
    }

    /// Binary mantissa width.
    pub fn bits(self) -> usize {
        match self {
            Precision::Double => 53,
            Precision::Extended { digits } => digits_to_bits(digits),
        }
    }

    /// Approximate number of significant decimal digits.
    pub fn decimal_digits(self) -> u32 {
        match self {
            Precision::Double => 15,
            Precision::Extended { digits } => digits,
        }
    }

    pub fn is_extended(self) -> bool {
        matches!(self, Precision::Extended { .. })
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Precision::Double => f.write_str("double"),
            Precision::Extended { digits } => write!(f, "{digits} digits"),
        }
    }
}

fn digits_to_bits(digits: u32) -> usize {
    (f64::from(digits) * std::f64::consts::LOG2_10).ceil() as usize + 1
}

/// Field element used as a matrix entry.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
{
    type Real: Real;

    const COMPLEX: bool;

    fn from_real(r: Self::Real) -> Self;
    /// Builds `re + i·im`; real types drop the imaginary part.
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn from_f64(x: f64, prec: Precision) -> Self;
    fn from_ratio(num: i64, den: i64, prec: Precision) -> Self;

    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn conj(&self) -> Self;
    /// Modulus.
    fn abs(&self) -> Self::Real;
    fn abs_sqr(&self) -> Self::Real;
    fn scale(&self, r: &Self::Real) -> Self;
    fn is_finite(&self) -> bool;

    /// Whether values of this type can honour `prec`.
    fn supports(prec: Precision) -> bool;

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re().to_f64(), self.im().to_f64())
    }

    /// Lossless widening into the extended complex field.
    fn to_wide(&self, prec: Precision) -> Complex<Ext> {
        Complex::new(self.re().to_ext(prec), self.im().to_ext(prec))
    }

    /// Rounds an extended complex value to this type.
    fn from_wide(z: &Complex<Ext>, prec: Precision) -> Self {
        Self::from_parts(
            <Self::Real as Real>::from_ext(&z.re, prec),
            <Self::Real as Real>::from_ext(&z.im, prec),
        )
    }
}

/// Ordered real field.
pub trait Real: Scalar<Real = Self> + PartialOrd + Num {
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
    /// Unit roundoff scale (distance from 1 to the next representable value).
    fn epsilon(prec: Precision) -> Self;
    fn parse_decimal(s: &str, prec: Precision) -> Option<Self>;
    /// Decimal rendering. `None` asks for a representation that parses back
    /// to the identical value.
    fn to_decimal(&self, sig_digits: Option<usize>) -> String;
    fn to_ext(&self, prec: Precision) -> Ext;
    fn from_ext(x: &Ext, prec: Precision) -> Self;

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

// ---------------------------------------------------------------------------
// f64

impl Scalar for f64 {
    type Real = f64;
    const COMPLEX: bool = false;
    fn from_real(r: f64) -> Self {
        r
    }
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    fn from_f64(x: f64, _prec: Precision) -> Self {
        x
    }
    fn from_ratio(num: i64, den: i64, _prec: Precision) -> Self {
        num as f64 / den as f64
    }
    fn re(&self) -> f64 {
        *self
    }
    fn im(&self) -> f64 {
        0.0
    }
    fn conj(&self) -> Self {
        *self
    }
    fn abs(&self) -> f64 {
        f64::abs(*self)
    }
    fn abs_sqr(&self) -> f64 {
        self * self
    }
    fn scale(&self, r: &f64) -> Self {
        self * r
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn supports(prec: Precision) -> bool {
        prec == Precision::Double
    }
}

impl Real for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn powi(&self, k: u32) -> Self {
        f64::powi(*self, k as i32)
    }
    fn epsilon(_prec: Precision) -> Self {
        f64::EPSILON
    }
    fn parse_decimal(s: &str, _prec: Precision) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn to_decimal(&self, sig_digits: Option<usize>) -> String {
        match sig_digits {
            None => format!("{self:?}"),
            Some(d) => format!("{:.*e}", d.saturating_sub(1), self),
        }
    }
    fn to_ext(&self, prec: Precision) -> Ext {
        Ext::from_f64(*self, prec)
    }
    fn from_ext(x: &Ext, _prec: Precision) -> Self {
        x.to_f64()
    }
}

// ---------------------------------------------------------------------------
// Complex<R>

impl<R: Real> Scalar for Complex<R> {
    type Real = R;
    const COMPLEX: bool = true;
    fn from_real(r: R) -> Self {
        Complex::new(r, R::zero())
    }
    fn from_parts(re: R, im: R) -> Self {
        Complex::new(re, im)
    }
    fn from_f64(x: f64, prec: Precision) -> Self {
        Complex::new(R::from_f64(x, prec), R::zero())
    }
    fn from_ratio(num: i64, den: i64, prec: Precision) -> Self {
        Complex::new(R::from_ratio(num, den, prec), R::zero())
    }
    fn re(&self) -> R {
        self.re.clone()
    }
    fn im(&self) -> R {
        self.im.clone()
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn abs(&self) -> R {
        // Scale by the larger component so the squares stay in range.
        let a = Scalar::abs(&self.re);
        let b = Scalar::abs(&self.im);
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if Zero::is_zero(&big) {
            return big;
        }
        let q = small / big.clone();
        big * (R::one() + q.clone() * q).sqrt()
    }
    fn abs_sqr(&self) -> R {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }
    fn scale(&self, r: &R) -> Self {
        Complex::new(self.re.clone() * r.clone(), self.im.clone() * r.clone())
    }
    fn is_finite(&self) -> bool {
        Scalar::is_finite(&self.re) && Scalar::is_finite(&self.im)
    }
    fn supports(prec: Precision) -> bool {
        R::supports(prec)
    }
}

// ---------------------------------------------------------------------------
// Ext

type Big = FBig<HalfEven>;

/// Binary floating point number with a run-time mantissa width.
///
/// Binary operations round to the wider of the two operand precisions.
/// Integer constants (`zero`, `one`) are exact and adopt the precision of
/// whatever they are combined with.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Ext(Big);

impl Ext {
    pub fn from_f64(x: f64, prec: Precision) -> Self {
        let v =
            Big::try_from(x).unwrap_or_else(|_| panic!("non-finite value {x} cannot be widened"));
        Ext(v.with_precision(prec.bits()).value())
    }

    pub fn from_i64(n: i64, prec: Precision) -> Self {
        Ext(Big::from(n).with_precision(prec.bits()).value())
    }

    /// Mantissa width in bits; 0 for exact integer constants.
    pub fn bits(&self) -> usize {
        self.0.precision()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    /// Rounds to `prec`.
    pub fn with_precision(&self, prec: Precision) -> Self {
        Ext(self.0.clone().with_precision(prec.bits()).value())
    }

    fn ensure_precision(self, other_bits: usize) -> Big {
        if self.0.precision() == 0 && other_bits == 0 {
            self.0.with_precision(Precision::Double.bits()).value()
        } else {
            self.0
        }
    }
}

impl fmt::Debug for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Real::to_decimal(self, Some(20)))
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        f.write_str(&Real::to_decimal(self, Some(digits)))
    }
}

macro_rules! ext_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Ext {
            type Output = Ext;
            fn $method(self, rhs: Ext) -> Ext {
                Ext(self.0 $op rhs.0)
            }
        }
        impl<'a> $trait<&'a Ext> for &'a Ext {
            type Output = Ext;
            fn $method(self, rhs: &'a Ext) -> Ext {
                Ext(&self.0 $op &rhs.0)
            }
        }
    };
}

ext_binop!(Add, add, +);
ext_binop!(Sub, sub, -);
ext_binop!(Mul, mul, *);

impl Div for Ext {
    type Output = Ext;
    fn div(self, rhs: Ext) -> Ext {
        assert!(rhs.0 != Big::ZERO, "extended-precision division by zero");
        let rb = rhs.0.precision();
        let lhs = self.ensure_precision(rb);
        Ext(lhs / rhs.0)
    }
}

impl<'a> Div<&'a Ext> for &'a Ext {
    type Output = Ext;
    fn div(self, rhs: &'a Ext) -> Ext {
        self.clone() / rhs.clone()
    }
}

impl Rem for Ext {
    type Output = Ext;
    fn rem(self, rhs: Ext) -> Ext {
        let q = (self.clone() / rhs.clone()).0.trunc();
        self - Ext(q) * rhs
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext(-self.0)
    }
}

impl Zero for Ext {
    fn zero() -> Self {
        Ext(Big::ZERO)
    }
    fn is_zero(&self) -> bool {
        self.0 == Big::ZERO
    }
}

impl One for Ext {
    fn one() -> Self {
        Ext(Big::ONE)
    }
}

impl Num for Ext {
    type FromStrRadixErr = &'static str;
    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err("only radix 10 is supported");
        }
        Real::parse_decimal(s, Precision::Double).ok_or("invalid decimal literal")
    }
}

impl Scalar for Ext {
    type Real = Ext;
    const COMPLEX: bool = false;
    fn from_real(r: Ext) -> Self {
        r
    }
    fn from_parts(re: Ext, _im: Ext) -> Self {
        re
    }
    fn from_f64(x: f64, prec: Precision) -> Self {
        Ext::from_f64(x, prec)
    }
    fn from_ratio(num: i64, den: i64, prec: Precision) -> Self {
        Ext::from_i64(num, prec) / Ext::from_i64(den, prec)
    }
    fn re(&self) -> Ext {
        self.clone()
    }
    fn im(&self) -> Ext {
        Zero::zero()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn abs(&self) -> Ext {
        if self.0 < Big::ZERO {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn abs_sqr(&self) -> Ext {
        self * self
    }
    fn scale(&self, r: &Ext) -> Self {
        self * r
    }
    fn is_finite(&self) -> bool {
        self.0.repr().is_finite()
    }
    fn supports(_prec: Precision) -> bool {
        true
    }
}

impl Real for Ext {
    fn to_f64(&self) -> f64 {
        Ext::to_f64(self)
    }
    fn sqrt(&self) -> Self {
        assert!(
            self.0 >= Big::ZERO,
            "square root of a negative extended value"
        );
        if Zero::is_zero(self) {
            return self.clone();
        }
        let x = self.clone().ensure_precision(0);
        Ext(x.sqrt())
    }
    fn ln(&self) -> Self {
        let x = self.clone().ensure_precision(0);
        Ext(x.ln())
    }
    fn epsilon(prec: Precision) -> Self {
        let bits = prec.bits() as isize;
        Ext(Big::from_parts(1.into(), 1 - bits)
            .with_precision(prec.bits())
            .value())
    }
    fn parse_decimal(s: &str, prec: Precision) -> Option<Self> {
        let d: DBig = s.trim().parse().ok()?;
        let b = d.with_base_and_precision::<2>(prec.bits()).value();
        Some(Ext(b.with_rounding::<HalfEven>()))
    }
    fn to_decimal(&self, sig_digits: Option<usize>) -> String {
        if Zero::is_zero(self) {
            return "0".to_string();
        }
        let bits = self.0.precision().max(53);
        let full = (bits as f64 / std::f64::consts::LOG2_10).ceil() as usize + 2;
        let digits = sig_digits.unwrap_or(full).max(1);
        let d = self
            .0
            .clone()
            .with_base_and_precision::<10>(digits.max(full))
            .value()
            .with_precision(digits)
            .value();
        format!("{d:e}")
    }
    fn to_ext(&self, prec: Precision) -> Ext {
        self.with_precision(prec)
    }
    fn from_ext(x: &Ext, prec: Precision) -> Self {
        x.with_precision(prec)
    }
}

/// Total order helper for reals that are known not to be NaN.
pub(crate) fn cmp_real<R: Real>(a: &R, b: &R) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P50: Precision = Precision::Extended { digits: 50 };

    #[test]
    fn extended_carries_requested_digits() {
        let third = Ext::from_ratio(1, 3, P50);
        let back = third.clone() * Ext::from_i64(3, P50);
        let err = (back - Ext::one()).abs();
        assert!(err < Ext::from_f64(1e-49, P50));
        let two = Ext::from_i64(2, P50);
        let r = Real::sqrt(&two);
        let err = (r.clone() * r - two).abs();
        assert!(err < Ext::from_f64(1e-49, P50));
    }

    #[test]
    fn conjugation() {
        let z = Complex64::new(0.0, 1.0);
        assert_eq!(Scalar::conj(&z), Complex64::new(0.0, -1.0));
        assert_eq!(Scalar::conj(&3.5f64), 3.5);
        let e = Ext::from_f64(-2.5, P50);
        assert_eq!(Scalar::conj(&e), e);
    }

    #[test]
    fn decimal_round_trip() {
        let x = Ext::from_ratio(2, 7, P50);
        let s = Real::to_decimal(&x, None);
        let y = <Ext as Real>::parse_decimal(&s, P50).unwrap();
        assert!((x - y).abs() < Ext::from_f64(1e-50, P50));
        let f = 0.1f64 + 0.2;
        assert_eq!(
            <f64 as Real>::parse_decimal(&Real::to_decimal(&f, None), Precision::Double),
            Some(f)
        );
    }

    #[test]
    fn complex_modulus_avoids_overflow() {
        let z = Complex64::new(3e200, 4e200);
        assert!((Scalar::abs(&z) / 5e200 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn epsilon_scales_with_digits() {
        let e = Ext::epsilon(Precision::extended(150)).to_f64();
        assert!(e < 1e-150 && e > 1e-153);
    }
}
