//! Starting matrices `X₀ = αG` and Drazin index detection.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use log::debug;
use num_complex::Complex;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::decomp::{rank, singular_values};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{Ext, Precision, Real, Scalar};

/// How the Pan–Schreiber scale is formed from the nonzero eigenvalues
/// `λ₁ ≥ … ≥ λ_r` of `GA`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PanSchreiberConvention {
    /// `α = 2 / (λ₁ + λ_r)`. For `G = A*` this is `2 / (σ₁² + σ_r²)` with
    /// `σ` the singular values of `A`, which makes the spectrum of `AX₀`
    /// symmetric about 1.
    #[default]
    Classical,
    /// `α = 2 / (λ₁² + λ_r²)`.
    Literal,
}

/// A starting recipe. `G` is optional where a default exists.
#[derive(Clone, Debug)]
pub enum InitStrategy<T: Scalar> {
    ScaledAdjoint,
    PanSchreiber {
        g: Option<DenseMatrix<T>>,
        convention: PanSchreiberConvention,
    },
    DrazinTrace,
    Diagonal,
    Explicit {
        g: DenseMatrix<T>,
        alpha: T,
    },
}

impl<T: Scalar> InitStrategy<T> {
    pub fn pan_schreiber() -> Self {
        InitStrategy::PanSchreiber {
            g: None,
            convention: PanSchreiberConvention::Classical,
        }
    }

    pub fn apply(&self, a: &DenseMatrix<T>) -> Result<InitResult<T>> {
        match self {
            InitStrategy::ScaledAdjoint => init_scaled_adjoint(a),
            InitStrategy::PanSchreiber { g, convention } => {
                init_pan_schreiber(a, g.as_ref(), *convention)
            }
            InitStrategy::DrazinTrace => init_drazin(a),
            InitStrategy::Diagonal => init_diagonal(a),
            InitStrategy::Explicit { g, alpha } => init_explicit(g, alpha.clone()),
        }
    }
}

/// Strategy names as accepted on the command line:
/// `adjoint`, `pan-schreiber`, `drazin`, `diagonal`, `explicit:<file>:<alpha>`.
#[derive(Clone, Debug, PartialEq)]
pub enum StrategySpec {
    Adjoint,
    PanSchreiber,
    Drazin,
    Diagonal,
    Explicit { path: PathBuf, alpha: f64 },
}

impl FromStr for StrategySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "adjoint" => Ok(StrategySpec::Adjoint),
            "pan-schreiber" | "pan_schreiber" => Ok(StrategySpec::PanSchreiber),
            "drazin" => Ok(StrategySpec::Drazin),
            "diagonal" => Ok(StrategySpec::Diagonal),
            other => {
                let rest = other
                    .strip_prefix("explicit:")
                    .ok_or_else(|| Error::InvalidInput(format!("unknown init strategy `{s}`")))?;
                let (path, alpha) = rest.rsplit_once(':').ok_or_else(|| {
                    Error::InvalidInput("expected explicit:<file>:<alpha>".into())
                })?;
                let alpha: f64 = alpha
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("bad alpha `{alpha}`")))?;
                if path.is_empty() || !(alpha.is_finite() && alpha > 0.0) {
                    return Err(Error::InvalidInput(format!("bad explicit strategy `{s}`")));
                }
                Ok(StrategySpec::Explicit {
                    path: path.into(),
                    alpha,
                })
            }
        }
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Adjoint => f.write_str("adjoint"),
            StrategySpec::PanSchreiber => f.write_str("pan-schreiber"),
            StrategySpec::Drazin => f.write_str("drazin"),
            StrategySpec::Diagonal => f.write_str("diagonal"),
            StrategySpec::Explicit { path, alpha } => {
                write!(f, "explicit:{}:{alpha:?}", path.display())
            }
        }
    }
}

impl Serialize for StrategySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StrategySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug)]
pub struct InitResult<T: Scalar> {
    pub x0: DenseMatrix<T>,
    pub alpha: T,
    pub g: DenseMatrix<T>,
    /// Set by the Drazin strategy.
    pub index: Option<IndexResult>,
}

impl<T: Scalar> InitResult<T> {
    /// `|α|`, the scale used by the reliable stopping rule.
    pub fn alpha_abs(&self) -> T::Real {
        self.alpha.abs()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexResult {
    pub index: usize,
    /// `rank(A⁰), rank(A¹), …, rank(A^{l+1})`.
    pub rank_sequence: Vec<usize>,
}

/// `X₀ = A* / (‖A‖₁ ‖A‖∞)`.
pub fn init_scaled_adjoint<T: Scalar>(a: &DenseMatrix<T>) -> Result<InitResult<T>> {
    let denom = a.norm_one() * a.norm_inf();
    if denom.is_zero() {
        return Err(Error::Degenerate(
            "zero matrix has no scaled adjoint start".into(),
        ));
    }
    let alpha = T::Real::one() / denom;
    let g = a.conj_transpose();
    Ok(InitResult {
        x0: g.scale_real(&alpha),
        alpha: T::from_real(alpha),
        g,
        index: None,
    })
}

/// `X₀ = αG` with `α` from the extreme nonzero eigenvalues of `GA`.
///
/// `G` defaults to `A*`. A custom `G` must make `GA` Hermitian so that its
/// eigenvalue moduli are its singular values.
pub fn init_pan_schreiber<T: Scalar>(
    a: &DenseMatrix<T>,
    g: Option<&DenseMatrix<T>>,
    convention: PanSchreiberConvention,
) -> Result<InitResult<T>> {
    let prec = a.precision();
    let (g, lambdas) = match g {
        None => {
            let lambdas = singular_values(a)?
                .into_iter()
                .map(|s| s.clone() * s)
                .collect::<Vec<_>>();
            (a.conj_transpose(), lambdas)
        }
        Some(g) => {
            let ga = g.matmul(a)?;
            let asym = ga.conj_transpose().sub(&ga)?.norm_fro();
            let tol = T::Real::from_ratio(64 * ga.rows() as i64, 1, prec) * T::Real::epsilon(prec);
            if asym > tol * ga.norm_fro() {
                return Err(Error::InvalidInput(
                    "Pan–Schreiber start needs G·A Hermitian; supply α explicitly instead".into(),
                ));
            }
            (g.clone(), singular_values(&ga)?)
        }
    };
    let lambda_max = lambdas.first().cloned().unwrap_or_else(T::Real::zero);
    if lambda_max.is_zero() {
        return Err(Error::Degenerate("G·A has no nonzero eigenvalue".into()));
    }
    let dim = a.rows().max(a.cols()) as i64;
    let cutoff = T::Real::from_ratio(dim, 1, prec) * T::Real::epsilon(prec) * lambda_max.clone();
    let lambda_min = lambdas
        .iter()
        .rev()
        .find(|l| **l > cutoff)
        .cloned()
        .unwrap_or_else(|| lambda_max.clone());
    let two = T::Real::from_ratio(2, 1, prec);
    let alpha = match convention {
        PanSchreiberConvention::Classical => two / (lambda_max + lambda_min),
        PanSchreiberConvention::Literal => {
            two / (lambda_max.clone() * lambda_max + lambda_min.clone() * lambda_min)
        }
    };
    Ok(InitResult {
        x0: g.scale_real(&alpha),
        alpha: T::from_real(alpha),
        g,
        index: None,
    })
}

/// Smallest `l` with `rank(A^{l+1}) = rank(A^l)`.
///
/// Each power is ranked with `tol`, or with the default cutoff relative to
/// that power's own largest singular value.
pub fn matrix_index<T: Scalar>(a: &DenseMatrix<T>, tol: Option<T::Real>) -> Result<IndexResult> {
    if !a.is_square() {
        return Err(Error::Shape {
            op: "matrix_index",
            left: a.shape(),
            right: a.shape(),
        });
    }
    let n = a.rows();
    let mut ranks = vec![n];
    let mut power = a.clone();
    for l in 0..=n {
        let r = rank(&power, tol.clone())?;
        ranks.push(r);
        if r == ranks[l] {
            return Ok(IndexResult {
                index: l,
                rank_sequence: ranks,
            });
        }
        if r > ranks[l] {
            break;
        }
        power = power.matmul(a)?;
    }
    Err(Error::IndexSearchExhausted { order: n })
}

const DRAZIN_TRACE_RATIO: f64 = 1e-12;
const DRAZIN_WIDE_DIGITS: u32 = 60;

/// `X₀ = A^l / tr(A^{l+1})` with `l` the index of `A`.
pub fn init_drazin<T: Scalar>(a: &DenseMatrix<T>) -> Result<InitResult<T>> {
    let idx = matrix_index(a, None)?;
    let l = idx.index as u32;
    let prec = a.precision();
    let al = a.mat_pow(l)?;
    let al1 = al.matmul(a)?;
    let mut tr = al1.trace()?;
    let size = al1.norm_fro();
    let small = |t: &T::Real, s: &T::Real, ratio: &T::Real| *t <= ratio.clone() * s.clone();
    if prec.is_extended() {
        let ratio = T::Real::from_ratio(64 * a.rows() as i64, 1, prec) * T::Real::epsilon(prec);
        if small(&tr.abs(), &size, &ratio) {
            return Err(vanishing_trace(l));
        }
    } else if small(
        &tr.abs(),
        &size,
        &T::Real::from_f64(DRAZIN_TRACE_RATIO, prec),
    ) {
        let wide = Precision::extended(DRAZIN_WIDE_DIGITS);
        debug!(
            "tr(A^{}) is tiny at double precision; recomputing at {wide}",
            l + 1
        );
        let aw = a.convert::<Complex<Ext>>(wide);
        let wide_tr = aw.mat_pow(l + 1)?.trace()?;
        let wide_size = aw.mat_pow(l + 1)?.norm_fro();
        let ratio = Ext::from_f64(1e-40, wide);
        if Scalar::abs(&wide_tr) <= ratio * wide_size {
            return Err(vanishing_trace(l));
        }
        tr = T::from_wide(&wide_tr, prec);
    }
    let alpha = T::one() / tr;
    Ok(InitResult {
        x0: al.scale(&alpha),
        alpha,
        g: al,
        index: Some(idx),
    })
}

fn vanishing_trace(l: u32) -> Error {
    Error::Degenerate(format!(
        "tr(A^{}) vanishes; use an explicit G with a suitable α",
        l + 1
    ))
}

/// `X₀ = diag(1/a₁₁, …, 1/a_nn)`, with `α = 1` and `G = X₀`.
pub fn init_diagonal<T: Scalar>(a: &DenseMatrix<T>) -> Result<InitResult<T>> {
    if !a.is_square() {
        return Err(Error::Shape {
            op: "init_diagonal",
            left: a.shape(),
            right: a.shape(),
        });
    }
    let mut inv = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let d = &a[(i, i)];
        if d.is_zero() {
            return Err(Error::Degenerate(format!(
                "diagonal entry {} is zero",
                i + 1
            )));
        }
        inv.push(T::one() / d.clone());
    }
    let x0 = DenseMatrix::diag(&inv, a.precision());
    Ok(InitResult {
        g: x0.clone(),
        x0,
        alpha: T::one(),
        index: None,
    })
}

/// `X₀ = αG` as given.
pub fn init_explicit<T: Scalar>(g: &DenseMatrix<T>, alpha: T) -> Result<InitResult<T>> {
    if alpha.is_zero() || !alpha.is_finite() {
        return Err(Error::InvalidInput(
            "explicit α must be finite and nonzero".into(),
        ));
    }
    Ok(InitResult {
        x0: g.scale(&alpha),
        alpha,
        g: g.clone(),
        index: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::hilbert;
    use num_complex::Complex64;

    const D: Precision = Precision::Double;

    #[test]
    fn scaled_adjoint_examples() {
        let r = init_scaled_adjoint(&DenseMatrix::<f64>::diag(&[2.0], D)).unwrap();
        assert_eq!(r.alpha, 0.25);
        assert_eq!(r.x0[(0, 0)], 0.5);
        let r = init_scaled_adjoint(&hilbert::<f64>(3, 2, D)).unwrap();
        assert!((r.alpha - 4.0 / 11.0).abs() < 1e-15);
        assert!(init_scaled_adjoint(&DenseMatrix::<f64>::zeros(2, 2, D)).is_err());
    }

    #[test]
    fn pan_schreiber_diag() {
        let a = DenseMatrix::<f64>::diag(&[2.0, 1.0], D);
        let lit = init_pan_schreiber(&a, None, PanSchreiberConvention::Literal).unwrap();
        assert!((lit.alpha - 2.0 / 17.0).abs() < 1e-15);
        let cls = init_pan_schreiber(&a, None, PanSchreiberConvention::Classical).unwrap();
        assert!((cls.alpha - 2.0 / 5.0).abs() < 1e-15);
        let g = a.transpose();
        let custom = init_pan_schreiber(&a, Some(&g), PanSchreiberConvention::Literal).unwrap();
        assert!((custom.alpha - 2.0 / 17.0).abs() < 1e-14);
    }

    #[test]
    fn pan_schreiber_scaled_identity_is_exact() {
        let c = 3.0;
        let a = DenseMatrix::<f64>::identity(3, D).scale(&c);
        let r = init_pan_schreiber(&a, None, PanSchreiberConvention::Classical).unwrap();
        let res = crate::driver::residual(&a, &r.x0).unwrap();
        assert!(res.norm_fro() < 1e-15);
    }

    #[test]
    fn pan_schreiber_rejects_non_hermitian_ga() {
        let a = DenseMatrix::<f64>::from_f64_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]], D).unwrap();
        let g = DenseMatrix::identity(2, D);
        assert!(init_pan_schreiber(&a, Some(&g), PanSchreiberConvention::Classical).is_err());
    }

    #[test]
    fn index_examples() {
        let a = DenseMatrix::<f64>::from_f64_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]], D).unwrap();
        assert_eq!(matrix_index(&a, None).unwrap().index, 0);
        let j2 = DenseMatrix::<f64>::from_f64_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]], D).unwrap();
        let r = matrix_index(&j2, None).unwrap();
        assert_eq!(r.index, 2);
        assert_eq!(r.rank_sequence, vec![2, 1, 0, 0]);
    }

    #[test]
    fn drazin_examples() {
        let a = DenseMatrix::<f64>::from_f64_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]], D).unwrap();
        let r = init_drazin(&a).unwrap();
        assert_eq!(r.index.as_ref().unwrap().index, 0);
        assert!((r.x0[(0, 0)] - 0.25).abs() < 1e-15);
        let b = DenseMatrix::<f64>::diag(&[2.0, 0.0], D);
        let r = init_drazin(&b).unwrap();
        assert_eq!(r.alpha, 0.25);
        assert_eq!(r.x0[(0, 0)], 0.5);
        assert_eq!(r.x0[(1, 1)], 0.0);
    }

    #[test]
    fn drazin_vanishing_trace() {
        let a = DenseMatrix::<f64>::diag(&[1.0, -1.0], D);
        assert!(matches!(init_drazin(&a), Err(Error::Degenerate(_))));
    }

    #[test]
    fn drazin_complex() {
        let i = Complex64::new(0.0, 1.0);
        let a = DenseMatrix::diag(&[Complex64::new(0.0, 2.0), Complex64::zero()], D);
        let r = init_drazin(&a).unwrap();
        assert!((r.x0[(0, 0)] - (-0.5 * i)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_examples() {
        let r = init_diagonal(&DenseMatrix::<f64>::diag(&[2.0, 4.0], D)).unwrap();
        assert_eq!(r.x0[(1, 1)], 0.25);
        let err = init_diagonal(&DenseMatrix::<f64>::diag(&[2.0, 0.0], D)).unwrap_err();
        assert!(err.to_string().contains("entry 2"), "{err}");
    }

    #[test]
    fn strategy_names() {
        for s in [
            "adjoint",
            "pan-schreiber",
            "drazin",
            "diagonal",
            "explicit:g.mtx:0.25",
        ] {
            let spec: StrategySpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("explicit:g.mtx".parse::<StrategySpec>().is_err());
        assert!("explicit:g.mtx:-1".parse::<StrategySpec>().is_err());
        assert!("newton".parse::<StrategySpec>().is_err());
    }
}
