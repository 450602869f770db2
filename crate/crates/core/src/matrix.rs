//! Dense matrices over a [`Scalar`] field.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Precision, Real, Scalar};

/// Matrix norm selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    /// Maximum absolute column sum.
    One,
    /// Maximum absolute row sum.
    Infinity,
    Frobenius,
    /// Power-iteration estimate of the largest singular value.
    SpectralEstimate,
}

impl std::str::FromStr for NormKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "one" | "1" => Ok(NormKind::One),
            "inf" | "infinity" => Ok(NormKind::Infinity),
            "fro" | "frobenius" => Ok(NormKind::Frobenius),
            "spectral" | "2" | "spectral-estimate" => Ok(NormKind::SpectralEstimate),
            other => Err(Error::InvalidInput(format!("unknown norm `{other}`"))),
        }
    }
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::One => "one",
            NormKind::Infinity => "infinity",
            NormKind::Frobenius => "frobenius",
            NormKind::SpectralEstimate => "spectral",
        })
    }
}

/// Relative tolerance and sweep budget used by [`NormKind::SpectralEstimate`].
pub const SPECTRAL_TOL: f64 = 1e-8;
pub const SPECTRAL_MAX_SWEEPS: usize = 500;

/// Row-major dense matrix. Every entry shares the matrix's [`Precision`].
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
    precision: Precision,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>, precision: Precision) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if !T::supports(precision) {
            return Err(Error::InvalidInput(format!(
                "scalar type cannot carry {precision} precision"
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            precision,
        })
    }

    pub fn zeros(rows: usize, cols: usize, precision: Precision) -> Self {
        Self::from_fn(rows, cols, precision, |_, _| T::zero())
    }

    pub fn identity(n: usize, precision: Precision) -> Self {
        Self::from_fn(
            n,
            n,
            precision,
            |i, j| if i == j { T::one() } else { T::zero() },
        )
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        precision: Precision,
        mut f: impl FnMut(usize, usize) -> T,
    ) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            data,
            precision,
        }
    }

    /// Builds a matrix from nested rows of doubles, widened to `precision`.
    pub fn from_f64_rows(rows: &[Vec<f64>], precision: Precision) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        let data = rows
            .iter()
            .flatten()
            .map(|&x| T::from_f64(x, precision))
            .collect();
        Self::new(r, c, data, precision)
    }

    pub fn diag(entries: &[T], precision: Precision) -> Self {
        let n = entries.len();
        Self::from_fn(n, n, precision, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                T::zero()
            }
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Scalar>(&self, precision: Precision, f: impl Fn(&T) -> U) -> DenseMatrix<U> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
            precision,
        }
    }

    /// Re-expresses the matrix in another scalar type (widening or rounding).
    pub fn convert<U: Scalar>(&self, precision: Precision) -> DenseMatrix<U> {
        let wide = if self.precision.is_extended() {
            self.precision
        } else {
            precision
        };
        self.map(precision, |x| U::from_wide(&x.to_wide(wide), precision))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(Scalar::is_finite)
    }

    fn check_config(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.precision != other.precision {
            return Err(Error::Config {
                op,
                left: self.precision,
                right: other.precision,
            });
        }
        Ok(())
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        self.check_config(other, op)?;
        if self.shape() != other.shape() {
            return Err(Error::Shape {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }

    fn require_square(&self, op: &'static str) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Shape {
                op,
                left: self.shape(),
                right: self.shape(),
            });
        }
        Ok(())
    }

    /// Matrix product. Each output entry is accumulated in ascending inner
    /// index order, so results do not depend on the thread count.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_config(other, "matmul")?;
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![T::zero(); m * n];
        let row_kernel = |i: usize, out_row: &mut [T]| {
            let a_row = &self.data[i * k..(i + 1) * k];
            for (p, a) in a_row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let b_row = &other.data[p * n..(p + 1) * n];
                for (c, b) in out_row.iter_mut().zip(b_row) {
                    *c = c.clone() + a.clone() * b.clone();
                }
            }
        };
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            if m * k * n >= 1 << 18 {
                out.par_chunks_mut(n)
                    .enumerate()
                    .for_each(|(i, row)| row_kernel(i, row));
            } else {
                out.chunks_mut(n)
                    .enumerate()
                    .for_each(|(i, row)| row_kernel(i, row));
            }
        }
        #[cfg(not(feature = "parallel"))]
        out.chunks_mut(n)
            .enumerate()
            .for_each(|(i, row)| row_kernel(i, row));
        Ok(Self {
            rows: m,
            cols: n,
            data: out,
            precision: self.precision,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        Ok(self.zip_with(other, |a, b| a.clone() - b.clone()))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
            precision: self.precision,
        }
    }

    /// `self + c·other`.
    pub fn add_scaled(&self, c: &T::Real, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add_scaled")?;
        Ok(self.zip_with(other, |a, b| a.clone() + b.scale(c)))
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(self.precision, |x| x.clone() * c.clone())
    }

    pub fn scale_real(&self, c: &T::Real) -> Self {
        self.map(self.precision, |x| x.scale(c))
    }

    /// `self + c·I` for square `self`.
    pub fn add_identity(&self, c: &T) -> Result<Self> {
        self.require_square("add_identity")?;
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] = out[(i, i)].clone() + c.clone();
        }
        Ok(out)
    }

    /// `c·I − self` for square `self`.
    pub fn identity_minus(&self, c: &T) -> Result<Self> {
        self.require_square("identity_minus")?;
        let mut out = self.map(self.precision, |x| -x.clone());
        for i in 0..self.rows {
            out[(i, i)] = out[(i, i)].clone() + c.clone();
        }
        Ok(out)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.precision, |i, j| {
            self[(j, i)].clone()
        })
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.precision, |i, j| {
            self[(j, i)].conj()
        })
    }

    pub fn trace(&self) -> Result<T> {
        self.require_square("trace")?;
        Ok((0..self.rows).fold(T::zero(), |acc, i| acc + self[(i, i)].clone()))
    }

    /// `k`-fold product; `k = 0` yields the identity.
    pub fn mat_pow(&self, k: u32) -> Result<Self> {
        self.require_square("mat_pow")?;
        if k == 0 {
            return Ok(Self::identity(self.rows, self.precision));
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.matmul(self)?;
        }
        Ok(acc)
    }

    pub fn norm(&self, kind: NormKind) -> Result<T::Real> {
        match kind {
            NormKind::One => Ok(self.norm_one()),
            NormKind::Infinity => Ok(self.norm_inf()),
            NormKind::Frobenius => Ok(self.norm_fro()),
            NormKind::SpectralEstimate => self.spectral_estimate(SPECTRAL_TOL, SPECTRAL_MAX_SWEEPS),
        }
    }

    pub fn norm_one(&self) -> T::Real {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::Real::zero(), |acc, i| acc + self[(i, j)].abs()))
            .fold(T::Real::zero(), Real::max_of)
    }

    pub fn norm_inf(&self) -> T::Real {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().fold(T::Real::zero(), |acc, x| acc + x.abs()))
            .fold(T::Real::zero(), Real::max_of)
    }

    pub fn norm_fro(&self) -> T::Real {
        self.data
            .iter()
            .fold(T::Real::zero(), |acc, x| acc + x.abs_sqr())
            .sqrt()
    }

    /// Largest singular value by power iteration on `A*A`.
    ///
    /// Stops once the Rayleigh quotient changes by less than `rel_tol`
    /// relative to its value. The estimate approaches `‖A‖₂` from below.
    /// The zero matrix has norm zero.
    pub fn spectral_estimate(&self, rel_tol: f64, max_sweeps: usize) -> Result<T::Real> {
        let n = self.cols;
        let prec = self.precision;
        // Start from the column norms so that the vector is not orthogonal to
        // the dominant right singular vector in typical inputs.
        let mut v: Vec<T> = (0..n)
            .map(|j| {
                let s = (0..self.rows).fold(T::Real::zero(), |acc, i| acc + self[(i, j)].abs_sqr());
                T::from_real(s.sqrt() + T::Real::from_ratio(j as i64 + 1, 7 * n as i64, prec))
            })
            .collect();
        if self.data.iter().all(Zero::is_zero) {
            return Ok(T::Real::zero());
        }
        normalize(&mut v);
        let tol = T::Real::from_f64(rel_tol, prec);
        let mut lambda = T::Real::zero();
        for sweep in 0..max_sweeps {
            let w = self.apply(&v);
            let u = self.apply_adjoint(&w);
            let next = vec_norm_sqr(&w);
            let unorm = vec_norm_sqr(&u).sqrt();
            if Zero::is_zero(&unorm) {
                // v fell into the null space; restart on a unit vector.
                v = (0..n)
                    .map(|j| if j == sweep % n { T::one() } else { T::zero() })
                    .collect();
                continue;
            }
            let converged =
                sweep > 0 && (next.clone() - lambda.clone()).abs() <= tol.clone() * next.clone();
            lambda = next;
            v = u
                .into_iter()
                .map(|x| x / T::from_real(unorm.clone()))
                .collect();
            if converged {
                return Ok(lambda.sqrt());
            }
        }
        Err(Error::SpectralNoConvergence {
            sweeps: max_sweeps,
            estimate: lambda.sqrt().to_f64(),
        })
    }

    /// `A·v`.
    pub fn apply(&self, v: &[T]) -> Vec<T> {
        self.data
            .chunks(self.cols)
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, x)| acc + a.clone() * x.clone())
            })
            .collect()
    }

    /// `A*·w`.
    pub fn apply_adjoint(&self, w: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.cols];
        for (row, wi) in self.data.chunks(self.cols).zip(w) {
            for (o, a) in out.iter_mut().zip(row) {
                *o = o.clone() + a.conj() * wi.clone();
            }
        }
        out
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T::Real> {
        self.check_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.clone() - b.clone()).abs())
            .fold(T::Real::zero(), Real::max_of))
    }
}

fn vec_norm_sqr<T: Scalar>(v: &[T]) -> T::Real {
    v.iter().fold(T::Real::zero(), |acc, x| acc + x.abs_sqr())
}

fn normalize<T: Scalar>(v: &mut [T]) {
    let n = vec_norm_sqr(v).sqrt();
    if !Zero::is_zero(&n) {
        for x in v.iter_mut() {
            *x = x.clone() / T::from_real(n.clone());
        }
    }
}

/// Hilbert matrix with entries `1/(i+j−1)` (1-based indices).
pub fn hilbert<T: Scalar>(m: usize, n: usize, precision: Precision) -> DenseMatrix<T> {
    DenseMatrix::from_fn(m, n, precision, |i, j| {
        T::from_ratio(1, (i + j + 1) as i64, precision)
    })
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i},{j}) out of bounds"
        );
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "DenseMatrix {}x{} ({})",
            self.rows, self.cols, self.precision
        )?;
        for row in self.data.chunks(self.cols) {
            writeln!(f, "  {row:?}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Ext;
    use num_complex::Complex64;

    const D: Precision = Precision::Double;

    fn m(rows: &[Vec<f64>]) -> DenseMatrix<f64> {
        DenseMatrix::from_f64_rows(rows, D).unwrap()
    }

    #[test]
    fn matmul_small_cases() {
        let a = m(&[vec![1., 2.], vec![3., 4.]]);
        let b = m(&[vec![5., 6.], vec![7., 8.]]);
        assert_eq!(a.matmul(&b).unwrap(), m(&[vec![19., 22.], vec![43., 50.]]));

        let x = m(&[
            vec![0.3, -1.0, 2.0],
            vec![4.0, 0.5, 0.25],
            vec![-7.0, 1.5, 9.0],
        ]);
        assert_eq!(DenseMatrix::identity(3, D).matmul(&x).unwrap(), x);
    }

    #[test]
    fn hilbert_gram_entry() {
        let h = hilbert::<f64>(3, 2, D);
        let g = h.transpose().matmul(&h).unwrap();
        assert!((g[(0, 0)] - (1.0 + 0.25 + 1.0 / 9.0)).abs() < 1e-15);
        assert_eq!(g[(0, 1)], g[(1, 0)]);
    }

    #[test]
    fn matmul_errors() {
        let a = m(&[vec![1., 2.]]);
        assert!(matches!(a.matmul(&a), Err(Error::Shape { .. })));
        let e = DenseMatrix::<Ext>::identity(1, Precision::extended(30));
        let d = DenseMatrix::<Ext>::identity(1, D);
        assert!(matches!(e.matmul(&d), Err(Error::Config { .. })));
    }

    #[test]
    fn conj_transpose_cases() {
        let a = m(&[vec![1., 2.], vec![3., 4.]]);
        assert_eq!(a.conj_transpose(), m(&[vec![1., 3.], vec![2., 4.]]));
        let z = DenseMatrix::new(1, 1, vec![Complex64::new(0., 1.)], D).unwrap();
        assert_eq!(z.conj_transpose()[(0, 0)], Complex64::new(0., -1.));
        assert_eq!(a.conj_transpose().conj_transpose(), a);
    }

    #[test]
    fn norms() {
        let i4 = DenseMatrix::<f64>::identity(4, D);
        assert_eq!(i4.norm(NormKind::Frobenius).unwrap(), 2.0);
        let a = m(&[vec![1., -2.], vec![3., 4.]]);
        assert_eq!(a.norm(NormKind::Infinity).unwrap(), 7.0);
        assert_eq!(a.norm(NormKind::One).unwrap(), 6.0);
        let d = DenseMatrix::diag(&[3.0, 1.0], D);
        assert!((d.norm(NormKind::SpectralEstimate).unwrap() - 3.0).abs() < 1e-7);
        let z = DenseMatrix::<f64>::zeros(2, 3, D);
        assert_eq!(z.norm(NormKind::SpectralEstimate).unwrap(), 0.0);
    }

    #[test]
    fn spectral_budget_exhaustion_reports_estimate() {
        // Two nearly tied singular values converge slowly.
        let d = DenseMatrix::diag(&[1.0, 0.999_999], D);
        match d.spectral_estimate(1e-15, 3) {
            Err(Error::SpectralNoConvergence { sweeps, estimate }) => {
                assert_eq!(sweeps, 3);
                assert!(estimate > 0.99);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn powers_and_trace() {
        let a = m(&[vec![0.5, 1.0], vec![-2.0, 3.0]]);
        assert_eq!(a.mat_pow(0).unwrap(), DenseMatrix::identity(2, D));
        assert_eq!(a.mat_pow(1).unwrap(), a);
        let d = DenseMatrix::diag(&[2.0, 3.0], D);
        assert_eq!(d.mat_pow(3).unwrap(), DenseMatrix::diag(&[8.0, 27.0], D));
        assert!(m(&[vec![1., 2.]]).mat_pow(2).is_err());

        assert_eq!(DenseMatrix::<f64>::identity(6, D).trace().unwrap(), 6.0);
        assert_eq!(DenseMatrix::diag(&[1.0, -1.0], D).trace().unwrap(), 0.0);
        assert!(m(&[vec![1., 2.]]).trace().is_err());
    }

    #[test]
    fn hilbert_entries() {
        assert_eq!(hilbert::<f64>(1, 1, D), m(&[vec![1.0]]));
        assert_eq!(
            hilbert::<f64>(2, 2, D),
            m(&[vec![1.0, 0.5], vec![0.5, 1.0 / 3.0]])
        );
        assert_eq!(hilbert::<f64>(3, 2, D)[(2, 1)], 0.25);
    }

    #[test]
    fn extended_hilbert_is_exact_to_working_precision() {
        let p = Precision::extended(60);
        let h = hilbert::<Ext>(2, 2, p);
        let third = h[(1, 1)].clone() * Ext::from_i64(3, p);
        assert!((third - Ext::from_i64(1, p)).abs() < Ext::from_f64(1e-59, p));
    }

    #[test]
    fn convert_round_trip() {
        let a = m(&[vec![0.1, -2.5], vec![1e-300, 7.0]]);
        let wide: DenseMatrix<Ext> = a.convert(Precision::extended(40));
        let back: DenseMatrix<f64> = wide.convert(D);
        assert_eq!(back, a);
    }
}
