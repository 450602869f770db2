//! Residuals of the defining equations of the generalized inverses.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, NormKind};
use crate::scalar::{Real, Scalar};

/// Norms of the four Penrose residuals. Only `outer` is meaningful for a
/// general outer inverse; all four vanish for the Moore–Penrose inverse.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PenroseResiduals<R> {
    /// `‖XAX − X‖`
    pub outer: R,
    /// `‖AXA − A‖`
    pub inner: R,
    /// `‖(AX)* − AX‖`
    pub sym_ax: R,
    /// `‖(XA)* − XA‖`
    pub sym_xa: R,
}

impl<R: Real> PenroseResiduals<R> {
    pub fn max(&self) -> R {
        [&self.outer, &self.inner, &self.sym_ax, &self.sym_xa]
            .into_iter()
            .cloned()
            .fold(R::zero(), R::max_of)
    }

    pub fn to_f64(&self) -> PenroseResiduals<f64> {
        PenroseResiduals {
            outer: self.outer.to_f64(),
            inner: self.inner.to_f64(),
            sym_ax: self.sym_ax.to_f64(),
            sym_xa: self.sym_xa.to_f64(),
        }
    }
}

fn conformable<T: Scalar>(a: &DenseMatrix<T>, x: &DenseMatrix<T>, op: &'static str) -> Result<()> {
    if a.rows() != x.cols() || a.cols() != x.rows() {
        return Err(Error::Shape {
            op,
            left: a.shape(),
            right: x.shape(),
        });
    }
    Ok(())
}

pub fn outer_inverse_check<T: Scalar>(
    a: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
    norm: NormKind,
) -> Result<PenroseResiduals<T::Real>> {
    conformable(a, x, "outer_inverse_check")?;
    let ax = a.matmul(x)?;
    let xa = x.matmul(a)?;
    Ok(PenroseResiduals {
        outer: x.matmul(&ax)?.sub(x)?.norm(norm)?,
        inner: ax.matmul(a)?.sub(a)?.norm(norm)?,
        sym_ax: ax.conj_transpose().sub(&ax)?.norm(norm)?,
        sym_xa: xa.conj_transpose().sub(&xa)?.norm(norm)?,
    })
}

/// Norms of the Drazin residuals for index `l`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DrazinResiduals<R> {
    /// `‖XAX − X‖`
    pub outer: R,
    /// `‖AX − XA‖`
    pub commute: R,
    /// `‖A^{l+1}X − A^l‖`
    pub index: R,
}

impl<R: Real> DrazinResiduals<R> {
    pub fn max(&self) -> R {
        [&self.outer, &self.commute, &self.index]
            .into_iter()
            .cloned()
            .fold(R::zero(), R::max_of)
    }
}

pub fn drazin_check<T: Scalar>(
    a: &DenseMatrix<T>,
    x: &DenseMatrix<T>,
    l: u32,
    norm: NormKind,
) -> Result<DrazinResiduals<T::Real>> {
    conformable(a, x, "drazin_check")?;
    let ax = a.matmul(x)?;
    let xa = x.matmul(a)?;
    let al = a.mat_pow(l)?;
    Ok(DrazinResiduals {
        outer: x.matmul(&ax)?.sub(x)?.norm(norm)?,
        commute: ax.sub(&xa)?.norm(norm)?,
        index: al.matmul(a)?.matmul(x)?.sub(&al)?.norm(norm)?,
    })
}
