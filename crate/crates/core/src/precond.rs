//! Sparse approximate inverses built by a few hyperpower loops.

use log::debug;

use crate::error::{Error, Result};
use crate::init::init_diagonal;
use crate::scalar::Scalar;
use crate::scheme::{SchemeId, SchemeStep};
use crate::sparse::{sparsify, CsrMatrix};

/// Entries at or below this modulus are dropped after every loop.
pub const DEFAULT_DROP: f64 = 1e-5;

/// Loop counts used for the comparison runs: `X₅` of SM, `X₃` of CM and
/// `X₁` of PM.
pub const COMPARISON_LOOPS: [(SchemeId, usize); 3] =
    [(SchemeId::Sm, 5), (SchemeId::Cm, 3), (SchemeId::Pm, 1)];

#[derive(Debug, thiserror::Error)]
#[error("{error} (after {loops_done} preconditioner loops)")]
pub struct PreconditionerFailure<T> {
    pub error: Error,
    pub loops_done: usize,
    /// The last finite iterate, if any loop completed.
    pub partial: Option<CsrMatrix<T>>,
}

/// Runs `loops` steps of `scheme` from the diagonal start `diag(A)⁻¹`,
/// sparsifying with `threshold` after each one.
#[allow(clippy::result_large_err)]
pub fn build_preconditioner<T: Scalar>(
    a: &CsrMatrix<T>,
    scheme: SchemeId,
    loops: usize,
    threshold: f64,
) -> Result<CsrMatrix<T>, PreconditionerFailure<T>> {
    let fail = |error, loops_done, partial| PreconditionerFailure {
        error,
        loops_done,
        partial,
    };
    if loops == 0 {
        return Err(fail(
            Error::InvalidInput("need at least one loop".into()),
            0,
            None,
        ));
    }
    let dense = a.to_dense();
    let init = init_diagonal(&dense).map_err(|e| fail(e, 0, None))?;
    let mut stepper = SchemeStep::new(scheme, a.precision()).map_err(|e| fail(e, 0, None))?;
    let mut x = init.x0;
    let mut current: Option<CsrMatrix<T>> = None;
    for k in 0..loops {
        let next = stepper
            .step(&dense, &x)
            .map_err(|e| fail(e, k, current.clone()))?;
        let sparse = sparsify(&next, threshold);
        debug!("{scheme} loop {}: {} stored entries", k + 1, sparse.nnz());
        x = sparse.to_dense();
        current = Some(sparse);
    }
    Ok(current.expect("at least one loop ran"))
}

/// `diag(A)⁻¹` as a sparse matrix.
pub fn jacobi<T: Scalar>(a: &CsrMatrix<T>) -> Result<CsrMatrix<T>> {
    let d = a.diagonal();
    if let Some(i) = d.iter().position(|x| x.is_zero()) {
        return Err(Error::Degenerate(format!(
            "diagonal entry {} is zero",
            i + 1
        )));
    }
    Ok(CsrMatrix::from_diagonal(
        &d.into_iter().map(|x| T::one() / x).collect::<Vec<_>>(),
        a.precision(),
    ))
}
