//! Test and benchmark matrices.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::decomp::householder_q;
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{Precision, Scalar};
use crate::sparse::CsrMatrix;

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 12×12 matrix of index 3 whose entries are 2, 4/10, ±1 and 0. The 4/10
/// entries are formed at the target precision, not rounded from a double.
pub fn drazin_example<T: Scalar>(precision: Precision) -> DenseMatrix<T> {
    const Q: i64 = i64::MIN; // marks 4/10
    #[rustfmt::skip]
    let rows: [[i64; 12]; 12] = [
        [ 2, Q,  0,  0,  0, 0,  0,  0,  0,  0, 0,  0],
        [-2, Q,  0,  0,  0, 0,  0,  0,  0,  0, 0,  0],
        [-1, -1, 1, -1,  0, 0,  0,  0, -1,  0, 0,  0],
        [-1, -1, -1, 1,  0, 0,  0,  0,  0,  0, 0,  0],
        [ 0, 0,  0,  0,  1, 1, -1, -1,  0,  0, -1, 0],
        [ 0, 0,  0,  0,  1, 1, -1, -1,  0,  0, 0,  0],
        [ 0, 0,  0, -1, -2, Q,  0,  0,  0,  0, 0,  0],
        [ 0, 0,  0,  0,  2, Q,  0,  0,  0,  0, 0,  0],
        [ 0, -1, 0,  0,  0, 0,  0,  0,  1, -1, -1, -1],
        [ 0, 0,  0,  0,  0, 0,  0,  0, -1,  1, -1, -1],
        [ 0, 0,  0,  0,  0, 0,  0,  0,  0,  0, Q, -2],
        [ 0, 0,  0,  0,  0, 0,  0,  0,  0,  0, Q,  2],
    ];
    DenseMatrix::from_fn(12, 12, precision, |i, j| match rows[i][j] {
        Q => T::from_ratio(4, 10, precision),
        v => T::from_ratio(v, 1, precision),
    })
}

/// Tridiagonal Toeplitz matrix with `diag` on the diagonal and `off` on
/// both neighbours.
pub fn toeplitz_tridiagonal<T: Scalar>(
    n: usize,
    diag: f64,
    off: f64,
    precision: Precision,
) -> CsrMatrix<T> {
    let mut t = Vec::with_capacity(3 * n);
    for i in 0..n {
        t.push((i, i, T::from_f64(diag, precision)));
        if i + 1 < n {
            t.push((i, i + 1, T::from_f64(off, precision)));
            t.push((i + 1, i, T::from_f64(off, precision)));
        }
    }
    CsrMatrix::from_triplets(n, n, t, precision).expect("indices are in range")
}

/// Default shift of [`shifted_laplacian`].
pub const LAPLACIAN_SHIFT: Complex64 = Complex64::new(0.0, 1.0);
/// Default grid side; `29² = 841` unknowns.
pub const LAPLACIAN_GRID: usize = 29;

/// Five-point Laplacian on a `grid × grid` mesh with Dirichlet boundary,
/// plus `shift·I`: diagonal `4 + shift`, neighbours `−1`.
pub fn shifted_laplacian(grid: usize, shift: Complex64) -> CsrMatrix<Complex64> {
    let n = grid * grid;
    let idx = |r: usize, c: usize| r * grid + c;
    let mut t = Vec::with_capacity(5 * n);
    for r in 0..grid {
        for c in 0..grid {
            let i = idx(r, c);
            t.push((i, i, Complex64::new(4.0, 0.0) + shift));
            let mut link = |j: usize| t.push((i, j, Complex64::new(-1.0, 0.0)));
            if r > 0 {
                link(idx(r - 1, c));
            }
            if r + 1 < grid {
                link(idx(r + 1, c));
            }
            if c > 0 {
                link(idx(r, c - 1));
            }
            if c + 1 < grid {
                link(idx(r, c + 1));
            }
        }
    }
    CsrMatrix::from_triplets(n, n, t, Precision::Double).expect("indices are in range")
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> DenseMatrix<f64> {
    DenseMatrix::from_fn(rows, cols, Precision::Double, |_, _| {
        rng.sample(StandardNormal)
    })
}

/// Haar-distributed orthogonal matrix.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DenseMatrix<f64> {
    householder_q(&gaussian_matrix(n, n, rng)).expect("square input")
}

/// `n` values spaced geometrically from 1 down to `1/kappa`.
pub fn geometric_spectrum(n: usize, kappa: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| kappa.powf(-(i as f64) / (n - 1) as f64))
        .collect()
}

/// `U·diag(σ)·Vᵀ` with Haar `U` (m×m) and `V` (n×n); `σ` may be shorter
/// than `min(m, n)`, the rest being zero.
pub fn with_singular_values(
    m: usize,
    n: usize,
    sigma: &[f64],
    rng: &mut impl Rng,
) -> Result<DenseMatrix<f64>> {
    if sigma.len() > m.min(n) {
        return Err(Error::InvalidInput(format!(
            "{} singular values do not fit a {m}x{n} matrix",
            sigma.len()
        )));
    }
    let u = random_orthogonal(m, rng);
    let v = random_orthogonal(n, rng);
    let s = DenseMatrix::from_fn(m, n, Precision::Double, |i, j| {
        if i == j && i < sigma.len() {
            sigma[i]
        } else {
            0.0
        }
    });
    u.matmul(&s)?.matmul(&v.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::singular_values;
    use crate::scalar::Ext;

    #[test]
    fn drazin_example_entries() {
        let a = drazin_example::<f64>(Precision::Double);
        assert_eq!(a[(0, 1)], 0.4);
        assert_eq!(a[(11, 11)], 2.0);
        assert_eq!(a[(4, 10)], -1.0);
        let prec = Precision::extended(50);
        let e = drazin_example::<Ext>(prec);
        let five = Ext::from_i64(5, prec);
        assert_eq!(e[(0, 1)].clone() * five, Ext::from_i64(2, prec));
    }

    #[test]
    fn laplacian_shape() {
        let a = shifted_laplacian(LAPLACIAN_GRID, LAPLACIAN_SHIFT);
        assert_eq!(a.shape(), (841, 841));
        assert_eq!(a.nnz(), 5 * 841 - 4 * 29);
        assert_eq!(a.get(0, 0), Complex64::new(4.0, 1.0));
        assert_eq!(a.get(0, 29), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn prescribed_singular_values() {
        let mut rng = seeded_rng(7);
        let sigma = geometric_spectrum(5, 1e3);
        let a = with_singular_values(7, 5, &sigma, &mut rng).unwrap();
        let sv = singular_values(&a).unwrap();
        for (x, y) in sv.iter().zip(&sigma) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let q = random_orthogonal(4, &mut rng);
        let e = q
            .transpose()
            .matmul(&q)
            .unwrap()
            .sub(&DenseMatrix::identity(4, Precision::Double))
            .unwrap();
        assert!(e.norm_fro() < 1e-14);
    }

    #[test]
    fn rng_is_reproducible() {
        let a = gaussian_matrix(3, 3, &mut seeded_rng(1));
        let b = gaussian_matrix(3, 3, &mut seeded_rng(1));
        assert_eq!(a, b);
    }
}
