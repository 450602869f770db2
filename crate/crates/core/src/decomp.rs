//! The few factorizations the iteration code needs: singular values (one-sided
//! Jacobi), numerical rank, Gaussian elimination and Householder QR.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{cmp_real, Real, Scalar};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Singular values in descending order.
///
/// One-sided Jacobi on the columns of `A` (or `A*` when `A` is wide). Works
/// at whatever precision the matrix carries.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T::Real>> {
    let b = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.conj_transpose()
    };
    let (m, n) = b.shape();
    let prec = b.precision();
    let mut cols: Vec<Vec<T>> = (0..n)
        .map(|j| (0..m).map(|i| b[(i, j)].clone()).collect())
        .collect();
    let eps = T::Real::epsilon(prec);
    let half = T::Real::from_ratio(1, 2, prec);
    let mut converged = false;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = norm_sqr(&cols[p]);
                let beta = norm_sqr(&cols[q]);
                let gamma = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .fold(T::zero(), |acc, (x, y)| acc + x.conj() * y.clone());
                let g = gamma.abs();
                if g.is_zero() || g <= eps.clone() * (alpha.clone() * beta.clone()).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / T::from_real(g.clone());
                let zeta = (beta - alpha) * half.clone() / g;
                let root = (T::Real::one() + zeta.clone() * zeta.clone()).sqrt();
                let t = if zeta >= T::Real::zero() {
                    T::Real::one() / (zeta + root)
                } else {
                    -(T::Real::one() / (root - zeta))
                };
                let c = T::Real::one() / (T::Real::one() + t.clone() * t.clone()).sqrt();
                let s = c.clone() * t;
                let unphase = phase.conj();
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let yq = y.clone() * unphase.clone();
                    let xp = x.clone();
                    *x = xp.scale(&c) - yq.scale(&s);
                    *y = xp.scale(&s) + yq.scale(&c);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Degenerate(
            "one-sided Jacobi did not converge".to_string(),
        ));
    }
    let mut sv: Vec<T::Real> = cols.iter().map(|c| norm_sqr(c).sqrt()).collect();
    sv.sort_by(|x, y| cmp_real(y, x));
    Ok(sv)
}

fn norm_sqr<T: Scalar>(v: &[T]) -> T::Real {
    v.iter().fold(T::Real::zero(), |acc, x| acc + x.abs_sqr())
}

/// Default rank cutoff: `max(rows, cols) · ε · σ₁`.
pub fn default_rank_tol<T: Scalar>(a: &DenseMatrix<T>, sigma_max: &T::Real) -> T::Real {
    let dim = a.rows().max(a.cols()) as i64;
    T::Real::from_ratio(dim, 1, a.precision()) * T::Real::epsilon(a.precision()) * sigma_max.clone()
}

/// Number of singular values above `tol` (default: [`default_rank_tol`]).
pub fn rank<T: Scalar>(a: &DenseMatrix<T>, tol: Option<T::Real>) -> Result<usize> {
    let sv = singular_values(a)?;
    let sigma_max = sv.first().cloned().unwrap_or_else(T::Real::zero);
    if sigma_max.is_zero() {
        return Ok(0);
    }
    let tol = tol.unwrap_or_else(|| default_rank_tol(a, &sigma_max));
    Ok(sv.iter().filter(|s| **s > tol).count())
}

/// Solves `A·X = B` by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
pub fn solve<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Shape {
            op: "solve",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let n = a.rows();
    let k = b.cols();
    let mut lhs: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut rhs: Vec<Vec<T>> = (0..n).map(|i| b.row(i).to_vec()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| cmp_real(&lhs[i][col].abs(), &lhs[j][col].abs()))
            .unwrap_or(col);
        if lhs[pivot][col].is_zero() {
            return Err(Error::Degenerate(format!(
                "singular matrix (column {})",
                col + 1
            )));
        }
        lhs.swap(col, pivot);
        rhs.swap(col, pivot);
        let p = lhs[col][col].clone();
        for i in col + 1..n {
            if lhs[i][col].is_zero() {
                continue;
            }
            let f = lhs[i][col].clone() / p.clone();
            for j in col..n {
                let v = lhs[col][j].clone();
                lhs[i][j] = lhs[i][j].clone() - f.clone() * v;
            }
            for j in 0..k {
                let v = rhs[col][j].clone();
                rhs[i][j] = rhs[i][j].clone() - f.clone() * v;
            }
        }
    }
    for col in (0..n).rev() {
        let p = lhs[col][col].clone();
        for j in 0..k {
            let mut acc = rhs[col][j].clone();
            for c in col + 1..n {
                acc = acc - lhs[col][c].clone() * rhs[c][j].clone();
            }
            rhs[col][j] = acc / p.clone();
        }
    }
    DenseMatrix::new(n, k, rhs.into_iter().flatten().collect(), a.precision())
}

pub fn inverse<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    solve(a, &DenseMatrix::identity(a.rows(), a.precision()))
}

/// Moore–Penrose inverse of a full-column-rank matrix through the normal
/// equations, `(A*A)⁻¹A*`. Intended for extended-precision reference values.
pub fn pinv_full_column_rank<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let ah = a.conj_transpose();
    solve(&ah.matmul(a)?, &ah)
}

/// Unitary factor of a Householder QR of a square matrix, with the sign of
/// each column chosen so that `R` has a nonnegative real diagonal.
pub fn householder_q<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Shape {
            op: "householder_q",
            left: a.shape(),
            right: a.shape(),
        });
    }
    let n = a.rows();
    let prec = a.precision();
    let mut r: Vec<Vec<T>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut q = DenseMatrix::<T>::identity(n, prec);
    for k in 0..n.saturating_sub(1) {
        let norm = (k..n)
            .fold(T::Real::zero(), |acc, i| acc + r[i][k].abs_sqr())
            .sqrt();
        if norm.is_zero() {
            continue;
        }
        let x0 = r[k][k].clone();
        let phase = if x0.is_zero() {
            T::one()
        } else {
            x0.clone() / T::from_real(x0.abs())
        };
        // v = x + phase·‖x‖·e₁
        let mut v: Vec<T> = (k..n).map(|i| r[i][k].clone()).collect();
        v[0] = v[0].clone() + phase * T::from_real(norm);
        let vnorm = norm_sqr(&v);
        if vnorm.is_zero() {
            continue;
        }
        let two = T::from_ratio(2, 1, prec);
        let reflect = |rows: &mut Vec<Vec<T>>, cols: std::ops::Range<usize>| {
            for j in cols {
                let dot = v.iter().enumerate().fold(T::zero(), |acc, (t, vi)| {
                    acc + vi.conj() * rows[k + t][j].clone()
                });
                let f = two.clone() * dot / T::from_real(vnorm.clone());
                for (t, vi) in v.iter().enumerate() {
                    rows[k + t][j] = rows[k + t][j].clone() - f.clone() * vi.clone();
                }
            }
        };
        reflect(&mut r, k..n);
        // Accumulate Q = H₁H₂…: apply H on the right, Q ← Q·H.
        for i in 0..n {
            let dot = v.iter().enumerate().fold(T::zero(), |acc, (t, vi)| {
                acc + q[(i, k + t)].clone() * vi.clone()
            });
            let f = two.clone() * dot / T::from_real(vnorm.clone());
            for (t, vi) in v.iter().enumerate() {
                q[(i, k + t)] = q[(i, k + t)].clone() - f.clone() * vi.conj();
            }
        }
    }
    // Flip column signs so diag(R) is nonnegative real.
    for k in 0..n {
        let d = r[k][k].clone();
        if d.is_zero() {
            continue;
        }
        let phase = d.clone() / T::from_real(d.abs());
        for i in 0..n {
            q[(i, k)] = q[(i, k)].clone() * phase.clone();
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::hilbert;
    use crate::scalar::{Ext, Precision};
    use num_complex::Complex64;

    const D: Precision = Precision::Double;

    #[test]
    fn singular_values_of_known_matrices() {
        let d = DenseMatrix::diag(&[3.0, -1.0, 0.5], D);
        let sv = singular_values(&d).unwrap();
        assert!(
            (sv[0] - 3.0).abs() < 1e-14
                && (sv[1] - 1.0).abs() < 1e-14
                && (sv[2] - 0.5).abs() < 1e-14
        );

        // [[1,1],[0,1]] has singular values (1 ± √5)/2 in modulus: golden ratio pair.
        let a = DenseMatrix::<f64>::from_f64_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]], D).unwrap();
        let sv = singular_values(&a).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sv[0] - phi).abs() < 1e-14);
        assert!((sv[1] - 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn complex_singular_values_match_gram_eigenvalues() {
        let i = Complex64::new(0.0, 1.0);
        let a = DenseMatrix::new(
            2,
            2,
            vec![
                i,
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                i * 2.0,
            ],
            D,
        )
        .unwrap();
        let sv = singular_values(&a).unwrap();
        // σ₁²σ₂² = |det|² = 4, σ₁²+σ₂² = ‖A‖_F² = 6.
        assert!((sv[0] * sv[1] - 2.0).abs() < 1e-13);
        assert!((sv[0] * sv[0] + sv[1] * sv[1] - 6.0).abs() < 1e-13);
    }

    #[test]
    fn rank_cases() {
        assert_eq!(rank(&DenseMatrix::<f64>::identity(5, D), None).unwrap(), 5);
        assert_eq!(rank(&DenseMatrix::<f64>::zeros(3, 4, D), None).unwrap(), 0);
        let a =
            DenseMatrix::<f64>::from_f64_rows(&[vec![1., 2., 3.], vec![2., 4., 6.]], D).unwrap();
        assert_eq!(rank(&a, None).unwrap(), 1);
        let h = hilbert::<Ext>(6, 6, Precision::extended(60));
        assert_eq!(rank(&h, None).unwrap(), 6);
    }

    #[test]
    fn solve_and_inverse() {
        let a = DenseMatrix::<f64>::from_f64_rows(&[vec![0.0, 2.0], vec![4.0, 1.0]], D).unwrap();
        let inv = inverse(&a).unwrap();
        let id = a.matmul(&inv).unwrap();
        assert!(id.max_abs_diff(&DenseMatrix::identity(2, D)).unwrap() < 1e-15);
        let s = DenseMatrix::<f64>::from_f64_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]], D).unwrap();
        assert!(matches!(inverse(&s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn householder_q_is_orthogonal() {
        let a = DenseMatrix::<f64>::from_f64_rows(
            &[
                vec![2.0, -1.0, 0.3],
                vec![0.5, 4.0, 1.0],
                vec![-1.0, 0.2, 3.0],
            ],
            D,
        )
        .unwrap();
        let q = householder_q(&a).unwrap();
        let qtq = q.transpose().matmul(&q).unwrap();
        assert!(qtq.max_abs_diff(&DenseMatrix::identity(3, D)).unwrap() < 1e-14);
        // R = QᵀA is upper triangular with nonnegative diagonal.
        let r = q.transpose().matmul(&a).unwrap();
        for i in 0..3 {
            assert!(r[(i, i)] >= 0.0);
            for j in 0..i {
                assert!(r[(i, j)].abs() < 1e-14);
            }
        }
    }
}
