//! Compressed sparse row matrices.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{Precision, Real, Scalar};

/// CSR storage: row `i` owns `indices[offsets[i]..offsets[i+1]]`, column
/// indices strictly ascending within a row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix<T> {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
    precision: Precision,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn new(
        rows: usize,
        cols: usize,
        offsets: Vec<usize>,
        indices: Vec<usize>,
        values: Vec<T>,
        precision: Precision,
    ) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidInput(format!("CSR: {msg}")));
        if rows == 0 || cols == 0 {
            return bad(format!("empty shape {rows}x{cols}"));
        }
        if offsets.len() != rows + 1 || offsets[0] != 0 {
            return bad("offsets must have rows+1 entries starting at 0".into());
        }
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return bad("offsets must be nondecreasing".into());
        }
        if offsets[rows] != values.len() || indices.len() != values.len() {
            return bad("last offset must equal the number of stored values".into());
        }
        for i in 0..rows {
            let row = &indices[offsets[i]..offsets[i + 1]];
            if row.iter().any(|&j| j >= cols) {
                return bad(format!("column index out of range in row {i}"));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("columns of row {i} not strictly ascending"));
            }
        }
        Ok(Self {
            rows,
            cols,
            offsets,
            indices,
            values,
            precision,
        })
    }

    /// Builds from `(row, col, value)` triplets in any order. Duplicate
    /// positions are summed; explicit zeros are kept.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, T)>,
        precision: Precision,
    ) -> Result<Self> {
        if let Some(&(i, j, _)) = triplets.iter().find(|(i, j, _)| *i >= rows || *j >= cols) {
            return Err(Error::InvalidInput(format!(
                "entry ({i},{j}) outside {rows}x{cols}"
            )));
        }
        triplets.sort_by_key(|&(i, j, _)| (i, j));
        let mut offsets = vec![0; rows + 1];
        let mut indices: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut values: Vec<T> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                let slot = values.last_mut().expect("duplicate follows an entry");
                *slot = slot.clone() + v;
                continue;
            }
            offsets[i + 1] += 1;
            indices.push(j);
            values.push(v);
            last = Some((i, j));
        }
        for i in 0..rows {
            offsets[i + 1] += offsets[i];
        }
        Self::new(rows, cols, offsets, indices, values, precision)
    }

    pub fn identity(n: usize, precision: Precision) -> Self {
        Self::from_diagonal(&vec![T::one(); n], precision)
    }

    pub fn from_diagonal(d: &[T], precision: Precision) -> Self {
        let n = d.len();
        Self {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: d.to_vec(),
            precision,
        }
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

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Stored `(column, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &T)> {
        let span = self.offsets[i]..self.offsets[i + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(&self.values[span])
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &T)> {
        (0..self.rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let span = self.offsets[i]..self.offsets[i + 1];
        match self.indices[span.clone()].binary_search(&j) {
            Ok(p) => self.values[span.start + p].clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn spmv(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(Error::Shape {
                op: "spmv",
                left: self.shape(),
                right: (v.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .fold(T::zero(), |acc, (j, a)| acc + a.clone() * v[j].clone())
            })
            .collect())
    }

    /// Sparse × sparse product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "sparse matmul",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut acc = vec![T::zero(); other.cols];
        let mut touched = vec![false; other.cols];
        let mut cols_in_row = Vec::new();
        let mut offsets = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    if !touched[j] {
                        touched[j] = true;
                        cols_in_row.push(j);
                    }
                    acc[j] = acc[j].clone() + a.clone() * b.clone();
                }
            }
            cols_in_row.sort_unstable();
            for &j in &cols_in_row {
                indices.push(j);
                values.push(std::mem::replace(&mut acc[j], T::zero()));
                touched[j] = false;
            }
            cols_in_row.clear();
            offsets.push(indices.len());
        }
        Self::new(
            self.rows,
            other.cols,
            offsets,
            indices,
            values,
            self.precision,
        )
    }

    pub fn to_dense(&self) -> DenseMatrix<T> {
        let mut d = DenseMatrix::zeros(self.rows, self.cols, self.precision);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v.clone();
        }
        d
    }
}

/// Drops entries with modulus `≤ threshold`; the rest are copied exactly.
/// Zeros are always dropped.
pub fn sparsify<T: Scalar>(x: &DenseMatrix<T>, threshold: f64) -> CsrMatrix<T> {
    let mut offsets = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for i in 0..x.rows() {
        for (j, v) in x.row(i).iter().enumerate() {
            if v.is_zero() || v.abs().to_f64() <= threshold {
                continue;
            }
            indices.push(j);
            values.push(v.clone());
        }
        offsets.push(indices.len());
    }
    CsrMatrix {
        rows: x.rows(),
        cols: x.cols(),
        offsets,
        indices,
        values,
        precision: x.precision(),
    }
}

pub fn densify<T: Scalar>(a: &CsrMatrix<T>) -> DenseMatrix<T> {
    a.to_dense()
}

impl<T: Scalar> From<&DenseMatrix<T>> for CsrMatrix<T> {
    fn from(d: &DenseMatrix<T>) -> Self {
        sparsify(d, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: Precision = Precision::Double;

    #[test]
    fn spmv_examples() {
        let i = CsrMatrix::<f64>::identity(3, D);
        assert_eq!(i.spmv(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let a = CsrMatrix::from_triplets(2, 2, vec![(0, 1, 3.0)], D).unwrap();
        assert_eq!(a.spmv(&[1.0, 2.0]).unwrap(), vec![6.0, 0.0]);
        assert!(a.spmv(&[1.0]).is_err());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a =
            CsrMatrix::from_triplets(2, 3, vec![(1, 2, 1.0), (0, 0, 2.0), (1, 2, 4.0)], D).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(1, 2), 5.0);
        assert_eq!(a.offsets(), &[0, 1, 2]);
        assert!(CsrMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)], D).is_err());
    }

    #[test]
    fn invalid_layouts_rejected() {
        assert!(CsrMatrix::<f64>::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0], D).is_err());
        assert!(CsrMatrix::<f64>::new(1, 3, vec![0, 1], vec![0], vec![1.0, 1.0], D).is_err());
        assert!(CsrMatrix::<f64>::new(2, 3, vec![0, 2, 1], vec![0, 1], vec![1.0, 1.0], D).is_err());
    }

    #[test]
    fn sparsify_examples() {
        let x = DenseMatrix::<f64>::diag(&[1.0, 5e-6], D);
        let s = sparsify(&x, 1e-5);
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.get(0, 0), 1.0);
        let tiny = DenseMatrix::<f64>::from_fn(3, 3, D, |i, j| 1e-6 * (i + j) as f64);
        assert_eq!(sparsify(&tiny, 1e-5).nnz(), 0);
        let h = crate::matrix::hilbert::<f64>(4, 3, D);
        assert_eq!(densify(&sparsify(&h, 0.0)), h);
    }

    #[test]
    fn sparse_product_matches_dense() {
        let a = DenseMatrix::<f64>::from_fn(4, 3, D, |i, j| {
            if (i + j) % 2 == 0 {
                (i * 3 + j) as f64
            } else {
                0.0
            }
        });
        let b = DenseMatrix::<f64>::from_fn(3, 5, D, |i, j| {
            if i == j || j == 4 {
                1.0 + i as f64
            } else {
                0.0
            }
        });
        let sp = CsrMatrix::from(&a).matmul(&CsrMatrix::from(&b)).unwrap();
        let diff = sp.to_dense().max_abs_diff(&a.matmul(&b).unwrap()).unwrap();
        assert_eq!(diff, 0.0);
    }
}
