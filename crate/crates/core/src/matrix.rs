//! Dense real matrix used as the carrier for every input, sketch and factor.
//!
//! Entries are exposed in row-major order through [`DenseMatrix::from_row_major`]
//! and [`DenseMatrix::to_row_major`]. Storage is a column-major
//! [`nalgebra::DMatrix`], which makes single-column access contiguous (the
//! count sketch streams columns) and lets the factorizations run without copies.
//!
//! A `DenseMatrix` never holds NaN or infinite entries: the fallible
//! constructors reject them and the panicking ones assert on them.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(
                "from_row_major",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        check_finite(&data, |k| (k / cols.max(1), k % cols.max(1)))?;
        Ok(Self {
            inner: DMatrix::from_row_slice(rows, cols, &data),
        })
    }

    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dim(
                "from_column_major",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        check_finite(&data, |k| (k % rows.max(1), k / rows.max(1)))?;
        Ok(Self {
            inner: DMatrix::from_vec(rows, cols, data),
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::dim(
                    "from_rows",
                    format!("row {i} has {} entries, expected {ncols}", row.len()),
                ));
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), ncols, data)
    }

    /// # Panics
    /// Panics if `f` produces a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let inner = DMatrix::from_fn(rows, cols, |i, j| {
            let v = f(i, j);
            assert!(v.is_finite(), "non-finite entry at ({i}, {j})");
            v
        });
        Self { inner }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    /// # Panics
    /// Panics if an entry is non-finite.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// An `n x 1` matrix holding `v`.
    ///
    /// # Panics
    /// Panics if an entry is non-finite.
    pub fn column_vector(v: &[f64]) -> Self {
        Self::from_fn(v.len(), 1, |i, _| v[i])
    }

    pub(crate) fn from_inner(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.iter().all(|v| v.is_finite()), "non-finite entry");
        Self { inner }
    }

    pub(crate) fn inner(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub(crate) fn into_inner(self) -> DMatrix<f64> {
        self.inner
    }

    /// Copies the matrix into an `nalgebra` matrix.
    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        self.inner.clone()
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.inner[(i, j)]
    }

    /// Contiguous view of column `j`.
    #[inline]
    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.rows();
        &self.inner.as_slice()[j * m..(j + 1) * m]
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.cols()).map(|j| self.inner[(i, j)]).collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            out.extend((0..self.cols()).map(|j| self.inner[(i, j)]));
        }
        out
    }

    pub fn as_column_major(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn transpose(&self) -> Self {
        Self::from_inner(self.inner.transpose())
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn tr_mul(&self, other: &DenseMatrix) -> Self {
        assert_eq!(self.rows(), other.rows(), "tr_mul: row counts differ");
        Self::from_inner(self.inner.tr_mul(&other.inner))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols(), v.len(), "mul_vec: length mismatch");
        let mut out = vec![0.0; self.rows()];
        for (j, &vj) in v.iter().enumerate() {
            if vj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * vj;
            }
        }
        out
    }

    /// `selfᵀ · v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows(), v.len(), "tr_mul_vec: length mismatch");
        (0..self.cols()).map(|j| dot(self.column(j), v)).collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_inner(&self.inner * factor)
    }

    /// Scales column `j` by `factors[j]`.
    pub fn scale_columns(&self, factors: &[f64]) -> Self {
        assert_eq!(self.cols(), factors.len());
        let mut inner = self.inner.clone();
        for (j, &f) in factors.iter().enumerate() {
            inner.column_mut(j).scale_mut(f);
        }
        Self::from_inner(inner)
    }

    /// Scales row `i` by `factors[i]`.
    pub fn scale_rows(&self, factors: &[f64]) -> Self {
        assert_eq!(self.rows(), factors.len());
        let mut inner = self.inner.clone();
        for (i, &f) in factors.iter().enumerate() {
            inner.row_mut(i).scale_mut(f);
        }
        Self::from_inner(inner)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_inner(self.inner.select_columns(idx))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self::from_inner(self.inner.select_rows(idx))
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self.inner[(rows[i], cols[j])])
    }

    /// Leading `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        Self::from_inner(self.inner.columns(0, k).into_owned())
    }

    /// Concatenates matrices with equal row counts side by side.
    pub fn hstack(parts: &[&DenseMatrix]) -> Result<Self> {
        let rows = parts.first().map_or(0, |p| p.rows());
        if parts.iter().any(|p| p.rows() != rows) {
            return Err(Error::dim("hstack", "row counts differ"));
        }
        let cols: usize = parts.iter().map(|p| p.cols()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.extend_from_slice(p.as_column_major());
        }
        Ok(Self::from_inner(DMatrix::from_vec(rows, cols, data)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows().min(self.cols()))
            .map(|i| self.inner[(i, i)])
            .collect()
    }

    /// `self + αI` for square `self`.
    pub fn shift_diagonal(self, alpha: f64) -> Self {
        assert_eq!(self.rows(), self.cols(), "shift_diagonal: not square");
        let mut inner = self.into_inner();
        for i in 0..inner.nrows() {
            inner[(i, i)] += alpha;
        }
        Self::from_inner(inner)
    }

    /// `(self + selfᵀ) / 2`.
    pub fn symmetrize(&self) -> Self {
        assert_eq!(self.rows(), self.cols(), "symmetrize: not square");
        Self::from_inner((&self.inner + self.inner.transpose()) * 0.5)
    }
}

impl TryFrom<DMatrix<f64>> for DenseMatrix {
    type Error = Error;

    fn try_from(inner: DMatrix<f64>) -> Result<Self> {
        let rows = inner.nrows();
        check_finite(inner.as_slice(), |k| (k % rows.max(1), k / rows.max(1)))?;
        Ok(Self { inner })
    }
}

impl Mul for &DenseMatrix {
    type Output = DenseMatrix;

    fn mul(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols(),
            rhs.rows(),
            "matrix product: {}x{} times {}x{}",
            self.rows(),
            self.cols(),
            rhs.rows(),
            rhs.cols()
        );
        DenseMatrix::from_inner(&self.inner * &rhs.inner)
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;

    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum: shapes differ");
        DenseMatrix::from_inner(&self.inner + &rhs.inner)
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;

    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference: shapes differ");
        DenseMatrix::from_inner(&self.inner - &rhs.inner)
    }
}

fn check_finite(data: &[f64], position: impl Fn(usize) -> (usize, usize)) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(k) => {
            let (row, col) = position(k);
            Err(Error::NonFinite { row, col })
        }
        None => Ok(()),
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use super::*;

    #[test]
    fn row_major_round_trip() {
        let m = DenseMatrix::from_row_major(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        assert_eq!(m.get(0, 2), 3.0);
        assert_eq!(m.get(1, 0), 4.0);
        assert_eq!(m.column(1), &[2.0, 5.0]);
        assert_eq!(m.to_row_major(), vec![1., 2., 3., 4., 5., 6.]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            DenseMatrix::from_row_major(2, 2, vec![1.0; 3]),
            Err(Error::Dimension { .. })
        ));
        assert_eq!(
            DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { row: 1, col: 0 })
        );
        assert!(DenseMatrix::try_from(DMatrix::from_element(1, 1, f64::INFINITY)).is_err());
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn products_and_stacking() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0], [-1.0]]).unwrap();
        assert_eq!((&a * &b).column(0), &[-1.0, -1.0, -1.0]);
        assert_eq!(a.mul_vec(&[1.0, -1.0]), vec![-1.0, -1.0, -1.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 0.0, 1.0]), vec![6.0, 8.0]);
        assert_eq!(a.tr_mul(&a), &a.transpose() * &a);
        let h = DenseMatrix::hstack(&[&a, &a.select_columns(&[1])]).unwrap();
        assert_eq!(h.row(2), vec![5.0, 6.0, 6.0]);
        assert_eq!(a.select_rows(&[2, 0]).row(0), vec![5.0, 6.0]);
        assert_eq!(a.submatrix(&[1], &[1, 0]).row(0), vec![4.0, 3.0]);
    }

    proptest! {
        #[test]
        fn transpose_is_an_involution(rows in 1usize..8, cols in 1usize..8, seed in 0u64..1000) {
            let a = crate::synth::gaussian_matrix(rows, cols, seed);
            prop_assert_eq!(a.transpose().transpose(), a.clone());
            let back = DenseMatrix::from_row_major(rows, cols, a.to_row_major()).unwrap();
            prop_assert_eq!(back, a);
        }

        #[test]
        fn tr_mul_matches_explicit_transpose(rows in 1usize..8, cols in 1usize..6, seed in 0u64..1000) {
            let a = crate::synth::gaussian_matrix(rows, cols, seed);
            let b = crate::synth::gaussian_matrix(rows, 3, seed + 1);
            let d = (&a.tr_mul(&b) - &(&a.transpose() * &b)).max_abs();
            prop_assert!(d <= 1e-12 * (1.0 + a.max_abs() * b.max_abs() * rows as f64));
        }
    }
}
