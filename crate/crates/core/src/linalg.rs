//! Deterministic dense factorizations: thin QR, condensed and truncated SVD,
//! Moore-Penrose inverse, norms and the symmetric eigendecomposition.
//!
//! Column signs are normalized so that the first nonzero entry of every column
//! of `Q` (QR) or `U` (SVD) is nonnegative; the paired factor is flipped to
//! match. Every routine is a pure function of its input.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Entries smaller than this fraction of a column's largest magnitude are
/// skipped when looking for the sign-defining "first nonzero" entry.
const SIGN_PIVOT_REL: f64 = 1e-10;

/// Default relative cutoff for numerical rank: `max(m, n) · ε`.
pub fn default_rank_tolerance(rows: usize, cols: usize) -> f64 {
    rows.max(cols).max(1) as f64 * f64::EPSILON
}

#[derive(Clone, Debug)]
pub struct QrFactors {
    /// `m x n`, orthonormal columns.
    pub q: DenseMatrix,
    /// `n x n`, upper triangular with exact zeros below the diagonal.
    pub r: DenseMatrix,
}

/// Condensed SVD `A = U diag(σ) Vᵀ` restricted to the numerical rank.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DenseMatrix,
    /// Strictly positive and nonincreasing.
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    /// `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let us = self.u.scale_columns(&self.singular_values);
        DenseMatrix::from_inner(us.inner() * self.v.inner().transpose())
    }

    /// Keeps the leading `k` triplets (or all of them when `k ≥ rank`).
    pub fn truncate(&self, k: usize) -> SvdFactors {
        let k = k.min(self.rank());
        SvdFactors {
            u: self.u.leading_columns(k),
            singular_values: self.singular_values[..k].to_vec(),
            v: self.v.leading_columns(k),
        }
    }
}

/// Thin Householder QR of a matrix with at least as many rows as columns.
pub fn thin_qr(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = a.shape();
    if m < n {
        return Err(Error::dim("thin_qr", format!("{m}x{n} has fewer rows than columns")));
    }
    let qr = a.inner().clone().qr();
    let mut q = qr.q();
    let mut r = qr.unpack_r();
    for j in 0..n {
        if leading_sign(q.column(j).as_slice()) < 0.0 {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    // nalgebra's R is already triangular; make the zeros exact regardless.
    for j in 0..n {
        for i in (j + 1)..n {
            r[(i, j)] = 0.0;
        }
    }
    Ok(QrFactors {
        q: DenseMatrix::from_inner(q),
        r: DenseMatrix::from_inner(r),
    })
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// Thin SVD with singular values sorted descending and signs normalized;
/// nothing is dropped.
///
/// Backed by faer: nalgebra's SVD loses accuracy when singular values are
/// exactly zero.
pub(crate) fn raw_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let p = m.min(n);
    if p == 0 {
        return (DMatrix::zeros(m, 0), Vec::new(), DMatrix::zeros(n, 0));
    }
    let svd = to_faer(a).thin_svd().expect("SVD iteration converges on finite input");
    let mut us = from_faer(svd.U());
    let mut vs = from_faer(svd.V());
    let sv: Vec<f64> = svd.S().column_vector().iter().map(|x| x.max(0.0)).collect();
    for j in 0..p {
        if leading_sign(us.column(j).as_slice()) < 0.0 {
            us.column_mut(j).neg_mut();
            vs.column_mut(j).neg_mut();
        }
    }
    (us, sv, vs)
}

/// Condensed SVD keeping singular values above `max(m,n)·ε·σ₁`.
pub fn condensed_svd(a: &DenseMatrix) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    condensed_svd_with_tolerance(a, default_rank_tolerance(m, n))
}

/// Condensed SVD keeping singular values above `rel_tol · σ₁`.
pub fn condensed_svd_with_tolerance(a: &DenseMatrix, rel_tol: f64) -> Result<SvdFactors> {
    let (u, s, v) = raw_svd(a.inner());
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::ZeroRank);
    }
    let rank = s.iter().take_while(|&&x| x > rel_tol * smax).count();
    Ok(SvdFactors {
        u: DenseMatrix::from_inner(u.columns(0, rank).into_owned()),
        singular_values: s[..rank].to_vec(),
        v: DenseMatrix::from_inner(v.columns(0, rank).into_owned()),
    })
}

/// Best rank-`k` approximation factors. When the numerical rank is below `k`
/// only the nonzero triplets are returned.
pub fn truncated_svd(a: &DenseMatrix, k: usize) -> Result<SvdFactors> {
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::param(
            "truncated_svd",
            format!("k = {k} outside 1..={}", m.min(n)),
        ));
    }
    Ok(condensed_svd(a)?.truncate(k))
}

/// Moore-Penrose inverse treating singular values `≤ rel_tol · σ_max` as zero.
pub fn pseudo_inverse(a: &DenseMatrix, rel_tol: f64) -> DenseMatrix {
    pinv_with_rank(a, rel_tol).0
}

/// Moore-Penrose inverse at the default tolerance.
pub fn pinv(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = a.shape();
    pseudo_inverse(a, default_rank_tolerance(m, n))
}

/// Moore-Penrose inverse together with the numerical rank it used.
pub(crate) fn pinv_with_rank(a: &DenseMatrix, rel_tol: f64) -> (DenseMatrix, usize) {
    let (m, n) = a.shape();
    let (u, s, v) = raw_svd(a.inner());
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = if smax == 0.0 {
        0
    } else {
        s.iter().take_while(|&&x| x > rel_tol * smax).count()
    };
    if rank == 0 {
        return (DenseMatrix::zeros(n, m), 0);
    }
    let mut vs = v.columns(0, rank).into_owned();
    for (j, sj) in s[..rank].iter().enumerate() {
        vs.column_mut(j).scale_mut(1.0 / sj);
    }
    let ut = u.columns(0, rank).transpose();
    (DenseMatrix::from_inner(vs * ut), rank)
}

/// `(‖A‖_F, ‖A‖_2)`.
pub fn norms(a: &DenseMatrix) -> (f64, f64) {
    (a.frobenius_norm(), spectral_norm(a))
}

pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// All `min(m, n)` singular values, descending.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    if a.rows().min(a.cols()) == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_faer(a.inner())
        .singular_values()
        .expect("SVD iteration converges on finite input")
        .into_iter()
        .map(|x| x.max(0.0))
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `σ_max / σ_min` over all `min(m, n)` singular values; infinite when singular.
pub fn condition_number(a: &DenseMatrix) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// `‖A − A_k‖_F²`, the squared tail of the singular spectrum.
pub fn tail_energy(a: &DenseMatrix, k: usize) -> f64 {
    singular_values(a).iter().skip(k).map(|s| s * s).sum()
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
pub fn symmetric_eigen(a: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    let (m, n) = a.shape();
    if m != n {
        return Err(Error::dim("symmetric_eigen", format!("{m}x{n} is not square")));
    }
    if n == 0 {
        return Ok((Vec::new(), DenseMatrix::zeros(0, 0)));
    }
    let eig = to_faer(a.inner())
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::degenerate("symmetric_eigen", format!("{e:?}")))?;
    // faer sorts ascending.
    let order: Vec<usize> = (0..n).rev().collect();
    let raw: Vec<f64> = eig.S().column_vector().iter().copied().collect();
    let values = order.iter().map(|&i| raw[i]).collect();
    let mut vectors = from_faer(eig.U()).select_columns(&order);
    for j in 0..n {
        if leading_sign(vectors.column(j).as_slice()) < 0.0 {
            vectors.column_mut(j).neg_mut();
        }
    }
    Ok((values, DenseMatrix::from_inner(vectors)))
}

/// Orthonormal basis of the numerical column space of `a`.
pub fn range_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(condensed_svd(a)?.u)
}

/// Solves `R X = B` for upper-triangular `R`.
pub fn solve_upper_triangular(r: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let x = r
        .inner()
        .solve_upper_triangular(b.inner())
        .ok_or_else(|| Error::singular("solve_upper_triangular", "zero on the diagonal"))?;
    DenseMatrix::try_from(x)
}

/// Solves the square system `A X = B` by LU with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != a.cols() || a.rows() != b.rows() {
        return Err(Error::dim("solve", "system is not square or sizes differ"));
    }
    let x = a
        .inner()
        .clone()
        .lu()
        .solve(b.inner())
        .ok_or_else(|| Error::singular("solve", "LU factor is singular"))?;
    DenseMatrix::try_from(x)
        .map_err(|_| Error::singular("solve", "solution overflowed"))
}

/// Solves `A X = B` for symmetric positive definite `A`.
pub fn solve_spd(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let chol = a
        .inner()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::singular("solve_spd", "matrix is not positive definite"))?;
    DenseMatrix::try_from(chol.solve(b.inner()))
}

/// `‖QᵀQ − I‖_F`.
pub fn orthonormality_defect(q: &DenseMatrix) -> f64 {
    let g = q.tr_mul(q);
    (&g - &DenseMatrix::identity(q.cols())).frobenius_norm()
}

fn leading_sign(col: &[f64]) -> f64 {
    let cmax = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    col.iter()
        .find(|v| v.abs() > SIGN_PIVOT_REL * cmax)
        .map_or(1.0, |v| v.signum())
}
