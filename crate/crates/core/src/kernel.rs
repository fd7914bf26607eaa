//! Gaussian RBF kernels, dense or evaluated lazily with an entry counter.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::matrix::{dot, DenseMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum KernelKind {
    /// `exp(−‖x − y‖² / (2σ²))`.
    Rbf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub sigma: f64,
}

impl KernelSpec {
    pub fn rbf(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param("rbf kernel", format!("sigma = {sigma} must be positive")));
        }
        Ok(Self {
            kind: KernelKind::Rbf,
            sigma,
        })
    }
}

/// Points stored row-major with their halved squared norms, the layout the
/// inner-product expansion of the RBF kernel works on.
#[derive(Clone, Debug)]
struct Points {
    d: usize,
    data: Vec<f64>,
    half_sq: Vec<f64>,
}

impl Points {
    fn new(x: &DenseMatrix) -> Self {
        let d = x.cols();
        let data = x.to_row_major();
        let half_sq = data.chunks(d.max(1)).take(x.rows()).map(|p| dot(p, p) / 2.0).collect();
        Self { d, data, half_sq }
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

/// `exp((⟨x, y⟩ − (‖x‖²/2 + ‖y‖²/2)) / σ²)`, clamped so rounding never
/// pushes an entry above one. Symmetric in its arguments bit for bit, and
/// exactly one on the diagonal.
fn rbf_entry(a: &Points, i: usize, b: &Points, j: usize, inv_s2: f64) -> f64 {
    let e = dot(a.point(i), b.point(j)) - (a.half_sq[i] + b.half_sq[j]);
    (e * inv_s2).min(0.0).exp()
}

/// Dense `n1 x n2` RBF kernel between the rows of `x1` and `x2`.
pub fn rbf_kernel(x1: &DenseMatrix, x2: &DenseMatrix, sigma: f64) -> Result<DenseMatrix> {
    let spec = KernelSpec::rbf(sigma)?;
    if x1.cols() != x2.cols() {
        return Err(Error::dim(
            "rbf_kernel",
            format!("points have {} and {} coordinates", x1.cols(), x2.cols()),
        ));
    }
    let (a, b) = (Points::new(x1), Points::new(x2));
    let inv = 1.0 / (spec.sigma * spec.sigma);
    Ok(DenseMatrix::from_fn(x1.rows(), x2.rows(), |i, j| rbf_entry(&a, i, &b, j, inv)))
}

/// Read access to the entries of a (possibly implicit) matrix.
pub trait EntrySource {
    fn shape(&self) -> (usize, usize);
    /// `M[rows, cols]`.
    fn block(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix;
    /// The whole matrix.
    fn full(&self) -> DenseMatrix {
        let (m, n) = self.shape();
        self.block(&(0..m).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>())
    }
}

impl EntrySource for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        DenseMatrix::shape(self)
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        self.submatrix(rows, cols)
    }

    fn full(&self) -> DenseMatrix {
        self.clone()
    }
}

/// Kernel matrix `K_ij = κ(x_i, y_j)` between two point sets, evaluated on
/// demand. Every evaluated entry is counted; the counter is atomic so views
/// can be shared across threads.
#[derive(Debug)]
pub struct KernelView {
    rows: Points,
    /// `None` when the column points are the row points.
    cols: Option<Points>,
    shape: (usize, usize),
    spec: KernelSpec,
    evaluated: AtomicU64,
}

impl KernelView {
    /// The symmetric `n x n` kernel of the rows of `x`.
    pub fn new(x: &DenseMatrix, spec: KernelSpec) -> Self {
        Self {
            rows: Points::new(x),
            cols: None,
            shape: (x.rows(), x.rows()),
            spec,
            evaluated: AtomicU64::new(0),
        }
    }

    /// The `m x n` kernel between the rows of `x_rows` and of `x_cols`.
    pub fn cross(x_rows: &DenseMatrix, x_cols: &DenseMatrix, spec: KernelSpec) -> Result<Self> {
        if x_rows.cols() != x_cols.cols() {
            return Err(Error::dim(
                "KernelView::cross",
                format!("points have {} and {} coordinates", x_rows.cols(), x_cols.cols()),
            ));
        }
        Ok(Self {
            rows: Points::new(x_rows),
            cols: Some(Points::new(x_cols)),
            shape: (x_rows.rows(), x_cols.rows()),
            spec,
            evaluated: AtomicU64::new(0),
        })
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.evaluated.fetch_add(1, Ordering::Relaxed);
        self.raw(i, j)
    }

    fn raw(&self, i: usize, j: usize) -> f64 {
        let inv = 1.0 / (self.spec.sigma * self.spec.sigma);
        rbf_entry(&self.rows, i, self.cols.as_ref().unwrap_or(&self.rows), j, inv)
    }

    /// Entries evaluated so far.
    pub fn entries_evaluated(&self) -> u64 {
        self.evaluated.load(Ordering::Relaxed)
    }

    pub fn reset_counter(&self) {
        self.evaluated.store(0, Ordering::Relaxed);
    }
}

impl EntrySource for KernelView {
    fn shape(&self) -> (usize, usize) {
        self.shape
    }

    fn block(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        self.evaluated
            .fetch_add((rows.len() * cols.len()) as u64, Ordering::Relaxed);
        DenseMatrix::from_fn(rows.len(), cols.len(), |i, j| self.raw(rows[i], cols[j]))
    }
}
