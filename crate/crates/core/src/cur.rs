//! CUR decomposition `A ≈ C U R` from sampled columns and rows, with the
//! intersection matrix fitted on all of `A` or on a sampled block of it.

use crate::error::{Error, Result, Warning};
use crate::kernel::{EntrySource, KernelSpec, KernelView};
use crate::linalg::{condensed_svd, default_rank_tolerance, pinv, pinv_with_rank};
use crate::matrix::DenseMatrix;
use crate::regression::Sampler;
use crate::rng::{derive_seed, rng};
use crate::sketch::selection::{sample_by_scores, uniform_indices};

#[derive(Clone, Debug)]
pub struct CurFactors {
    /// `m x c`, verbatim columns `col_indices` of the source.
    pub c: DenseMatrix,
    /// `c x r`.
    pub u: DenseMatrix,
    /// `r x n`, verbatim rows `row_indices` of the source.
    pub r: DenseMatrix,
    pub col_indices: Vec<usize>,
    pub row_indices: Vec<usize>,
    /// Rows and columns of the block `U` was fitted on, when it was fitted
    /// on a block.
    pub fit_rows: Option<Vec<usize>>,
    pub fit_cols: Option<Vec<usize>>,
    /// Entries of the source read to build the factors.
    pub entries_visited: u64,
    pub warnings: Vec<Warning>,
}

impl CurFactors {
    pub fn reconstruct(&self) -> DenseMatrix {
        &(&self.c * &self.u) * &self.r
    }

    /// `‖A − C U R‖_F`.
    pub fn error_fro(&self, a: &DenseMatrix) -> f64 {
        (a - &self.reconstruct()).frobenius_norm()
    }

    /// `C (U (R x))`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply_counted(x)?.0)
    }

    /// [`CurFactors::apply`] together with the number of multiply-adds it
    /// took: `rn + cr + mc`.
    pub fn apply_counted(&self, x: &[f64]) -> Result<(Vec<f64>, u64)> {
        if x.len() != self.r.cols() {
            return Err(Error::dim(
                "CurFactors::apply",
                format!("R has {} columns, x has {}", self.r.cols(), x.len()),
            ));
        }
        let mut flops = 0u64;
        let mut step = |m: &DenseMatrix, v: &[f64]| {
            flops += (m.rows() * m.cols()) as u64;
            m.mul_vec(v)
        };
        let rx = step(&self.r, x);
        let urx = step(&self.u, &rx);
        let out = step(&self.c, &urx);
        Ok((out, flops))
    }
}

/// `C† A R†`, the intersection matrix minimizing `‖A − C U R‖_F`.
pub fn optimal_intersection(a: &DenseMatrix, c: &DenseMatrix, r: &DenseMatrix) -> DenseMatrix {
    &(&pinv(c) * a) * &pinv(r)
}

fn select(a: &impl EntrySource, c: usize, r: usize, seed: u64, op: &'static str) -> Result<(Vec<usize>, Vec<usize>)> {
    let (m, n) = a.shape();
    if c == 0 || c > n || r == 0 || r > m {
        return Err(Error::param(
            op,
            format!("need 1 <= c <= {n} and 1 <= r <= {m}, got c = {c}, r = {r}"),
        ));
    }
    Ok((
        uniform_indices(n, c, derive_seed(seed, 1))?,
        uniform_indices(m, r, derive_seed(seed, 2))?,
    ))
}

/// Uniformly selected columns and rows with the optimal intersection
/// matrix. Reads all of `A`.
pub fn cur_prototype(a: &impl EntrySource, c: usize, r: usize, seed: u64) -> Result<CurFactors> {
    let (cols, rows) = select(a, c, r, seed, "cur_prototype")?;
    let full = a.full();
    let cm = full.select_columns(&cols);
    let rm = full.select_rows(&rows);
    let u = optimal_intersection(&full, &cm, &rm);
    let (m, n) = full.shape();
    Ok(CurFactors {
        c: cm,
        u,
        r: rm,
        col_indices: cols,
        row_indices: rows,
        fit_rows: None,
        fit_cols: None,
        entries_visited: (m * n) as u64,
        warnings: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CurOptions {
    /// Rows of `A` sampled to fit `U`; defaults to `2(c + r)`.
    pub p_c: Option<usize>,
    /// Columns of `A` sampled to fit `U`; defaults to `2(c + r)`.
    pub p_r: Option<usize>,
    pub sampler: Sampler,
}

impl Default for CurOptions {
    fn default() -> Self {
        Self {
            p_c: None,
            p_r: None,
            sampler: Sampler::Uniform,
        }
    }
}

/// Secondary sample size used when none is given: `2(c + r)`.
pub fn default_secondary_size(c: usize, r: usize) -> usize {
    2 * (c + r)
}

/// Squared row norms of an orthonormal basis of the columns of `m`.
fn row_leverage(m: &DenseMatrix) -> Result<Vec<f64>> {
    let u = condensed_svd(m)?.u;
    Ok((0..u.rows()).map(|i| u.row(i).iter().map(|v| v * v).sum()).collect())
}

fn secondary(
    basis: &DenseMatrix,
    p: usize,
    must_include: &[usize],
    sampler: Sampler,
    seed: u64,
) -> Result<Vec<usize>> {
    let total = basis.rows();
    let mut idx = match sampler {
        Sampler::Uniform => uniform_indices(total, p.min(total), seed)?,
        Sampler::Leverage => sample_by_scores(&row_leverage(basis)?, p, &mut rng(seed))?,
    };
    idx.extend_from_slice(must_include);
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

/// CUR with the intersection matrix fitted on a sampled block:
/// `U = (C[P_C,:])† A[P_C,P_R] (R[:,P_R])†`. The sampled rows `P_C` include
/// the selected rows and the sampled columns `P_R` the selected columns.
/// Reads `mc + rn + |P_C||P_R|` entries of `A`.
pub fn cur_faster(a: &impl EntrySource, c: usize, r: usize, opts: CurOptions, seed: u64) -> Result<CurFactors> {
    let (m, n) = a.shape();
    let (cols, rows) = select(a, c, r, seed, "cur_faster")?;
    let p_c = opts.p_c.unwrap_or_else(|| default_secondary_size(c, r));
    let p_r = opts.p_r.unwrap_or_else(|| default_secondary_size(c, r));
    if p_c == 0 || p_r == 0 {
        return Err(Error::param("cur_faster", "secondary sample sizes must be positive"));
    }
    let all_rows: Vec<usize> = (0..m).collect();
    let all_cols: Vec<usize> = (0..n).collect();
    let cm = a.block(&all_rows, &cols);
    let rm = a.block(&rows, &all_cols);

    let fit_rows = secondary(&cm, p_c, &rows, opts.sampler, derive_seed(seed, 3))?;
    let rt = rm.transpose();
    let fit_cols = secondary(&rt, p_r, &cols, opts.sampler, derive_seed(seed, 4))?;

    let block = a.block(&fit_rows, &fit_cols);
    let cp = cm.select_rows(&fit_rows);
    let rp = rm.select_columns(&fit_cols);
    let (cp_pinv, rank_c) = pinv_with_rank(&cp, default_rank_tolerance(cp.rows(), cp.cols()));
    let (rp_pinv, rank_r) = pinv_with_rank(&rp, default_rank_tolerance(rp.rows(), rp.cols()));
    let mut warnings = Vec::new();
    if rank_c < c {
        warnings.push(Warning::RankDeficient {
            context: "cur_faster: sampled rows of C",
            rank: rank_c,
            expected: c,
        });
    }
    if rank_r < r {
        warnings.push(Warning::RankDeficient {
            context: "cur_faster: sampled columns of R",
            rank: rank_r,
            expected: r,
        });
    }
    let u = &(&cp_pinv * &block) * &rp_pinv;
    let visited = m * c + r * n + fit_rows.len() * fit_cols.len();
    Ok(CurFactors {
        c: cm,
        u,
        r: rm,
        col_indices: cols,
        row_indices: rows,
        fit_rows: Some(fit_rows),
        fit_cols: Some(fit_cols),
        entries_visited: visited as u64,
        warnings,
    })
}

/// Faster CUR of the RBF kernel `K_ij = κ(x_test_i, x_train_j)` without
/// forming it; `entries_visited` is the number of kernel evaluations.
pub fn cur_faster_kernel(
    x_test: &DenseMatrix,
    x_train: &DenseMatrix,
    sigma: f64,
    c: usize,
    r: usize,
    opts: CurOptions,
    seed: u64,
) -> Result<CurFactors> {
    let view = KernelView::cross(x_test, x_train, KernelSpec::rbf(sigma)?)?;
    let mut out = cur_faster(&view, c, r, opts, seed)?;
    out.entries_visited = view.entries_evaluated();
    Ok(out)
}
