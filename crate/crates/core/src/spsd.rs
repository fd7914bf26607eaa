//! Low-rank approximation of symmetric positive semidefinite matrices as
//! `Q Z Qᵀ`, the Nyström method, and regularized solves against the results.

use crate::error::{Error, Result, Warning};
use crate::kernel::EntrySource;
use crate::linalg::{
    condensed_svd, default_rank_tolerance, pinv_with_rank, solve, solve_spd, symmetric_eigen, thin_qr,
};
use crate::matrix::{dot, DenseMatrix};
use crate::rng::{derive_seed, rng};
use crate::sketch::selection::{sample_by_scores, uniform_indices};
use crate::sketch::{SketchKind, SketchSpec};

/// `K ≈ Q Z Qᵀ` with `Q` orthonormal and `Z` symmetric.
#[derive(Clone, Debug)]
pub struct SpsdSketch {
    pub q: DenseMatrix,
    pub z: DenseMatrix,
    /// How the columns behind `Q` were chosen.
    pub sampler: SketchKind,
    /// Selected columns, for sampling sketches.
    pub columns: Option<Vec<usize>>,
    /// Rows and columns of `K` used to fit `Z`, when `Z` was fitted on a
    /// subset.
    pub fit_indices: Option<Vec<usize>>,
    pub warnings: Vec<Warning>,
}

impl SpsdSketch {
    pub fn reconstruct(&self) -> DenseMatrix {
        &(&self.q * &self.z) * &self.q.transpose()
    }

    /// `‖K − Q Z Qᵀ‖_F`.
    pub fn error_fro(&self, k: &DenseMatrix) -> f64 {
        (k - &self.reconstruct()).frobenius_norm()
    }
}

/// The core minimizing `‖K − Q Z Qᵀ‖_F` for orthonormal `Q`: `QᵀKQ`.
pub fn optimal_core(k: &DenseMatrix, q: &DenseMatrix) -> DenseMatrix {
    q.tr_mul(&(k * q)).symmetrize()
}

fn check_square(k: &impl EntrySource, op: &'static str) -> Result<usize> {
    let (m, n) = k.shape();
    if m != n {
        return Err(Error::dim(op, format!("{m}x{n} is not square")));
    }
    Ok(n)
}

/// Sketches `C = KS`, orthonormalizes it and fits `Z = QᵀKQ`. Reads all of
/// `K`.
pub fn spsd_prototype(k: &impl EntrySource, spec: &SketchSpec) -> Result<SpsdSketch> {
    let n = check_square(k, "spsd_prototype")?;
    if spec.output_size() > n {
        return Err(Error::param(
            "spsd_prototype",
            format!("sketch size {} exceeds n = {n}", spec.output_size()),
        ));
    }
    let full = k.full();
    let sketch = spec.apply(&full)?;
    let q = thin_qr(&sketch.matrix)?.q;
    let z = optimal_core(&full, &q);
    Ok(SpsdSketch {
        q,
        z,
        sampler: spec.kind,
        columns: sketch.selection.map(|s| s.indices),
        fit_indices: None,
        warnings: Vec::new(),
    })
}

/// Rows used to fit the core in [`spsd_faster_with`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoreRows {
    /// `p` draws with replacement by the row leverage of `Q`, merged with
    /// the selected columns.
    Leverage(usize),
    /// Every row; the core is then the optimal one.
    All,
}

/// Faster SPSD sketching with `p` leverage-sampled rows.
pub fn spsd_faster(k: &impl EntrySource, s: usize, p: usize, seed: u64) -> Result<SpsdSketch> {
    spsd_faster_with(k, s, CoreRows::Leverage(p), seed)
}

/// Selects `s` columns uniformly, orthonormalizes `C = K[:, S]` and fits
/// `Z = (Q[P,:])† K[P,P] (Q[P,:])†ᵀ` on a row subset `P ⊇ S`. Reads
/// `n·s + |P|²` entries of `K`.
pub fn spsd_faster_with(k: &impl EntrySource, s: usize, rows: CoreRows, seed: u64) -> Result<SpsdSketch> {
    let n = check_square(k, "spsd_faster")?;
    if let CoreRows::Leverage(p) = rows {
        if s > p || p > n {
            return Err(Error::param(
                "spsd_faster",
                format!("need s <= p <= n, got s = {s}, p = {p}, n = {n}"),
            ));
        }
    }
    let cols = uniform_indices(n, s, derive_seed(seed, 1))?;
    let all: Vec<usize> = (0..n).collect();
    let c = k.block(&all, &cols);
    let q = thin_qr(&c)?.q;

    let fit = match rows {
        CoreRows::All => all,
        CoreRows::Leverage(p) => {
            let scores: Vec<f64> = (0..n).map(|i| q.row(i).iter().map(|v| v * v).sum()).collect();
            let mut fit = sample_by_scores(&scores, p, &mut rng(derive_seed(seed, 2)))?;
            fit.extend_from_slice(&cols);
            fit.sort_unstable();
            fit.dedup();
            fit
        }
    };

    let qp = q.select_rows(&fit);
    let (qp_pinv, rank) = pinv_with_rank(&qp, default_rank_tolerance(qp.rows(), qp.cols()));
    let mut warnings = Vec::new();
    if rank < s {
        warnings.push(Warning::RankDeficient {
            context: "spsd_faster: sampled rows of Q",
            rank,
            expected: s,
        });
    }
    let kpp = k.block(&fit, &fit);
    let z = (&(&qp_pinv * &kpp) * &qp_pinv.transpose()).symmetrize();
    Ok(SpsdSketch {
        q,
        z,
        sampler: SketchKind::UniformColumns,
        columns: Some(cols),
        fit_indices: Some(fit),
        warnings,
    })
}

/// `K ≈ L Lᵀ`.
#[derive(Clone, Debug)]
pub struct NystromFactor {
    /// `n x k`.
    pub l: DenseMatrix,
    pub columns: Vec<usize>,
    /// Eigenvalues of `W` that were kept, descending.
    pub eigenvalues: Vec<f64>,
    pub warnings: Vec<Warning>,
}

impl NystromFactor {
    pub fn rank(&self) -> usize {
        self.l.cols()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        &self.l * &self.l.transpose()
    }
}

/// Rank used by [`nystrom`] when none is given: `⌈0.8 s⌉`.
pub fn default_nystrom_rank(s: usize) -> usize {
    (4 * s).div_ceil(5)
}

/// Nyström approximation from `s` uniformly selected columns.
///
/// With `C = K[:, S]` and `W = K[S, S] = U Λ Uᵀ`, returns
/// `L = C U_k Λ_k^{-1/2}`. Eigenvalues at or below `ε · λ_max · n` are
/// dropped, which can lower the rank below `k`.
pub fn nystrom(k: &impl EntrySource, s: usize, rank: Option<usize>, seed: u64) -> Result<NystromFactor> {
    let n = check_square(k, "nystrom")?;
    let rank = rank.unwrap_or_else(|| default_nystrom_rank(s));
    if rank == 0 || rank > s || s > n {
        return Err(Error::param(
            "nystrom",
            format!("need 1 <= k <= s <= n, got k = {rank}, s = {s}, n = {n}"),
        ));
    }
    let cols = uniform_indices(n, s, derive_seed(seed, 1))?;
    let all: Vec<usize> = (0..n).collect();
    let c = k.block(&all, &cols);
    let w = c.select_rows(&cols).symmetrize();
    let (vals, vecs) = symmetric_eigen(&w)?;
    let lmax = vals.first().copied().unwrap_or(0.0);
    let floor = f64::EPSILON * lmax * n as f64;
    let kept = if lmax > 0.0 {
        vals.iter().take(rank).take_while(|&&v| v > floor).count()
    } else {
        0
    };
    if kept == 0 {
        return Err(Error::degenerate(
            "nystrom",
            "no eigenvalue of the selected block is positive",
        ));
    }
    let mut warnings = Vec::new();
    if kept < rank {
        warnings.push(Warning::RankReduced {
            requested: rank,
            retained: kept,
        });
    }
    let inv_sqrt: Vec<f64> = vals[..kept].iter().map(|v| 1.0 / v.sqrt()).collect();
    let l = &c * &vecs.leading_columns(kept).scale_columns(&inv_sqrt);
    Ok(NystromFactor {
        l,
        columns: cols,
        eigenvalues: vals[..kept].to_vec(),
        warnings,
    })
}

fn check_alpha(alpha: f64, op: &'static str) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param(op, format!("alpha = {alpha} must be positive")));
    }
    Ok(())
}

/// `(L Lᵀ + αI)⁻¹ y` through the `l x l` system `αI + LᵀL`.
pub fn smw_solve(l: &DenseMatrix, alpha: f64, y: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha, "smw_solve")?;
    if y.len() != l.rows() {
        return Err(Error::dim(
            "smw_solve",
            format!("L has {} rows, y has {}", l.rows(), y.len()),
        ));
    }
    let inner = l.tr_mul(l).shift_diagonal(alpha);
    let lty = DenseMatrix::column_vector(&l.tr_mul_vec(y));
    let t = solve_spd(&inner, &lty)?;
    let lt = l.mul_vec(t.column(0));
    Ok(y.iter().zip(&lt).map(|(yi, v)| (yi - v) / alpha).collect())
}

/// `(Q Z Qᵀ + αI)⁻¹ y` for symmetric, possibly indefinite `Z`, as
/// `α⁻¹ (y − Q Z (αI + QᵀQ Z)⁻¹ Qᵀ y)`.
pub fn shifted_smw_solve(q: &DenseMatrix, z: &DenseMatrix, alpha: f64, y: &[f64]) -> Result<Vec<f64>> {
    check_alpha(alpha, "shifted_smw_solve")?;
    let s = q.cols();
    if z.shape() != (s, s) || y.len() != q.rows() {
        return Err(Error::dim(
            "shifted_smw_solve",
            format!("Q is {}x{s}, Z is {:?}, y has {}", q.rows(), z.shape(), y.len()),
        ));
    }
    let inner = (&q.tr_mul(q) * z).shift_diagonal(alpha);
    let qty = DenseMatrix::column_vector(&q.tr_mul_vec(y));
    let t = solve(&inner, &qty)?;
    let v = q.mul_vec(&z.mul_vec(t.column(0)));
    let out: Vec<f64> = y.iter().zip(&v).map(|(yi, vi)| (yi - vi) / alpha).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::singular("shifted_smw_solve", "inner system is singular"));
    }
    Ok(out)
}

/// Top `k` eigenpairs of `L Lᵀ` from the SVD of `L`.
pub fn approx_eig(l: &DenseMatrix, k: usize) -> Result<(DenseMatrix, Vec<f64>)> {
    if k == 0 || k > l.cols() {
        return Err(Error::param(
            "approx_eig",
            format!("k = {k} outside 1..={}", l.cols()),
        ));
    }
    let svd = condensed_svd(l)?;
    if k > svd.rank() {
        return Err(Error::param(
            "approx_eig",
            format!("k = {k} exceeds rank(L) = {}", svd.rank()),
        ));
    }
    let lambdas = svd.singular_values[..k].iter().map(|s| s * s).collect();
    Ok((svd.u.leading_columns(k), lambdas))
}

/// `‖(K + αI) w − y‖₂`, the residual of a regularized solve.
pub fn regularized_residual(k: &DenseMatrix, alpha: f64, w: &[f64], y: &[f64]) -> f64 {
    let kw = k.mul_vec(w);
    let r: Vec<f64> = kw.iter().zip(w).zip(y).map(|((a, wi), yi)| a + alpha * wi - yi).collect();
    dot(&r, &r).sqrt()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use super::*;
    use crate::kernel::{rbf_kernel, KernelSpec, KernelView};
    use crate::linalg::{orthonormality_defect, solve as dense_solve};
    use crate::synth::{gaussian_matrix, low_rank, uniform_points};

    fn dense_inverse_apply(m: &DenseMatrix, y: &[f64]) -> Vec<f64> {
        dense_solve(m, &DenseMatrix::column_vector(y)).unwrap().column(0).to_vec()
    }

    fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        dot(&d, &d).sqrt() / dot(b, b).sqrt()
    }

    fn shifted(k: &DenseMatrix, alpha: f64) -> DenseMatrix {
        k.clone().shift_diagonal(alpha)
    }

    fn gram(n: usize, r: usize, seed: u64) -> DenseMatrix {
        let f = gaussian_matrix(n, r, seed);
        &f * &f.transpose()
    }

    #[test]
    fn prototype_recovers_low_rank() {
        let k = gram(60, 5, 1);
        let sk = spsd_prototype(&k, &SketchSpec::count_sketch(12, 3)).unwrap();
        assert!(sk.error_fro(&k) <= 1e-8 * k.frobenius_norm());
        assert!(orthonormality_defect(&sk.q) < 1e-10);
        assert!((&sk.z - &sk.z.transpose()).frobenius_norm() <= 1e-10 * sk.z.frobenius_norm());
    }

    #[test]
    fn prototype_error_is_at_least_optimal_tail() {
        let x = uniform_points(80, 3, 0.0, 1.0, 2);
        let k = rbf_kernel(&x, &x, 0.2).unwrap();
        let sk = spsd_prototype(&k, &SketchSpec::count_sketch(10, 4)).unwrap();
        let ratio = sk.error_fro(&k).powi(2) / crate::linalg::tail_energy(&k, 10);
        assert!(ratio.is_finite() && ratio >= 1.0 - 1e-10);
    }

    #[test]
    fn full_rows_give_the_optimal_core() {
        let x = uniform_points(50, 2, 0.0, 1.0, 3);
        let k = rbf_kernel(&x, &x, 0.3).unwrap();
        let sk = spsd_faster_with(&k, 8, CoreRows::All, 5).unwrap();
        let best = optimal_core(&k, &sk.q);
        assert!((&sk.z - &best).frobenius_norm() <= 1e-10 * best.frobenius_norm());
    }

    #[test]
    fn faster_counts_entries_and_contains_selection() {
        let x = uniform_points(120, 3, 0.0, 1.0, 4);
        let view = KernelView::new(&x, KernelSpec::rbf(0.5).unwrap());
        let (s, p) = (10, 40);
        let sk = spsd_faster(&view, s, p, 9).unwrap();
        let fit = sk.fit_indices.as_ref().unwrap();
        assert!(sk.columns.as_ref().unwrap().iter().all(|c| fit.contains(c)));
        let used = view.entries_evaluated();
        assert_eq!(used, (120 * s + fit.len() * fit.len()) as u64);
        assert!(fit.len() <= p + s);
        let z = &sk.z;
        assert!((z - &z.transpose()).frobenius_norm() <= 1e-10 * z.frobenius_norm());
    }

    #[test]
    fn faster_validates_sizes() {
        let k = gram(20, 3, 1);
        assert!(spsd_faster(&k, 5, 4, 1).is_err());
        assert!(spsd_faster(&k, 5, 21, 1).is_err());
        assert!(spsd_faster(&DenseMatrix::zeros(3, 4), 1, 2, 1).is_err());
    }

    #[test]
    fn nystrom_recovers_low_rank_kernel() {
        let k = gram(100, 4, 7);
        let f = nystrom(&k, 10, Some(8), 2).unwrap();
        assert!((&f.reconstruct() - &k).frobenius_norm() <= 1e-6 * k.frobenius_norm());
        assert_eq!(f.rank(), 4);
        assert!(matches!(f.warnings[0], Warning::RankReduced { retained: 4, .. }));
    }

    #[test]
    fn nystrom_matches_selected_block() {
        let x = uniform_points(60, 2, 0.0, 1.0, 8);
        let k = rbf_kernel(&x, &x, 0.1).unwrap();
        let f = nystrom(&k, 6, Some(6), 3).unwrap();
        let approx = f.reconstruct().submatrix(&f.columns, &f.columns);
        let w = k.submatrix(&f.columns, &f.columns);
        assert!((&approx - &w).frobenius_norm() <= 1e-8 * w.frobenius_norm());
    }

    #[test]
    fn nystrom_defaults_and_errors() {
        assert_eq!(default_nystrom_rank(10), 8);
        assert_eq!(default_nystrom_rank(11), 9);
        let k = DenseMatrix::zeros(10, 10);
        assert!(matches!(nystrom(&k, 4, None, 1), Err(Error::Degenerate { .. })));
        assert!(nystrom(&gram(10, 2, 1), 4, Some(5), 1).is_err());
    }

    #[test]
    fn smw_matches_dense_inverse() {
        let l = gaussian_matrix(200, 20, 3);
        let y = gaussian_matrix(200, 1, 4).column(0).to_vec();
        let llt = &l * &l.transpose();
        for alpha in [1e-2, 0.1, 1.0, 1e2] {
            let w = smw_solve(&l, alpha, &y).unwrap();
            let oracle = dense_inverse_apply(&shifted(&llt, alpha), &y);
            assert!(rel_diff(&w, &oracle) < 1e-8, "alpha = {alpha}");
        }
    }

    #[test]
    fn smw_limits() {
        let y = vec![1.0, -2.0, 3.0];
        let w = smw_solve(&DenseMatrix::zeros(3, 2), 4.0, &y).unwrap();
        assert_eq!(w, vec![0.25, -0.5, 0.75]);
        let l = gaussian_matrix(3, 2, 1).scale(0.5);
        let w = smw_solve(&l, 1e8, &y).unwrap();
        let base: Vec<f64> = y.iter().map(|v| v / 1e8).collect();
        assert!(rel_diff(&w, &base) <= 1e-6);
        assert!(smw_solve(&l, 0.0, &y).is_err());
    }

    #[test]
    fn shifted_smw_with_identity_core_is_smw() {
        let q = crate::synth::orthonormal(40, 5, 2);
        let y = gaussian_matrix(40, 1, 3).column(0).to_vec();
        let a = shifted_smw_solve(&q, &DenseMatrix::identity(5), 0.3, &y).unwrap();
        let b = smw_solve(&q, 0.3, &y).unwrap();
        assert!(rel_diff(&a, &b) < 1e-12);
    }

    #[test]
    fn shifted_smw_handles_indefinite_core() {
        let q = gaussian_matrix(30, 4, 5);
        let z = DenseMatrix::from_diagonal(&[3.0, 1.0, 0.5, -0.2]);
        let y = gaussian_matrix(30, 1, 6).column(0).to_vec();
        let m = &(&q * &z) * &q.transpose();
        let alpha = 50.0;
        let w = shifted_smw_solve(&q, &z, alpha, &y).unwrap();
        let oracle = dense_inverse_apply(&shifted(&m, alpha), &y);
        assert!(rel_diff(&w, &oracle) < 1e-8);
        assert!(regularized_residual(&m, alpha, &w, &y) < 1e-8 * dot(&y, &y).sqrt());
    }

    #[test]
    fn approx_eig_matches_dense() {
        let l = gaussian_matrix(100, 10, 9);
        let (u, lambdas) = approx_eig(&l, 6).unwrap();
        let (vals, _) = symmetric_eigen(&(&l * &l.transpose())).unwrap();
        for (a, b) in lambdas.iter().zip(&vals) {
            assert!((a - b).abs() <= 1e-8 * vals[0]);
        }
        assert!(lambdas.windows(2).all(|w| w[0] >= w[1]));
        let llt = &l * &l.transpose();
        let lu = &llt * &u;
        let ul = u.scale_columns(&lambdas);
        assert!((&lu - &ul).frobenius_norm() <= 1e-8 * vals[0]);
    }

    #[test]
    fn approx_eig_of_orthonormal_is_one() {
        let q = crate::synth::orthonormal(20, 4, 1);
        let (_, l) = approx_eig(&q, 4).unwrap();
        assert!(l.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(approx_eig(&low_rank(10, 4, 2, 1), 3).is_err());
    }

    proptest! {
        #[test]
        fn smw_inverts_the_regularized_gram(n in 2usize..30, l in 1usize..6, log_alpha in -3.0f64..3.0, seed in 0u64..1000) {
            let l = gaussian_matrix(n, l, seed);
            let alpha = 10f64.powf(log_alpha);
            let y = gaussian_matrix(n, 1, seed + 1).column(0).to_vec();
            let w = smw_solve(&l, alpha, &y).unwrap();
            let llt = &l * &l.transpose();
            prop_assert!(regularized_residual(&llt, alpha, &w, &y) <= 1e-8 * dot(&y, &y).sqrt() * (1.0 + 1.0 / alpha));
        }
    }
}
