//! Rank-k SVD: block Lanczos with full reorthogonalization, and the two
//! pass-efficient randomized algorithms (sketch-then-project, and the faster
//! variant that also sketches the projection problem).

use std::cell::Cell;

use crate::error::{Error, Result, Warning};
use crate::linalg::{condensed_svd, default_rank_tolerance, pinv_with_rank, raw_svd, thin_qr, SvdFactors};
use crate::matrix::DenseMatrix;
use crate::rng::derive_seed;
use crate::sketch::{count_sketch, count_sketch_rows, gaussian_sketch, SketchSpec};
use crate::synth::gaussian_matrix;

#[derive(Clone, Debug)]
pub struct KsvdResult {
    pub factors: SvdFactors,
    /// Full sweeps over the input matrix.
    pub passes_over_a: usize,
    /// `‖A − UΣVᵀ‖_F`, filled by [`KsvdResult::with_error`].
    pub error_fro: Option<f64>,
    pub warnings: Vec<Warning>,
}

impl KsvdResult {
    pub fn with_error(mut self, a: &DenseMatrix) -> Self {
        self.error_fro = Some((a - &self.factors.reconstruct()).frobenius_norm());
        self
    }
}

/// Read-only view of `A` that counts full sweeps over its entries.
pub struct PassCounter<'a> {
    a: &'a DenseMatrix,
    passes: Cell<usize>,
}

impl<'a> PassCounter<'a> {
    pub fn new(a: &'a DenseMatrix) -> Self {
        Self {
            a,
            passes: Cell::new(0),
        }
    }

    pub fn passes(&self) -> usize {
        self.passes.get()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    /// Runs `f` with the underlying matrix; one pass.
    pub fn sweep<T>(&self, f: impl FnOnce(&DenseMatrix) -> T) -> T {
        self.passes.set(self.passes.get() + 1);
        f(self.a)
    }
}

/// Block Lanczos rank-`k` SVD with `q` Krylov blocks of width `min(2k, m, n)`.
///
/// Every block is orthogonalized against all earlier ones (twice) and
/// narrowed if it has lost rank; a narrowed block is reported as a warning.
pub fn block_lanczos_ksvd(a: &DenseMatrix, k: usize, q: usize, seed: u64) -> Result<KsvdResult> {
    let (m, n) = a.shape();
    if k == 0 || k > m.min(n) {
        return Err(Error::param("block_lanczos_ksvd", format!("k = {k} outside 1..={}", m.min(n))));
    }
    if q == 0 {
        return Err(Error::param("block_lanczos_ksvd", "q must be at least 1"));
    }
    let s = (2 * k).min(m.min(n));
    let view = PassCounter::new(a);
    let mut warnings = Vec::new();
    let mut basis = DenseMatrix::zeros(m, 0);

    let first = view.sweep(|a| a * &gaussian_matrix(n, s, seed));
    let mut block = extend_basis(&mut basis, &first, 0, &mut warnings);
    for i in 1..q {
        if block.cols() == 0 || basis.cols() >= m.min(n) {
            break;
        }
        let next = view.sweep(|a| a.tr_mul(&block));
        let next = view.sweep(|a| a * &next);
        block = extend_basis(&mut basis, &next, i, &mut warnings);
    }
    if basis.cols() == 0 {
        return Err(Error::ZeroRank);
    }

    let proj = view.sweep(|a| basis.tr_mul(a));
    let small = condensed_svd(&proj)?;
    let kk = k.min(small.rank());
    if kk < k {
        warnings.push(Warning::RankReduced {
            requested: k,
            retained: kk,
        });
    }
    let t = small.truncate(kk);
    Ok(KsvdResult {
        factors: SvdFactors {
            u: &basis * &t.u,
            singular_values: t.singular_values,
            v: t.v,
        },
        passes_over_a: view.passes(),
        error_fro: None,
        warnings,
    })
}

/// Orthogonalizes `raw` against `basis`, appends the surviving directions
/// and returns them as the next block.
fn extend_basis(basis: &mut DenseMatrix, raw: &DenseMatrix, index: usize, warnings: &mut Vec<Warning>) -> DenseMatrix {
    let scale = raw.frobenius_norm();
    let mut w = raw.clone();
    for _ in 0..2 {
        if basis.cols() > 0 {
            w = &w - &(&*basis * &basis.tr_mul(&w));
        }
    }
    let (u, sv, _) = raw_svd(w.inner());
    let tol = default_rank_tolerance(raw.rows(), raw.cols()) * scale;
    let keep = sv.iter().take_while(|&&x| x > tol).count();
    if keep < raw.cols() {
        warnings.push(Warning::KrylovCollapse {
            block: index,
            width: keep,
        });
    }
    let block = DenseMatrix::from_inner(u.columns(0, keep).into_owned());
    *basis = DenseMatrix::hstack(&[&*basis, &block]).expect("same row count");
    block
}

/// Two-pass randomized rank-`k` SVD: `C = AS`, `Q_C` from QR, then the
/// rank-`k` SVD of `Q_CᵀA` lifted back by `Q_C`.
pub fn prototype_ksvd(a: &DenseMatrix, k: usize, spec: &SketchSpec) -> Result<KsvdResult> {
    let (m, n) = a.shape();
    let s = spec.output_size();
    if k == 0 || s < k || s > m.min(n) {
        return Err(Error::param(
            "prototype_ksvd",
            format!("need 1 <= k <= s <= min(m, n); got k = {k}, s = {s}, {m}x{n}"),
        ));
    }
    let view = PassCounter::new(a);
    let c = view.sweep(|a| spec.apply(a))?.matrix;
    if c.cols() < k {
        return Err(Error::param(
            "prototype_ksvd",
            format!("sketch kept {} columns, fewer than k = {k}", c.cols()),
        ));
    }
    let q = thin_qr(&c)?.q;
    let proj = view.sweep(|a| q.tr_mul(a));
    let mut warnings = Vec::new();
    let small = top_k(&proj, k, &mut warnings)?;
    Ok(KsvdResult {
        factors: SvdFactors {
            u: &q * &small.u,
            singular_values: small.singular_values,
            v: small.v,
        },
        passes_over_a: view.passes(),
        error_fro: None,
        warnings,
    })
}

fn top_k(b: &DenseMatrix, k: usize, warnings: &mut Vec<Warning>) -> Result<SvdFactors> {
    let full = condensed_svd(b)?;
    let kk = k.min(full.rank());
    if kk < k {
        warnings.push(Warning::RankReduced {
            requested: k,
            retained: kk,
        });
    }
    Ok(full.truncate(kk))
}

/// Sizes for [`faster_ksvd`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FasterKsvdSizes {
    /// Column sketch width.
    pub s: usize,
    /// Count-sketch rows of the second sketch.
    pub p_cs: usize,
    /// Final rows of the second sketch.
    pub p: usize,
}

impl FasterKsvdSizes {
    /// `s = 4k`, `p = 4s`, `p_cs = 4p`.
    pub fn for_rank(k: usize) -> Self {
        Self {
            s: 4 * k,
            p: 16 * k,
            p_cs: 64 * k,
        }
    }
}

/// Two-pass rank-`k` SVD that also sketches the projection step.
///
/// `C = AS` (count sketch), then `D = PᵀC` and `L = PᵀA` with `P` a count
/// sketch to `p_cs` rows followed by a Gaussian projection to `p`. The
/// rank-`k` problem `min ‖DX − L‖` is solved through `Q_D R_D = D`, and the
/// factors are recovered from `C R_D† Ū Σ̄`.
pub fn faster_ksvd(a: &DenseMatrix, k: usize, sizes: FasterKsvdSizes, seed: u64) -> Result<KsvdResult> {
    let (m, n) = a.shape();
    let FasterKsvdSizes { s, p_cs, p } = sizes;
    if !(k >= 1 && k < s && s < p && p < p_cs && p_cs <= m && s <= n) {
        return Err(Error::param(
            "faster_ksvd",
            format!("need k < s < p < p_cs <= m and s <= n; got k = {k}, s = {s}, p = {p}, p_cs = {p_cs}, {m}x{n}"),
        ));
    }
    let view = PassCounter::new(a);
    let c = view.sweep(|a| count_sketch(a, s, derive_seed(seed, 1)))?;

    // Both row sketches use one operator draw: same hash, same Gaussian.
    let cs_seed = derive_seed(seed, 2);
    let g_seed = derive_seed(seed, 3);
    let second = |x: &DenseMatrix| -> Result<DenseMatrix> {
        let y = count_sketch_rows(x, p_cs, cs_seed)?;
        Ok(gaussian_sketch(&y.transpose(), p, g_seed)?.transpose())
    };
    let l = view.sweep(|a| second(a))?;
    let d = second(&c)?;

    let mut warnings = Vec::new();
    let qr = thin_qr(&d)?;
    let (rd_pinv, rank) = pinv_with_rank(&qr.r, default_rank_tolerance(s, s));
    if rank < s {
        warnings.push(Warning::RankDeficient {
            context: "sketched R_D",
            rank,
            expected: s,
        });
    }
    let bar = top_k(&qr.q.tr_mul(&l), k, &mut warnings)?;
    let lifted = &(&c * &rd_pinv) * &bar.u.scale_columns(&bar.singular_values);
    let fin = condensed_svd(&lifted)?;
    let kk = fin.rank().min(bar.singular_values.len());
    let fin = fin.truncate(kk);
    Ok(KsvdResult {
        factors: SvdFactors {
            u: fin.u,
            singular_values: fin.singular_values,
            v: &bar.v * &fin.v,
        },
        passes_over_a: view.passes(),
        error_fro: None,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormality_defect, singular_values, tail_energy};
    use crate::synth::{low_rank, power_law};

    #[test]
    fn lanczos_on_small_diagonal() {
        let a = DenseMatrix::from_diagonal(&[5.0, 3.0, 1.0]);
        let r = block_lanczos_ksvd(&a, 2, 5, 1).unwrap();
        let sv = &r.factors.singular_values;
        assert!((sv[0] - 5.0).abs() < 1e-8 && (sv[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn lanczos_never_overshoots() {
        let a = gaussian_matrix(40, 30, 3);
        let truth = singular_values(&a);
        for q in 1..4 {
            let r = block_lanczos_ksvd(&a, 5, q, 2).unwrap();
            for (est, t) in r.factors.singular_values.iter().zip(&truth) {
                assert!(*est <= t + 1e-8);
            }
            assert!(r.factors.singular_values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn lanczos_recovers_exact_rank() {
        let a = low_rank(30, 25, 4, 1);
        let r = block_lanczos_ksvd(&a, 4, 1, 9).unwrap().with_error(&a);
        assert!(r.error_fro.unwrap() < 1e-8 * a.frobenius_norm());
    }

    #[test]
    fn lanczos_pass_count() {
        let a = gaussian_matrix(50, 40, 1);
        let r = block_lanczos_ksvd(&a, 3, 4, 1).unwrap();
        assert_eq!(r.passes_over_a, 1 + 2 * 3 + 1);
    }

    #[test]
    fn prototype_exact_rank_and_orthonormality() {
        let a = low_rank(60, 50, 5, 2);
        let r = prototype_ksvd(&a, 5, &SketchSpec::gaussian(13, 3)).unwrap().with_error(&a);
        assert!(r.error_fro.unwrap() <= 1e-8 * a.frobenius_norm());
        assert!(orthonormality_defect(&r.factors.u) < 1e-8);
        assert!(orthonormality_defect(&r.factors.v) < 1e-8);
        assert_eq!(r.passes_over_a, 2);
    }

    #[test]
    fn prototype_is_never_better_than_optimal() {
        let a = power_law(50, 40, 1.0, 4);
        let best = tail_energy(&a, 4);
        for seed in 0..5 {
            let r = prototype_ksvd(&a, 4, &SketchSpec::count_sketch(10, seed)).unwrap().with_error(&a);
            assert!(r.error_fro.unwrap().powi(2) >= best * (1.0 - 1e-10));
        }
        assert!(prototype_ksvd(&a, 4, &SketchSpec::gaussian(3, 1)).is_err());
    }

    #[test]
    fn faster_two_passes_and_orthonormal() {
        let a = power_law(200, 150, 1.0, 5);
        let sizes = FasterKsvdSizes { s: 20, p: 60, p_cs: 120 };
        let r = faster_ksvd(&a, 5, sizes, 7).unwrap();
        assert_eq!(r.passes_over_a, 2);
        assert!(orthonormality_defect(&r.factors.u) < 1e-8);
        assert!(orthonormality_defect(&r.factors.v) < 1e-8);
        assert_eq!(r.factors.singular_values.len(), 5);
    }

    #[test]
    fn faster_parameter_order_is_enforced() {
        let a = gaussian_matrix(100, 100, 1);
        let bad = FasterKsvdSizes { s: 20, p: 15, p_cs: 60 };
        assert!(faster_ksvd(&a, 5, bad, 1).is_err());
        let bad = FasterKsvdSizes { s: 20, p: 40, p_cs: 101 };
        assert!(faster_ksvd(&a, 5, bad, 1).is_err());
    }

    #[test]
    fn faster_recovers_exact_rank() {
        let a = low_rank(200, 150, 4, 3);
        let sizes = FasterKsvdSizes { s: 12, p: 40, p_cs: 120 };
        let r = faster_ksvd(&a, 4, sizes, 2).unwrap().with_error(&a);
        assert!(r.error_fro.unwrap() < 1e-6 * a.frobenius_norm());
    }
}
