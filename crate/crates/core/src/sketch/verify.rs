use rand::Rng as _;
use rand_distr::StandardNormal;

use super::SketchSpec;
use crate::error::{Error, Result};
use crate::linalg::{condensed_svd, tail_energy};
use crate::matrix::{norm2, DenseMatrix};
use crate::rng::{derive_seed, rng};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaEstimate {
    /// Largest distortion `max(r, 1/r)` seen over the probes; at least 1.
    pub gamma: f64,
    pub probes_used: usize,
    /// Probes with `yᵀA = 0`, which carry no information.
    pub probes_skipped: usize,
}

/// Empirical subspace-embedding factor of `spec` on the row space of `A`.
///
/// Each probe `y` is a random unit vector in `R^m`; the distortion is
/// `r = ‖yᵀAS‖² / ‖yᵀA‖²`.
pub fn estimate_gamma(a: &DenseMatrix, spec: &SketchSpec, trials: usize, seed: u64) -> Result<GammaEstimate> {
    let (m, n) = a.shape();
    if m > n {
        return Err(Error::dim("estimate_gamma", format!("expected m <= n, got {m}x{n}")));
    }
    if trials == 0 {
        return Err(Error::param("estimate_gamma", "at least one probe is required"));
    }
    let c = spec.apply(a)?.matrix;
    let scale = a.frobenius_norm();
    let mut r = rng(derive_seed(seed, 0x6A));
    let mut gamma: f64 = 1.0;
    let (mut used, mut skipped) = (0, 0);
    for _ in 0..trials {
        let mut y: Vec<f64> = (0..m).map(|_| r.sample(StandardNormal)).collect();
        let ny = norm2(&y);
        y.iter_mut().for_each(|v| *v /= ny);
        let ya = norm2(&a.tr_mul_vec(&y));
        if ya <= 1e-12 * scale {
            skipped += 1;
            continue;
        }
        let yc = norm2(&c.tr_mul_vec(&y));
        let ratio = (yc / ya).powi(2);
        gamma = gamma.max(ratio).max(1.0 / ratio);
        used += 1;
    }
    Ok(GammaEstimate {
        gamma,
        probes_used: used,
        probes_skipped: skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaEstimate {
    /// `‖A − C C† A‖_F² / ‖A − A_k‖_F²`.
    pub proj: f64,
    /// `min_{rank X ≤ k} ‖A − C X‖_F² / ‖A − A_k‖_F²`.
    pub best: f64,
}

/// Empirical low-rank approximation factors of the sketch `C` for `A`.
///
/// The rank-constrained optimum is `Q (QᵀA)_k` with `Q` an orthonormal basis
/// of `range(C)`.
pub fn estimate_eta(a: &DenseMatrix, c: &DenseMatrix, k: usize) -> Result<EtaEstimate> {
    if c.rows() != a.rows() {
        return Err(Error::dim(
            "estimate_eta",
            format!("sketch has {} rows, A has {}", c.rows(), a.rows()),
        ));
    }
    if k == 0 || k > c.cols() || k > a.rows().min(a.cols()) {
        return Err(Error::param("estimate_eta", format!("k = {k} out of range")));
    }
    let fro2 = a.frobenius_norm().powi(2);
    let tail = tail_energy(a, k);
    if tail <= 1e-20 * fro2 {
        return Err(Error::degenerate(
            "estimate_eta",
            format!("A has rank at most {k}; ‖A − A_k‖_F is zero"),
        ));
    }
    let q = match condensed_svd(c) {
        Ok(f) => f.u,
        Err(Error::ZeroRank) => {
            return Ok(EtaEstimate {
                proj: fro2 / tail,
                best: fro2 / tail,
            })
        }
        Err(e) => return Err(e),
    };
    let qta = q.tr_mul(a);
    let proj = (a - &(&q * &qta)).frobenius_norm().powi(2);
    let best_fit = match condensed_svd(&qta) {
        Ok(f) => {
            let kk = k.min(f.rank());
            &q * &f.truncate(kk).reconstruct()
        }
        Err(Error::ZeroRank) => DenseMatrix::zeros(a.rows(), a.cols()),
        Err(e) => return Err(e),
    };
    let best = (a - &best_fit).frobenius_norm().powi(2);
    Ok(EtaEstimate {
        proj: proj / tail,
        best: best / tail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::truncated_svd;
    use crate::sketch::SketchKind;
    use crate::synth::{gaussian_matrix, power_law};

    #[test]
    fn identity_selection_has_unit_gamma() {
        let a = gaussian_matrix(5, 40, 1);
        let spec = SketchSpec::new(SketchKind::UniformColumns, 40, 3);
        let g = estimate_gamma(&a, &spec, 50, 2).unwrap();
        assert!((g.gamma - 1.0).abs() < 1e-12);
        assert_eq!(g.probes_used, 50);
    }

    #[test]
    fn gamma_is_at_least_one() {
        let a = gaussian_matrix(4, 100, 1);
        for seed in 0..5 {
            let g = estimate_gamma(&a, &SketchSpec::gaussian(20, seed), 10, seed).unwrap();
            assert!(g.gamma >= 1.0);
        }
    }

    #[test]
    fn rank_deficient_probes_are_skipped() {
        // Every probe of a zero matrix is uninformative.
        let a = DenseMatrix::zeros(3, 20);
        let g = estimate_gamma(&a, &SketchSpec::gaussian(5, 1), 7, 1).unwrap();
        assert_eq!(g.probes_skipped, 7);
        assert_eq!(g.gamma, 1.0);
    }

    #[test]
    fn self_sketch_has_zero_projection_error() {
        let a = power_law(20, 15, 1.0, 4);
        let e = estimate_eta(&a, &a, 3).unwrap();
        assert!(e.proj < 1e-20);
        // The rank-k constraint leaves exactly the optimal tail.
        assert!((e.best - 1.0).abs() < 1e-10);
    }

    #[test]
    fn top_singular_vectors_are_optimal() {
        let a = power_law(20, 15, 1.0, 5);
        let uk = truncated_svd(&a, 4).unwrap().u;
        let e = estimate_eta(&a, &uk, 4).unwrap();
        assert!((e.proj - 1.0).abs() < 1e-10);
        assert!((e.best - 1.0).abs() < 1e-10);
    }

    #[test]
    fn projection_never_exceeds_best() {
        let a = power_law(30, 30, 0.5, 6);
        for seed in 0..10 {
            let c = crate::sketch::gaussian_sketch(&a, 8, seed).unwrap();
            let e = estimate_eta(&a, &c, 5).unwrap();
            assert!(e.proj <= e.best * (1.0 + 1e-12));
            assert!(e.best >= 1.0 - 1e-10);
        }
    }

    #[test]
    fn exact_low_rank_is_degenerate() {
        let a = crate::synth::low_rank(10, 10, 2, 1);
        assert!(matches!(estimate_eta(&a, &a, 2), Err(Error::Degenerate { .. })));
    }
}
