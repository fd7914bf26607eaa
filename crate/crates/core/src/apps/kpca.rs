use crate::cur::{cur_faster_kernel, CurOptions};
use crate::error::{Error, Result, Warning};
use crate::kernel::{rbf_kernel, KernelSpec, KernelView};
use crate::linalg::symmetric_eigen;
use crate::matrix::DenseMatrix;
use crate::spsd::spsd_faster;

use super::cur_sample_size;

#[derive(Clone, Debug)]
pub struct KpcaModel {
    /// `n x k`, orthonormal columns.
    pub u: DenseMatrix,
    /// Positive and nonincreasing.
    pub lambdas: Vec<f64>,
    /// `U diag(√λ)`, one row per training point.
    pub train_features: DenseMatrix,
    pub warnings: Vec<Warning>,
}

impl KpcaModel {
    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }
}

/// Approximate kernel PCA: a faster SPSD sketch `Q Z Qᵀ` of the training
/// kernel (`s` columns, `10k` by default) and the top `k` eigenpairs of `Z`.
pub fn kpca_train(x_train: &DenseMatrix, sigma: f64, k: usize, s: Option<usize>, seed: u64) -> Result<KpcaModel> {
    let n = x_train.rows();
    let s = s.unwrap_or(10 * k).min(n);
    if k == 0 || k > s {
        return Err(Error::param("kpca_train", format!("need 1 <= k <= s, got k = {k}, s = {s}")));
    }
    let view = KernelView::new(x_train, KernelSpec::rbf(sigma)?);
    let sketch = spsd_faster(&view, s, (4 * s).min(n), seed)?;
    let (vals, vecs) = symmetric_eigen(&sketch.z)?;
    let positive = vals.iter().take(k).take_while(|&&v| v > 0.0).count();
    if positive < k {
        return Err(Error::degenerate(
            "kpca_train",
            format!("only {positive} of {k} leading eigenvalues are positive"),
        ));
    }
    let lambdas = vals[..k].to_vec();
    let u = &sketch.q * &vecs.leading_columns(k);
    let roots: Vec<f64> = lambdas.iter().map(|l| l.sqrt()).collect();
    let train_features = u.scale_columns(&roots);
    Ok(KpcaModel {
        u,
        lambdas,
        train_features,
        warnings: sketch.warnings,
    })
}

/// Features `K⋆ U Λ^{-1/2}` of test points, with `K⋆` the test-by-train
/// kernel. With `use_cur` the kernel is replaced by a faster CUR
/// decomposition and never formed.
pub fn kpca_test(
    x_train: &DenseMatrix,
    x_test: &DenseMatrix,
    sigma: f64,
    model: &KpcaModel,
    use_cur: bool,
    seed: u64,
) -> Result<DenseMatrix> {
    if model.u.rows() != x_train.rows() {
        return Err(Error::dim(
            "kpca_test",
            format!("model has {} training rows, data has {}", model.u.rows(), x_train.rows()),
        ));
    }
    let inv_roots: Vec<f64> = model.lambdas.iter().map(|l| 1.0 / l.sqrt()).collect();
    let proj = model.u.scale_columns(&inv_roots);
    if use_cur {
        let c = cur_sample_size(x_train.rows());
        let r = cur_sample_size(x_test.rows());
        let f = cur_faster_kernel(x_test, x_train, sigma, c, r, CurOptions::default(), seed)?;
        Ok(&f.c * &(&f.u * &(&f.r * &proj)))
    } else {
        Ok(&rbf_kernel(x_test, x_train, sigma)? * &proj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{orthonormality_defect, truncated_svd};
    use crate::synth::gaussian_matrix;

    fn data() -> DenseMatrix {
        gaussian_matrix(200, 3, 1)
    }

    #[test]
    fn features_have_orthogonal_scores() {
        let x = data();
        let m = kpca_train(&x, 1.5, 5, None, 2).unwrap();
        assert_eq!(m.train_features.shape(), (200, 5));
        assert!(orthonormality_defect(&m.u) < 1e-8);
        let g = m.train_features.tr_mul(&m.train_features);
        let d = DenseMatrix::from_diagonal(&m.lambdas);
        assert!((&g - &d).frobenius_norm() <= 1e-8 * m.lambdas[0]);
        assert!(m.lambdas.windows(2).all(|w| w[0] >= w[1]));
        let again = m.u.scale_columns(&m.lambdas.iter().map(|l| l.sqrt()).collect::<Vec<_>>());
        assert!((&again - &m.train_features).frobenius_norm() <= 1e-10);
    }

    #[test]
    fn features_approximate_the_top_eigenspace() {
        let x = data();
        let k = rbf_kernel(&x, &x, 1.5).unwrap();
        let m = kpca_train(&x, 1.5, 5, None, 3).unwrap();
        let approx = &m.train_features * &m.train_features.transpose();
        let exact = truncated_svd(&k, 5).unwrap().reconstruct();
        let rel = (&approx - &exact).frobenius_norm() / exact.frobenius_norm();
        assert!(rel < 0.05, "relative error {rel}");
    }

    #[test]
    fn test_features_on_training_points_match() {
        let x = data();
        let m = kpca_train(&x, 1.5, 4, None, 4).unwrap();
        let f = kpca_test(&x, &x, 1.5, &m, false, 1).unwrap();
        assert_eq!(f.shape(), (200, 4));
        let rel = (&f - &m.train_features).frobenius_norm() / m.train_features.frobenius_norm();
        assert!(rel < 0.05, "relative error {rel}");
    }

    #[test]
    fn rejects_bad_rank_and_mismatched_model() {
        let x = data();
        assert!(kpca_train(&x, 1.0, 0, None, 1).is_err());
        assert!(kpca_train(&x, 1.0, 5, Some(4), 1).is_err());
        let m = kpca_train(&x, 1.0, 2, None, 1).unwrap();
        assert!(kpca_test(&gaussian_matrix(10, 3, 1), &x, 1.0, &m, false, 1).is_err());
    }
}
