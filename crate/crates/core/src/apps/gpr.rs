use crate::cur::{cur_faster_kernel, CurOptions};
use crate::error::{Error, Result, Warning};
use crate::kernel::{rbf_kernel, KernelSpec, KernelView};
use crate::matrix::DenseMatrix;
use crate::spsd::{nystrom, smw_solve};

use super::cur_sample_size;

/// Columns sampled by [`gpr_train`] when none is given.
pub const DEFAULT_GPR_COLUMNS: usize = 100;

#[derive(Clone, Debug)]
pub struct GprModel {
    /// `(L Lᵀ + αI)⁻¹ y`, one weight per training point.
    pub w: Vec<f64>,
    /// Rank of the Nyström factor `L`.
    pub rank: usize,
    pub warnings: Vec<Warning>,
}

/// Gaussian process regression weights with the kernel replaced by a
/// Nyström factor from `l` sampled columns (at most `n`).
pub fn gpr_train(
    x_train: &DenseMatrix,
    y: &[f64],
    sigma: f64,
    alpha: f64,
    l: Option<usize>,
    seed: u64,
) -> Result<GprModel> {
    let n = x_train.rows();
    if y.len() != n {
        return Err(Error::dim("gpr_train", format!("{} labels for {n} points", y.len())));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::param("gpr_train", format!("alpha = {alpha} must be positive")));
    }
    let l = l.unwrap_or(DEFAULT_GPR_COLUMNS).min(n);
    let view = KernelView::new(x_train, KernelSpec::rbf(sigma)?);
    let factor = nystrom(&view, l, None, seed)?;
    let w = smw_solve(&factor.l, alpha, y)?;
    Ok(GprModel {
        w,
        rank: factor.rank(),
        warnings: factor.warnings,
    })
}

/// Predictions `K⋆ w` at the test points; with `use_cur` the test-by-train
/// kernel is replaced by a faster CUR decomposition and never formed.
pub fn gpr_predict(
    x_train: &DenseMatrix,
    x_test: &DenseMatrix,
    sigma: f64,
    w: &[f64],
    use_cur: bool,
    seed: u64,
) -> Result<Vec<f64>> {
    if w.len() != x_train.rows() {
        return Err(Error::dim(
            "gpr_predict",
            format!("{} weights for {} training points", w.len(), x_train.rows()),
        ));
    }
    if use_cur {
        let c = cur_sample_size(x_train.rows());
        let r = cur_sample_size(x_test.rows());
        let f = cur_faster_kernel(x_test, x_train, sigma, c, r, CurOptions::default(), seed)?;
        f.apply(w)
    } else {
        Ok(rbf_kernel(x_test, x_train, sigma)?.mul_vec(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::solve;
    use crate::matrix::norm2;
    use crate::synth::uniform_points;

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm2(&d) / norm2(b)
    }

    fn smooth_target(x: &DenseMatrix) -> Vec<f64> {
        (0..x.rows()).map(|i| (2.0 * x.get(i, 0)).sin() + 0.5 * x.get(i, 1).cos()).collect()
    }

    #[test]
    fn heavy_regularization_gives_scaled_labels() {
        let x = uniform_points(50, 2, 0.0, 1.0, 1);
        let y = smooth_target(&x);
        let m = gpr_train(&x, &y, 0.5, 1e8, Some(10), 2).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| v / 1e8).collect();
        assert!(rel(&m.w, &scaled) < 1e-4);
        assert_eq!(m.w.len(), 50);
    }

    #[test]
    fn weights_approach_exact_solution() {
        let x = uniform_points(120, 2, 0.0, 3.0, 3);
        let y = smooth_target(&x);
        let alpha = 1e-2;
        let k = rbf_kernel(&x, &x, 1.0).unwrap().shift_diagonal(alpha);
        let exact = solve(&k, &DenseMatrix::column_vector(&y)).unwrap();
        let m = gpr_train(&x, &y, 1.0, alpha, Some(60), 4).unwrap();
        assert!(rel(&m.w, exact.column(0)) < 0.1);
    }

    #[test]
    fn training_predictions_fit_smooth_target() {
        let x = uniform_points(150, 2, 0.0, 3.0, 5);
        let y = smooth_target(&x);
        let m = gpr_train(&x, &y, 1.0, 1e-4, Some(60), 6).unwrap();
        let pred = gpr_predict(&x, &x, 1.0, &m.w, false, 1).unwrap();
        assert!(rel(&pred, &y) < 0.05);
    }

    #[test]
    fn prediction_is_linear_in_weights() {
        let x = uniform_points(30, 2, 0.0, 1.0, 7);
        let t = uniform_points(12, 2, 0.0, 1.0, 8);
        let w = smooth_target(&x);
        let w3: Vec<f64> = w.iter().map(|v| 3.0 * v).collect();
        let a = gpr_predict(&x, &t, 0.7, &w, false, 1).unwrap();
        let b = gpr_predict(&x, &t, 0.7, &w3, false, 1).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((3.0 * p - q).abs() <= 1e-12 * q.abs().max(1.0));
        }
        let direct = rbf_kernel(&t, &x, 0.7).unwrap().mul_vec(&w);
        assert_eq!(a, direct);
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = uniform_points(10, 2, 0.0, 1.0, 1);
        assert!(gpr_train(&x, &[1.0; 9], 1.0, 1.0, None, 1).is_err());
        assert!(gpr_train(&x, &[1.0; 10], 1.0, 0.0, None, 1).is_err());
        assert!(gpr_predict(&x, &x, 1.0, &[1.0; 3], false, 1).is_err());
    }
}
