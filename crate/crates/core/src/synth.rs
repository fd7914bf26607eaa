//! Synthetic inputs with controlled structure: prescribed spectra, exact low
//! rank, planted clusters. Used by the tests, the acceptance suite and the
//! command-line `verify`/`bench` paths.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::linalg::thin_qr;
use crate::matrix::DenseMatrix;
use crate::rng::{derive_seed, rng};

/// I.i.d. standard normal entries.
pub fn gaussian_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut r = rng(seed);
    let data: Vec<f64> = (0..rows * cols).map(|_| r.sample(StandardNormal)).collect();
    DenseMatrix::from_column_major(rows, cols, data).expect("finite gaussian samples")
}

/// Random `rows x cols` matrix with orthonormal columns (`cols ≤ rows`).
pub fn orthonormal(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    assert!(cols <= rows, "orthonormal: need cols <= rows");
    thin_qr(&gaussian_matrix(rows, cols, seed))
        .expect("tall gaussian matrix")
        .q
}

/// `U diag(spectrum) Vᵀ` with Haar-like random singular vectors.
pub fn with_spectrum(rows: usize, cols: usize, spectrum: &[f64], seed: u64) -> DenseMatrix {
    let p = spectrum.len();
    assert!(p <= rows.min(cols), "with_spectrum: too many singular values");
    let u = orthonormal(rows, p, derive_seed(seed, 1));
    let v = orthonormal(cols, p, derive_seed(seed, 2));
    &u.scale_columns(spectrum) * &v.transpose()
}

/// Singular values `σ_i = i^(-exponent)`, `i = 1..=min(rows, cols)`.
pub fn power_law(rows: usize, cols: usize, exponent: f64, seed: u64) -> DenseMatrix {
    let p = rows.min(cols);
    let spectrum: Vec<f64> = (1..=p).map(|i| (i as f64).powf(-exponent)).collect();
    with_spectrum(rows, cols, &spectrum, seed)
}

/// Tall matrix whose singular values are log-spaced from 1 down to `1/kappa`.
pub fn ill_conditioned(rows: usize, cols: usize, kappa: f64, seed: u64) -> DenseMatrix {
    let spectrum: Vec<f64> = (0..cols)
        .map(|i| {
            let t = if cols > 1 { i as f64 / (cols - 1) as f64 } else { 0.0 };
            kappa.powf(-t)
        })
        .collect();
    with_spectrum(rows, cols, &spectrum, seed)
}

/// Exactly rank-`rank` product of two Gaussian factors.
pub fn low_rank(rows: usize, cols: usize, rank: usize, seed: u64) -> DenseMatrix {
    let left = gaussian_matrix(rows, rank, derive_seed(seed, 1));
    let right = gaussian_matrix(rank, cols, derive_seed(seed, 2));
    &left * &right
}

/// Isotropic Gaussian blobs: `centers.len()` clusters of `per_cluster` points
/// each with standard deviation `spread`. Returns points (rows) and labels.
pub fn blobs(
    centers: &[Vec<f64>],
    per_cluster: usize,
    spread: f64,
    seed: u64,
) -> (DenseMatrix, Vec<usize>) {
    let d = centers.first().map_or(0, |c| c.len());
    let mut r = rng(seed);
    let mut rows = Vec::with_capacity(centers.len() * per_cluster);
    let mut labels = Vec::with_capacity(rows.capacity());
    for (label, c) in centers.iter().enumerate() {
        for _ in 0..per_cluster {
            let p: Vec<f64> = (0..d)
                .map(|t| c[t] + spread * r.sample::<f64, _>(StandardNormal))
                .collect();
            rows.push(p);
            labels.push(label);
        }
    }
    (DenseMatrix::from_rows(&rows).expect("finite blob points"), labels)
}

/// Points drawn uniformly from `[lo, hi]^d`.
pub fn uniform_points(n: usize, d: usize, lo: f64, hi: f64, seed: u64) -> DenseMatrix {
    let mut r = rng(seed);
    DenseMatrix::from_fn(n, d, |_, _| r.random_range(lo..hi))
}
