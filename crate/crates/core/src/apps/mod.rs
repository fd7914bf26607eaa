//! Kernel methods on top of the sketches: kernel PCA, spectral clustering
//! and Gaussian process regression, plus k-means and k-NN helpers.

mod cluster;
mod gpr;
mod knn;
mod kpca;

pub use cluster::{spectral_cluster, spectral_cluster_factor, spectral_embedding, ClusterMethod, SpectralClustering};
pub use gpr::{gpr_predict, gpr_train, GprModel, DEFAULT_GPR_COLUMNS};
pub use knn::knn_classify;
pub use kpca::{kpca_test, kpca_train, KpcaModel};

use crate::error::{Error, Result};
use crate::kmeans::{kmeans as lloyd_kmeans, Init};
use crate::matrix::DenseMatrix;

#[derive(Clone, Debug, PartialEq)]
pub enum Labels {
    Class(Vec<usize>),
    Real(Vec<f64>),
}

impl Labels {
    pub fn len(&self) -> usize {
        match self {
            Labels::Class(v) => v.len(),
            Labels::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Points (one per row) with optional labels.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub points: DenseMatrix,
    pub labels: Option<Labels>,
}

impl Dataset {
    pub fn new(points: DenseMatrix, labels: Option<Labels>) -> Result<Self> {
        if let Some(l) = &labels {
            if l.len() != points.rows() {
                return Err(Error::dim(
                    "Dataset",
                    format!("{} labels for {} points", l.len(), points.rows()),
                ));
            }
        }
        Ok(Self { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }
}

/// Columns (or rows) sampled by the CUR-based test stages for a side of
/// length `n`: `max(100, ⌈n / 20⌉)`, capped at `n`.
pub(crate) fn cur_sample_size(n: usize) -> usize {
    100.max(n.div_ceil(20)).min(n)
}

/// k-means with k-means++ seeding; returns labels and the `k x d`
/// centroids of the best replicate.
pub fn kmeans(
    points: &DenseMatrix,
    k: usize,
    iters: usize,
    replicates: usize,
    seed: u64,
) -> Result<(Vec<usize>, DenseMatrix)> {
    let out = lloyd_kmeans(points, k, iters, replicates, Init::PlusPlus, seed)?;
    Ok((out.labels, out.centroids))
}

/// Largest assignment size handled by [`cluster_accuracy`].
const MAX_MATCHED_CLUSTERS: usize = 16;

/// Fraction of points whose predicted cluster maps to their true cluster
/// under the best one-to-one relabeling.
pub fn cluster_accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() || predicted.is_empty() {
        return Err(Error::dim(
            "cluster_accuracy",
            format!("{} predictions for {} labels", predicted.len(), truth.len()),
        ));
    }
    let k = predicted.iter().chain(truth).max().map_or(0, |m| m + 1);
    if k > MAX_MATCHED_CLUSTERS {
        return Err(Error::param(
            "cluster_accuracy",
            format!("{k} clusters exceed the supported {MAX_MATCHED_CLUSTERS}"),
        ));
    }
    let mut confusion = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        confusion[p][t] += 1;
    }
    // best[mask]: largest agreement assigning the first popcount(mask)
    // predicted clusters to the true clusters in `mask`.
    let mut best = vec![0usize; 1 << k];
    for mask in 0usize..(1 << k) {
        let p = mask.count_ones() as usize;
        if p >= k {
            continue;
        }
        for (t, &hits) in confusion[p].iter().enumerate() {
            if mask & (1 << t) == 0 {
                let next = mask | (1 << t);
                best[next] = best[next].max(best[mask] + hits);
            }
        }
    }
    Ok(best[(1 << k) - 1] as f64 / predicted.len() as f64)
}
