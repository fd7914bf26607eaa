use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index;

use crate::error::{Error, Result};
use crate::kmeans::{kmeans, Init};
use crate::linalg::condensed_svd;
use crate::matrix::DenseMatrix;
use crate::rng::{rng, Rng};

/// Lloyd iterations used by landmark selection when none are given.
pub const DEFAULT_LANDMARK_ITERS: usize = 10;

/// Columns picked by a sampling sketch.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnSelection {
    /// Sorted, distinct column positions.
    pub indices: Vec<usize>,
    /// Per-column scale factors aligned with `indices`, when scaling is on.
    pub weights: Option<Vec<f64>>,
    /// Number of draws requested; `indices.len()` may be smaller after
    /// deduplication.
    pub requested: usize,
}

impl ColumnSelection {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `s` distinct columns chosen uniformly, returned in their original order.
pub fn uniform_sample_columns(
    a: &DenseMatrix,
    s: usize,
    seed: u64,
) -> Result<(DenseMatrix, ColumnSelection)> {
    let idx = uniform_indices(a.cols(), s, seed)?;
    let c = a.select_columns(&idx);
    Ok((
        c,
        ColumnSelection {
            indices: idx,
            weights: None,
            requested: s,
        },
    ))
}

pub(crate) fn uniform_indices(n: usize, s: usize, seed: u64) -> Result<Vec<usize>> {
    if s == 0 || s > n {
        return Err(Error::param(
            "uniform sampling",
            format!("cannot select {s} of {n} indices"),
        ));
    }
    let mut idx = index::sample(&mut rng(seed), n, s).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

/// Column leverage scores: squared row norms of the right singular vectors
/// of `A`, or of the top `k` of them when `k` is given.
pub fn leverage_scores(a: &DenseMatrix, k: Option<usize>) -> Result<Vec<f64>> {
    let svd = condensed_svd(a)?;
    let rank = svd.rank();
    let k = match k {
        None => rank,
        Some(k) if k >= 1 && k <= rank => k,
        Some(k) => {
            return Err(Error::param(
                "leverage_scores",
                format!("k = {k} but rank(A) = {rank}"),
            ))
        }
    };
    let v = &svd.v;
    Ok((0..a.cols())
        .map(|j| (0..k).map(|t| v.get(j, t).powi(2)).sum())
        .collect())
}

/// `draws` indices sampled with replacement with probability proportional
/// to `scores`, then sorted and deduplicated.
pub(crate) fn sample_by_scores(scores: &[f64], draws: usize, r: &mut Rng) -> Result<Vec<usize>> {
    let dist = WeightedIndex::new(scores).map_err(|e| {
        Error::degenerate("leverage sampling", format!("unusable sampling weights: {e}"))
    })?;
    let mut idx: Vec<usize> = (0..draws).map(|_| dist.sample(r)).collect();
    idx.sort_unstable();
    idx.dedup();
    Ok(idx)
}

/// Leverage-score sampling of `s` columns with replacement, deduplicated.
/// With `scale`, column `i` is multiplied by `sqrt(rho / (s l_i))`.
pub fn leverage_sample_columns(
    a: &DenseMatrix,
    s: usize,
    seed: u64,
    k: Option<usize>,
    scale: bool,
) -> Result<(DenseMatrix, ColumnSelection)> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::param(
            "leverage_sample_columns",
            format!("cannot select {s} of {n} columns"),
        ));
    }
    let scores = leverage_scores(a, k)?;
    let idx = sample_by_scores(&scores, s, &mut rng(seed))?;
    let mut c = a.select_columns(&idx);
    let weights = scale.then(|| {
        let rho: f64 = scores.iter().sum();
        let w: Vec<f64> = idx
            .iter()
            .map(|&i| (rho / (s as f64 * scores[i])).sqrt())
            .collect();
        c = c.scale_columns(&w);
        w
    });
    Ok((
        c,
        ColumnSelection {
            indices: idx,
            weights,
            requested: s,
        },
    ))
}

/// Landmark columns: centroids of `s` k-means clusters of the columns of
/// `A`, after at most `iters` Lloyd iterations from a seeded subset.
pub fn landmark_select(a: &DenseMatrix, s: usize, iters: usize, seed: u64) -> Result<DenseMatrix> {
    let n = a.cols();
    if s == 0 || s > n {
        return Err(Error::param(
            "landmark_select",
            format!("cannot form {s} landmarks from {n} columns"),
        ));
    }
    let out = kmeans(&a.transpose(), s, iters, 1, Init::RandomSubset, seed)?;
    Ok(out.centroids.transpose())
}
