//! Lloyd's k-means over the rows of a matrix, shared by landmark column
//! selection and the clustering applications.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::{derive_seed, rng, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Init {
    /// `k` distinct points chosen uniformly, kept in input order.
    RandomSubset,
    /// k-means++ seeding (D² weighting).
    PlusPlus,
}

#[derive(Clone, Debug)]
pub struct KMeansOutcome {
    pub labels: Vec<usize>,
    /// `k x d`, one centroid per row.
    pub centroids: DenseMatrix,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations: usize,
}

/// Best of `replicates` Lloyd runs, each from its own derived seed.
pub fn kmeans(
    points: &DenseMatrix,
    k: usize,
    max_iters: usize,
    replicates: usize,
    init: Init,
    seed: u64,
) -> Result<KMeansOutcome> {
    let n = points.rows();
    if k == 0 || k > n {
        return Err(Error::param("kmeans", format!("k = {k} with {n} points")));
    }
    let data = RowMajor::new(points);
    let mut best: Option<KMeansOutcome> = None;
    for rep in 0..replicates.max(1) {
        let mut r = rng(derive_seed(seed, rep as u64));
        let out = lloyd(&data, k, max_iters, init, &mut r);
        if best.as_ref().is_none_or(|b| out.inertia < b.inertia) {
            best = Some(out);
        }
    }
    Ok(best.expect("at least one replicate"))
}

struct RowMajor {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl RowMajor {
    fn new(m: &DenseMatrix) -> Self {
        Self {
            n: m.rows(),
            d: m.cols(),
            data: m.to_row_major(),
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn initial_centroids(data: &RowMajor, k: usize, init: Init, r: &mut Rng) -> Vec<f64> {
    let mut chosen: Vec<usize> = match init {
        Init::RandomSubset => {
            let mut idx = index::sample(r, data.n, k).into_vec();
            idx.sort_unstable();
            idx
        }
        Init::PlusPlus => {
            let mut idx = vec![r.random_range(0..data.n)];
            let mut d2: Vec<f64> = (0..data.n)
                .map(|i| sq_dist(data.row(i), data.row(idx[0])))
                .collect();
            while idx.len() < k {
                let total: f64 = d2.iter().sum();
                let next = if total > 0.0 {
                    let mut target = r.random::<f64>() * total;
                    let mut pick = data.n - 1;
                    for (i, &w) in d2.iter().enumerate() {
                        if target < w {
                            pick = i;
                            break;
                        }
                        target -= w;
                    }
                    pick
                } else {
                    r.random_range(0..data.n)
                };
                idx.push(next);
                for (i, di) in d2.iter_mut().enumerate() {
                    *di = di.min(sq_dist(data.row(i), data.row(next)));
                }
            }
            idx
        }
    };
    chosen.truncate(k);
    chosen.iter().flat_map(|&i| data.row(i).to_vec()).collect()
}

fn lloyd(data: &RowMajor, k: usize, max_iters: usize, init: Init, r: &mut Rng) -> KMeansOutcome {
    let (n, d) = (data.n, data.d);
    let mut centroids = initial_centroids(data, k, init, r);
    let mut labels = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut iterations = 0;

    for _ in 0..max_iters.max(1) {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let p = data.row(i);
            let (best, bd) = (0..k)
                .map(|c| (c, sq_dist(p, &centroids[c * d..(c + 1) * d])))
                .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
            dist[i] = bd;
        }

        let mut counts = vec![0usize; k];
        for &l in &labels {
            counts[l] += 1;
        }
        // Empty clusters take over the point farthest from its centroid.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&i, &j| dist[i].total_cmp(&dist[j]));
            if let Some(i) = far {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                dist[i] = 0.0;
                changed = true;
            }
        }

        let mut sums = vec![0.0; k * d];
        for (i, &l) in labels.iter().enumerate() {
            for (s, x) in sums[l * d..(l + 1) * d].iter_mut().zip(data.row(i)) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                for t in 0..d {
                    centroids[c * d + t] = sums[c * d + t] / counts[c] as f64;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let inertia = (0..n)
        .map(|i| sq_dist(data.row(i), &centroids[labels[i] * d..(labels[i] + 1) * d]))
        .sum();
    KMeansOutcome {
        labels,
        centroids: DenseMatrix::from_row_major(k, d, centroids).expect("finite centroids"),
        inertia,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_is_the_mean() {
        let p = DenseMatrix::from_rows(&[[0.0, 0.0], [2.0, 0.0], [1.0, 3.0]]).unwrap();
        let out = kmeans(&p, 1, 10, 1, Init::PlusPlus, 1).unwrap();
        assert!((out.centroids.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((out.centroids.get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn k_equals_n_gives_every_point_its_own_centroid() {
        let p = DenseMatrix::from_rows(&[[0.0], [5.0], [9.0], [-3.0]]).unwrap();
        let out = kmeans(&p, 4, 10, 1, Init::RandomSubset, 4).unwrap();
        assert_eq!(out.inertia, 0.0);
        let mut labels = out.labels.clone();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn empty_clusters_are_repaired() {
        // Duplicate points force an empty cluster when both seeds coincide.
        let p = DenseMatrix::from_rows(&[[1.0], [1.0], [1.0], [8.0]]).unwrap();
        for seed in 0..20 {
            let out = kmeans(&p, 2, 20, 1, Init::RandomSubset, seed).unwrap();
            assert_eq!(out.inertia, 0.0, "seed {seed}");
        }
    }

    #[test]
    fn rejects_bad_k() {
        let p = DenseMatrix::zeros(3, 2);
        assert!(kmeans(&p, 0, 5, 1, Init::PlusPlus, 0).is_err());
        assert!(kmeans(&p, 4, 5, 1, Init::PlusPlus, 0).is_err());
    }
}
