use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, KernelView};
use crate::linalg::{condensed_svd, symmetric_eigen};
use crate::matrix::{norm2, DenseMatrix};
use crate::rng::derive_seed;
use crate::spsd::{nystrom, spsd_faster};

use super::kmeans;

/// How the kernel factor `K ≈ L Lᵀ` is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterMethod {
    /// Faster SPSD sketch, with `L = Q U_Z Λ_Z^{1/2}` over the positive
    /// eigenvalues of `Z`.
    Faster,
    Nystrom,
}

impl std::str::FromStr for ClusterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faster" => Ok(ClusterMethod::Faster),
            "nystrom" => Ok(ClusterMethod::Nystrom),
            other => Err(Error::param("cluster method", format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralClustering {
    pub labels: Vec<usize>,
    /// `n x k` embedding with unit-norm rows, the input to k-means.
    pub embedding: DenseMatrix,
}

const KMEANS_ITERS: usize = 100;
const KMEANS_REPLICATES: usize = 3;

/// Spectral clustering of the rows of `x` into `k` groups using an RBF
/// kernel approximated from `10k` sampled columns.
pub fn spectral_cluster(
    x: &DenseMatrix,
    sigma: f64,
    k: usize,
    method: ClusterMethod,
    seed: u64,
) -> Result<SpectralClustering> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(Error::param("spectral_cluster", format!("k = {k} with {n} points")));
    }
    let s = (10 * k).min(n);
    let view = KernelView::new(x, KernelSpec::rbf(sigma)?);
    let l = match method {
        ClusterMethod::Faster => {
            let sk = spsd_faster(&view, s, (4 * s).min(n), seed)?;
            let (vals, vecs) = symmetric_eigen(&sk.z)?;
            let keep = vals.iter().take_while(|&&v| v > 0.0).count();
            if keep == 0 {
                return Err(Error::degenerate("spectral_cluster", "sketched kernel has no positive part"));
            }
            let roots: Vec<f64> = vals[..keep].iter().map(|v| v.sqrt()).collect();
            &sk.q * &vecs.leading_columns(keep).scale_columns(&roots)
        }
        ClusterMethod::Nystrom => nystrom(&view, s, None, seed)?.l,
    };
    spectral_cluster_factor(&l, k, derive_seed(seed, 0xC1))
}

/// Unit-norm rows of the top `k` left singular vectors of `D^{-1/2} L`,
/// where `D = diag(L Lᵀ 1)` is the degree matrix of `L Lᵀ`.
pub fn spectral_embedding(l: &DenseMatrix, k: usize) -> Result<DenseMatrix> {
    let n = l.rows();
    let ones = vec![1.0; n];
    let degree = l.mul_vec(&l.tr_mul_vec(&ones));
    if let Some(i) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::degenerate(
            "spectral_embedding",
            format!("degree of point {i} is {} (not positive)", degree[i]),
        ));
    }
    let scale: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
    let svd = condensed_svd(&l.scale_rows(&scale))?;
    if svd.rank() < k {
        return Err(Error::degenerate(
            "spectral_embedding",
            format!("normalized factor has rank {} < k = {k}", svd.rank()),
        ));
    }
    let u = svd.u.leading_columns(k);
    let inv_norms: Vec<f64> = (0..n)
        .map(|i| {
            let r = norm2(&u.row(i));
            if r > 0.0 {
                1.0 / r
            } else {
                0.0
            }
        })
        .collect();
    Ok(u.scale_rows(&inv_norms))
}

/// Spectral clustering from a given kernel factor `K ≈ L Lᵀ`.
pub fn spectral_cluster_factor(l: &DenseMatrix, k: usize, seed: u64) -> Result<SpectralClustering> {
    let embedding = spectral_embedding(l, k)?;
    let (labels, _) = kmeans(&embedding, k, KMEANS_ITERS, KMEANS_REPLICATES, seed)?;
    Ok(SpectralClustering { labels, embedding })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::cluster_accuracy;
    use crate::kernel::rbf_kernel;
    use crate::synth::{blobs, gaussian_matrix};

    fn three_blobs(seed: u64) -> (DenseMatrix, Vec<usize>) {
        let centers = vec![vec![0.0, 0.0], vec![6.0, 0.0], vec![3.0, 5.0]];
        blobs(&centers, 100, 1.0, seed)
    }

    #[test]
    fn recovers_planted_blobs() {
        let (x, truth) = three_blobs(1);
        for method in [ClusterMethod::Faster, ClusterMethod::Nystrom] {
            let out = spectral_cluster(&x, 1.5, 3, method, 2).unwrap();
            assert!(cluster_accuracy(&out.labels, &truth).unwrap() >= 0.95, "{method:?}");
            for i in 0..x.rows() {
                assert!((norm2(&out.embedding.row(i)) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degrees_of_exact_factor_match_kernel_row_sums() {
        // A rank-3 Gram kernel, factored exactly.
        let f = gaussian_matrix(40, 3, 4).scale(0.1);
        let f = DenseMatrix::from_fn(40, 4, |i, j| if j == 3 { 1.0 } else { f.get(i, j) });
        let k = &f * &f.transpose();
        let ones = vec![1.0; 40];
        let from_factor = f.mul_vec(&f.tr_mul_vec(&ones));
        let direct = k.mul_vec(&ones);
        for (a, b) in from_factor.iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-12 * b.abs());
        }
        assert!(spectral_embedding(&f, 3).is_ok());
    }

    #[test]
    fn row_order_does_not_change_the_partition() {
        let (x, truth) = three_blobs(5);
        let k = rbf_kernel(&x, &x, 1.5).unwrap();
        let (vals, vecs) = symmetric_eigen(&k).unwrap();
        let keep = 20;
        let roots: Vec<f64> = vals[..keep].iter().map(|v| v.sqrt()).collect();
        let l = vecs.leading_columns(keep).scale_columns(&roots);
        let perm: Vec<usize> = (0..x.rows()).rev().collect();
        let a = spectral_cluster_factor(&l, 3, 7).unwrap();
        let b = spectral_cluster_factor(&l.select_rows(&perm), 3, 7).unwrap();
        let b_back: Vec<usize> = {
            let mut v = vec![0; perm.len()];
            for (pos, &orig) in perm.iter().enumerate() {
                v[orig] = b.labels[pos];
            }
            v
        };
        assert_eq!(cluster_accuracy(&a.labels, &b_back).unwrap(), 1.0);
        assert!(cluster_accuracy(&a.labels, &truth).unwrap() >= 0.95);
    }

    #[test]
    fn nonpositive_degree_is_an_error() {
        let l = DenseMatrix::from_rows(&[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(spectral_embedding(&l, 1), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn parses_methods() {
        assert_eq!("nystrom".parse::<ClusterMethod>().unwrap(), ClusterMethod::Nystrom);
        assert!("pca".parse::<ClusterMethod>().is_err());
    }
}
