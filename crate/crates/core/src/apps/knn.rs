use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// Majority vote among the `k` nearest training rows (Euclidean distance);
/// ties go to the smallest label.
pub fn knn_classify(
    test: &DenseMatrix,
    train: &DenseMatrix,
    train_labels: &[usize],
    k: usize,
) -> Result<Vec<usize>> {
    let n = train.rows();
    if n == 0 {
        return Err(Error::param("knn_classify", "training set is empty"));
    }
    if train_labels.len() != n || test.cols() != train.cols() {
        return Err(Error::dim(
            "knn_classify",
            format!(
                "train is {n}x{} with {} labels, test has {} columns",
                train.cols(),
                train_labels.len(),
                test.cols()
            ),
        ));
    }
    if k == 0 || k > n {
        return Err(Error::param("knn_classify", format!("k = {k} with {n} training points")));
    }
    let classes = train_labels.iter().max().map_or(0, |m| m + 1);
    let train_rows: Vec<Vec<f64>> = (0..n).map(|i| train.row(i)).collect();
    let mut out = Vec::with_capacity(test.rows());
    for i in 0..test.rows() {
        let q = test.row(i);
        let mut dist: Vec<(f64, usize)> = train_rows
            .iter()
            .enumerate()
            .map(|(j, p)| (q.iter().zip(p).map(|(a, b)| (a - b).powi(2)).sum(), j))
            .collect();
        dist.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = vec![0usize; classes];
        for &(_, j) in &dist[..k] {
            votes[train_labels[j]] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        out.push(votes.iter().position(|&v| v == top).expect("maximum is present"));
    }
    Ok(out)
}
