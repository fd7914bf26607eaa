//! End-to-end runs through the public API on small fixtures.

use randnla::apps::{cluster_accuracy, gpr_predict, gpr_train, knn_classify, kpca_test, kpca_train};
use randnla::cur::{cur_faster, cur_faster_kernel, CurOptions};
use randnla::kernel::{rbf_kernel, KernelSpec, KernelView};
use randnla::ksvd::{faster_ksvd, prototype_ksvd, FasterKsvdSizes, PassCounter};
use randnla::linalg::{tail_energy, truncated_svd};
use randnla::regression::{lsr_exact, lsr_preconditioned, lsr_sketched, PreconditionOptions};
use randnla::spsd::{nystrom, spsd_faster};
use randnla::synth::{blobs, gaussian_matrix, ill_conditioned, low_rank, power_law};
use randnla::{DenseMatrix, SketchSpec};

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

#[test]
fn sketched_and_preconditioned_least_squares() {
    let a = ill_conditioned(1500, 8, 1e4, 1);
    let x0 = gaussian_matrix(8, 1, 2).column(0).to_vec();
    let noise = gaussian_matrix(1500, 1, 3);
    let b: Vec<f64> = a.mul_vec(&x0).iter().zip(noise.column(0)).map(|(v, e)| v + 1e-3 * e).collect();
    let exact = lsr_exact(&a, &b).unwrap();

    let sketched = lsr_sketched(&a, &b, &SketchSpec::count_sketch(400, 4)).unwrap();
    assert!(sketched.objective / exact.objective <= 1.5);

    let opts = PreconditionOptions::new(1500, 8, 1e-10, 5);
    let pre = lsr_preconditioned(&a, &b, &opts).unwrap();
    assert!(rel_vec(&pre.x, &exact.x) < 1e-8);
}

#[test]
fn randomized_svds_are_near_optimal() {
    let a = power_law(150, 120, 1.0, 4);
    let best = tail_energy(&a, 5);
    let proto = prototype_ksvd(&a, 5, &SketchSpec::gaussian(30, 1)).unwrap().with_error(&a);
    assert_eq!(proto.passes_over_a, 2);
    assert!(proto.error_fro.unwrap().powi(2) / best < 1.5);

    let sizes = FasterKsvdSizes { s: 20, p: 60, p_cs: 120 };
    let fast = faster_ksvd(&a, 5, sizes, 2).unwrap().with_error(&a);
    assert_eq!(fast.passes_over_a, 2);
    assert!(fast.error_fro.unwrap().powi(2) / best < 2.5);
}

#[test]
fn pass_counter_counts_sweeps() {
    let a = low_rank(20, 10, 2, 1);
    let counter = PassCounter::new(&a);
    let _ = counter.sweep(|m| m.frobenius_norm());
    let _ = counter.sweep(|m| m.max_abs());
    assert_eq!(counter.passes(), 2);
}

#[test]
fn kernel_approximations_touch_few_entries() {
    let x = gaussian_matrix(300, 4, 5);
    let k = rbf_kernel(&x, &x, 2.0).unwrap();
    let view = KernelView::new(&x, KernelSpec::rbf(2.0).unwrap());
    let sk = spsd_faster(&view, 15, 60, 3).unwrap();
    assert!(view.entries_evaluated() < 300 * 300 / 3);
    let fit = sk.fit_indices.as_ref().unwrap().len();
    assert_eq!(view.entries_evaluated(), (300 * 15 + fit * fit) as u64);

    let ny = nystrom(&k, 15, None, 3).unwrap();
    let e_fast = sk.error_fro(&k);
    let e_ny = (&k - &ny.reconstruct()).frobenius_norm();
    let best = truncated_svd(&k, 15).unwrap().reconstruct();
    let e_best = (&k - &best).frobenius_norm();
    assert!(e_best <= e_fast && e_best <= e_ny);
}

#[test]
fn lazy_kernel_cur_equals_materialized_cur() {
    let x_test = gaussian_matrix(80, 3, 1);
    let x_train = gaussian_matrix(90, 3, 2);
    let k = rbf_kernel(&x_test, &x_train, 1.0).unwrap();
    for seed in 0..5 {
        let lazy = cur_faster_kernel(&x_test, &x_train, 1.0, 6, 5, CurOptions::default(), seed).unwrap();
        let dense = cur_faster(&k, 6, 5, CurOptions::default(), seed).unwrap();
        assert_eq!(lazy.reconstruct(), dense.reconstruct());
        assert!(lazy.entries_visited < 80 * 90);
    }
}

#[test]
fn kernel_pca_features_classify_blobs() {
    let centers = vec![vec![0.0, 0.0], vec![4.0, 0.0], vec![0.0, 4.0]];
    let (train, labels) = blobs(&centers, 60, 0.7, 1);
    let (test, truth) = blobs(&centers, 20, 0.7, 2);
    let model = kpca_train(&train, 2.0, 3, None, 3).unwrap();
    let features = kpca_test(&train, &test, 2.0, &model, false, 4).unwrap();
    let predicted = knn_classify(&features, &model.train_features, &labels, 5).unwrap();
    assert!(cluster_accuracy(&predicted, &truth).unwrap() >= 0.95);
}

#[test]
fn gaussian_process_cur_predictions_track_direct_ones() {
    let x = gaussian_matrix(250, 2, 7);
    let y: Vec<f64> = (0..250).map(|i| x.get(i, 0).sin() + 0.3 * x.get(i, 1)).collect();
    let model = gpr_train(&x, &y, 1.0, 1e-2, None, 1).unwrap();
    let t = gaussian_matrix(120, 2, 8);
    let direct = gpr_predict(&x, &t, 1.0, &model.w, false, 2).unwrap();
    let cur = gpr_predict(&x, &t, 1.0, &model.w, true, 2).unwrap();
    assert!(rel_vec(&cur, &direct) < 0.1);
    let _ = DenseMatrix::column_vector(&cur);
}
