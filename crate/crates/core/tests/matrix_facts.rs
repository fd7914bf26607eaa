//! Matrix-algebra identities the sketching algorithms lean on, each checked
//! on 20 seeded random instances.

use randnla::linalg::{
    condensed_svd, orthonormality_defect, pinv, solve_spd, thin_qr, truncated_svd,
};
use randnla::regression::lsr_cg;
use randnla::sketch::leverage_scores;
use randnla::synth::{gaussian_matrix, low_rank, orthonormal};
use randnla::DenseMatrix;

const INSTANCES: u64 = 20;

fn rel(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm().max(f64::MIN_POSITIVE)
}

fn dims(seed: u64) -> (usize, usize, usize) {
    let m = 12 + (seed as usize * 7) % 20;
    let n = 4 + (seed as usize * 3) % 8;
    let p = 1 + (seed as usize) % n;
    (m, n, p)
}

#[test]
fn product_of_orthonormal_factors_is_orthonormal() {
    for seed in 0..INSTANCES {
        let (m, n, p) = dims(seed);
        let q1 = orthonormal(m, n, seed);
        let q2 = thin_qr(&gaussian_matrix(n, p, seed + 100)).unwrap().q;
        assert!(orthonormality_defect(&(&q1 * &q2)) < 1e-12, "seed {seed}");
    }
}

#[test]
fn projections_onto_the_column_space_agree() {
    for seed in 0..INSTANCES {
        let (m, n, _) = dims(seed);
        let rank = 1 + seed as usize % n;
        let a = low_rank(m, n, rank, seed);
        let b = gaussian_matrix(m, 3, seed + 200);
        let via_pinv = &(&a * &pinv(&a)) * &b;
        let ua = condensed_svd(&a).unwrap().u;
        assert_eq!(ua.cols(), rank);
        let via_basis = &ua * &ua.tr_mul(&b);
        // Least-squares minimizers found without forming a pseudo-inverse.
        let fitted: Vec<Vec<f64>> = (0..3)
            .map(|j| a.mul_vec(&lsr_cg(&a, b.column(j), 1e-14, 500).unwrap().x))
            .collect();
        let ax = DenseMatrix::from_fn(m, 3, |i, j| fitted[j][i]);
        let z = solve_spd(&ua.tr_mul(&ua), &ua.tr_mul(&b)).unwrap();
        let uz = &ua * &z;
        assert!(rel(&via_basis, &via_pinv) < 1e-10, "seed {seed}");
        assert!(rel(&ax, &via_pinv) < 1e-8, "seed {seed}");
        assert!(rel(&uz, &via_pinv) < 1e-10, "seed {seed}");
    }
}

#[test]
fn rank_constrained_fit_in_a_subspace_is_truncated_projection() {
    for seed in 0..INSTANCES {
        let (m, n, _) = dims(seed);
        let s = 2 + seed as usize % 3;
        let k = 1 + seed as usize % s;
        let a = gaussian_matrix(m, n, seed);
        let q = orthonormal(m, s, seed + 300);
        let qta = q.tr_mul(&a);
        let x_star = truncated_svd(&qta, k).unwrap().reconstruct();
        let best = (&a - &(&q * &x_star)).frobenius_norm();
        // Competing rank-k candidates: random, and the top-k part of A
        // pushed into the subspace.
        let ak = truncated_svd(&a, k).unwrap().reconstruct();
        let pushed = q.tr_mul(&ak);
        assert!(best <= (&a - &(&q * &pushed)).frobenius_norm() * (1.0 + 1e-12));
        for t in 0..10 {
            let cand = &gaussian_matrix(s, k, seed * 50 + t) * &gaussian_matrix(k, n, seed * 50 + t + 25);
            assert!(best <= (&a - &(&q * &cand)).frobenius_norm(), "seed {seed}");
        }
        // Pythagoras: the residual splits into the out-of-subspace part and
        // the rank-k tail inside it.
        let out = (&a - &(&q * &qta)).frobenius_norm().powi(2);
        let inside = (&qta - &x_star).frobenius_norm().powi(2);
        assert!((best.powi(2) - out - inside).abs() <= 1e-10 * a.frobenius_norm().powi(2));
    }
}

#[test]
fn pseudo_inverse_is_a_generalized_inverse() {
    for seed in 0..INSTANCES {
        let (m, n, _) = dims(seed);
        let rank = 1 + seed as usize % n;
        let a = low_rank(m, n, rank, seed);
        let ap = pinv(&a);
        assert!(rel(&(&(&a * &ap) * &a), &a) < 1e-10, "seed {seed}");
        assert!(rel(&(&(&ap * &a) * &ap), &ap) < 1e-10, "seed {seed}");
    }
}

#[test]
fn pseudo_inverse_from_qr() {
    for seed in 0..INSTANCES {
        let (m, n, _) = dims(seed);
        let a = gaussian_matrix(m, n, seed);
        let qr = thin_qr(&a).unwrap();
        let via_qr = &pinv(&qr.r) * &qr.q.transpose();
        assert!(rel(&via_qr, &pinv(&a)) < 1e-10, "seed {seed}");
    }
}

#[test]
fn leverage_scores_depend_only_on_the_column_space() {
    for seed in 0..INSTANCES {
        let (m, n, _) = dims(seed);
        let c = gaussian_matrix(m, n, seed);
        let q = thin_qr(&c).unwrap().q;
        let u = condensed_svd(&c).unwrap().u;
        let row_norms = |b: &DenseMatrix| -> Vec<f64> {
            (0..b.rows()).map(|i| b.row(i).iter().map(|v| v * v).sum()).collect()
        };
        // Diagonal of the hat matrix C (CᵀC)⁻¹ Cᵀ.
        let g = solve_spd(&c.tr_mul(&c), &c.transpose()).unwrap();
        let hat: Vec<f64> = (0..m).map(|i| (0..n).map(|t| c.get(i, t) * g.get(t, i)).sum()).collect();
        let from_lib = leverage_scores(&c.transpose(), None).unwrap();
        for (name, l) in [("Q", row_norms(&q)), ("U", row_norms(&u)), ("library", from_lib)] {
            for (x, y) in l.iter().zip(&hat) {
                assert!((x - y).abs() < 1e-10, "seed {seed}, {name}");
            }
        }
    }
}
