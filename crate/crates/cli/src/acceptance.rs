//! The acceptance suite: thirteen randomized checks, each run over its own
//! family of seeds derived from one base seed.

use std::collections::BTreeMap;
use std::time::Instant;

use randnla::apps::{cluster_accuracy, gpr_train, kpca_test, kpca_train, spectral_cluster, ClusterMethod};
use randnla::cur::{cur_faster, cur_faster_kernel, cur_prototype, default_secondary_size, optimal_intersection, CurOptions};
use randnla::kernel::{rbf_kernel, KernelSpec, KernelView};
use randnla::ksvd::{block_lanczos_ksvd, faster_ksvd, prototype_ksvd, FasterKsvdSizes};
use randnla::linalg::{
    condensed_svd, orthonormality_defect, pinv, singular_values, solve, solve_spd, tail_energy, thin_qr,
    truncated_svd,
};
use randnla::regression::{lsr_cg, lsr_exact, lsr_preconditioned, lsr_sketched, PreconditionOptions, Sampler};
use randnla::rng::derive_seed;
use randnla::sketch::{estimate_eta, estimate_gamma, gaussian_sketch, leverage_scores};
use randnla::spsd::{nystrom, optimal_core, shifted_smw_solve, smw_solve, spsd_faster};
use randnla::synth::{blobs, gaussian_matrix, ill_conditioned, low_rank, orthonormal, power_law, uniform_points};
use randnla::{DenseMatrix, Result, SketchKind, SketchSpec};
use rayon::prelude::*;

use crate::report::{RunReport, Status};

/// Result of one criterion.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub passed: bool,
    pub metrics: BTreeMap<String, f64>,
    /// Human-readable account of the numbers behind `passed`.
    pub detail: String,
}

impl Outcome {
    fn metric(&mut self, key: impl Into<String>, v: f64) {
        self.metrics.insert(key.into(), v);
    }

    /// Folds in one sub-check.
    fn check(&mut self, ok: bool, what: String) {
        if !self.detail.is_empty() {
            self.detail.push_str("; ");
        }
        self.detail.push_str(if ok { "" } else { "FAILED " });
        self.detail.push_str(&what);
        self.passed &= ok;
    }

    fn new() -> Self {
        Self {
            passed: true,
            ..Self::default()
        }
    }
}

pub struct Criterion {
    pub id: u64,
    pub name: &'static str,
    pub run: fn(u64) -> Result<Outcome>,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "subspace-embedding", run: subspace_embedding },
        Criterion { id: 2, name: "low-rank-approximation", run: low_rank_property },
        Criterion { id: 3, name: "sketched-least-squares", run: sketched_lsr },
        Criterion { id: 4, name: "preconditioned-least-squares", run: preconditioned_lsr },
        Criterion { id: 5, name: "prototype-ksvd", run: prototype_svd },
        Criterion { id: 6, name: "faster-ksvd", run: faster_svd },
        Criterion { id: 7, name: "block-lanczos", run: block_lanczos },
        Criterion { id: 8, name: "smw-solve", run: smw },
        Criterion { id: 9, name: "faster-spsd", run: faster_spsd },
        Criterion { id: 10, name: "nystrom", run: nystrom_checks },
        Criterion { id: 11, name: "cur", run: cur_checks },
        Criterion { id: 12, name: "applications", run: applications },
        Criterion { id: 13, name: "matrix-facts", run: matrix_facts },
    ]
}

/// Runs one criterion with the seed family derived from `seed`.
pub fn run_criterion(c: &Criterion, seed: u64) -> RunReport {
    let start = Instant::now();
    let mut report = RunReport::new("bench", seed);
    report.param("suite", "acceptance").param("criterion", c.id).param("name", c.name);
    match (c.run)(derive_seed(seed, c.id)) {
        Ok(outcome) => {
            for (k, v) in &outcome.metrics {
                report.metric(k, *v);
            }
            report.param("detail", outcome.detail.clone());
            if !outcome.passed {
                report.status = Status::Flagged;
                report.warn(format!("criterion {} not met: {}", c.id, outcome.detail));
            }
        }
        Err(e) => {
            report.status = Status::Error;
            report.message = Some(e.to_string());
        }
    }
    report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    report
}

/// All criteria, fanned out over at most `threads` workers (all cores when
/// `None`). Reports come back in criterion order.
pub fn run_suite(seed: u64, threads: Option<usize>) -> Vec<RunReport> {
    let list = criteria();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    match builder.build() {
        Ok(pool) => pool.install(|| list.par_iter().map(|c| run_criterion(c, seed)).collect()),
        Err(_) => list.iter().map(|c| run_criterion(c, seed)).collect(),
    }
}

fn trial(base: u64, i: u64) -> u64 {
    derive_seed(base, i)
}

/// Data seeds live in a tag range disjoint from trial seeds.
fn data(base: u64, i: u64) -> u64 {
    derive_seed(base, 1_000_000 + i)
}

/// Pass counts and extremes over a seed sweep.
#[derive(Default)]
struct Tally {
    hits: usize,
    total: usize,
    sum: f64,
    worst: f64,
}

impl Tally {
    /// Records `value`; a hit when it is at most `bound`.
    fn add(&mut self, value: f64, bound: f64) {
        self.total += 1;
        self.sum += value;
        self.worst = self.worst.max(value);
        if value <= bound {
            self.hits += 1;
        }
    }

    fn rate(&self) -> f64 {
        self.hits as f64 / self.total.max(1) as f64
    }

    fn mean(&self) -> f64 {
        self.sum / self.total.max(1) as f64
    }
}

fn rel_vec(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn rel_mat(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (a - b).frobenius_norm() / b.frobenius_norm()
}

const SEEDS: u64 = 50;

fn subspace_embedding(base: u64) -> Result<Outcome> {
    let a = gaussian_matrix(10, 2000, data(base, 0));
    type Make = fn(u64) -> SketchSpec;
    let operators: [(&str, Make); 4] = [
        ("gaussian", |s| SketchSpec::gaussian(100, s)),
        ("count_sketch", |s| SketchSpec::count_sketch(1000, s)),
        ("srht", |s| SketchSpec::srht(400, s)),
        ("combined", |s| SketchSpec::combined(800, SketchKind::Gaussian, 200, s)),
    ];
    let mut out = Outcome::new();
    for (name, make) in operators {
        let mut t = Tally::default();
        for i in 0..SEEDS {
            let s = trial(base, i);
            t.add(estimate_gamma(&a, &make(s), 100, s)?.gamma, 1.5);
        }
        out.metric(format!("gamma_pass_rate_{name}"), t.rate());
        out.metric(format!("gamma_worst_{name}"), t.worst);
        out.check(t.rate() >= 0.9, format!("{name}: gamma <= 1.5 in {}/{}", t.hits, t.total));
    }
    Ok(out)
}

fn low_rank_property(base: u64) -> Result<Outcome> {
    let k = 10;
    let s = (k as f64 / 0.1).ceil() as usize + 1;
    let a = power_law(200, 200, 1.0, data(base, 0));
    let (mut best, mut proj) = (Tally::default(), Tally::default());
    for i in 0..SEEDS {
        let c = gaussian_sketch(&a, s, trial(base, i))?;
        let eta = estimate_eta(&a, &c, k)?;
        best.add(eta.best, 1.2);
        proj.add(eta.proj, f64::INFINITY);
    }
    let mut out = Outcome::new();
    out.metric("eta_best_mean", best.mean());
    out.metric("eta_proj_mean", proj.mean());
    out.check(best.mean() <= 1.2, format!("mean eta_best {:.4} at s = {s}", best.mean()));
    Ok(out)
}

fn sketched_lsr(base: u64) -> Result<Outcome> {
    let a = gaussian_matrix(2000, 10, data(base, 0));
    let b = gaussian_matrix(2000, 1, data(base, 1)).column(0).to_vec();
    let exact = lsr_exact(&a, &b)?.objective;
    let mut t = Tally::default();
    for i in 0..SEEDS {
        let x = lsr_sketched(&a, &b, &SketchSpec::count_sketch(500, trial(base, i)))?;
        t.add(x.objective / exact, 1.21);
    }
    let mut out = Outcome::new();
    out.metric("objective_ratio_pass_rate", t.rate());
    out.metric("objective_ratio_worst", t.worst);
    out.check(t.rate() >= 0.9, format!("objective ratio <= 1.21 in {}/{}", t.hits, t.total));
    Ok(out)
}

fn preconditioned_lsr(base: u64) -> Result<Outcome> {
    let (n, d, eps) = (4000, 20, 1e-8_f64);
    let budget = (10.0 * (1.0 / eps).log10()).ceil() as usize;
    let (mut kappa, mut err) = (Tally::default(), Tally::default());
    let mut max_iters = 0;
    for i in 0..SEEDS {
        let a = ill_conditioned(n, d, 1e6, data(base, 3 * i));
        let x0 = gaussian_matrix(d, 1, data(base, 3 * i + 1)).column(0).to_vec();
        let noise = gaussian_matrix(n, 1, data(base, 3 * i + 2));
        let b: Vec<f64> = a.mul_vec(&x0).iter().zip(noise.column(0)).map(|(v, e)| v + 1e-8 * e).collect();
        let exact = lsr_exact(&a, &b)?;
        let seed = trial(base, i);
        let mut opts = PreconditionOptions::new(n, d, eps, seed);
        opts.sketch = SketchSpec::count_sketch(d * d, seed);
        opts.estimate_kappa = true;
        let sol = lsr_preconditioned(&a, &b, &opts)?;
        kappa.add(sol.kappa_estimate.unwrap_or(f64::INFINITY), 2.0);
        err.add(rel_vec(&sol.x, &exact.x), 1e-8);
        max_iters = max_iters.max(sol.iterations);
    }
    let mut out = Outcome::new();
    out.metric("kappa_pass_rate", kappa.rate());
    out.metric("kappa_worst", kappa.worst);
    out.metric("solution_rel_error_worst", err.worst);
    out.metric("iterations_max", max_iters as f64);
    out.check(kappa.rate() >= 0.9, format!("kappa <= 2 in {}/{}", kappa.hits, kappa.total));
    out.check(err.rate() == 1.0, format!("solution within 1e-8 in {}/{}", err.hits, err.total));
    out.check(max_iters <= budget, format!("at most {max_iters} iterations (budget {budget})"));
    Ok(out)
}

fn prototype_svd(base: u64) -> Result<Outcome> {
    let (k, eps) = (10, 0.2);
    let s = (k as f64 / eps).ceil() as usize;
    let a = power_law(200, 200, 1.0, data(base, 0));
    let best = tail_energy(&a, k);
    let (mut ratio, mut exact) = (Tally::default(), Tally::default());
    let mut passes_ok = true;
    for i in 0..SEEDS {
        let seed = trial(base, i);
        let r = prototype_ksvd(&a, k, &SketchSpec::gaussian(s, seed))?.with_error(&a);
        passes_ok &= r.passes_over_a == 2;
        ratio.add(r.error_fro.unwrap_or(f64::INFINITY).powi(2) / best, f64::INFINITY);
        let lr = low_rank(200, 200, k, data(base, 1 + i));
        let r = prototype_ksvd(&lr, k, &SketchSpec::gaussian(s, seed))?;
        passes_ok &= r.passes_over_a == 2;
        exact.add(rel_mat(&r.factors.reconstruct(), &lr), 1e-8);
    }
    let mut out = Outcome::new();
    out.metric("ratio_mean", ratio.mean());
    out.metric("exact_recovery_rate", exact.rate());
    out.metric("exact_recovery_worst", exact.worst);
    out.check(ratio.mean() <= 1.2, format!("mean ratio {:.4} at s = {s}", ratio.mean()));
    out.check(exact.rate() >= 0.95, format!("rank-{k} input recovered in {}/{}", exact.hits, exact.total));
    out.check(passes_ok, "two passes per run".into());
    Ok(out)
}

fn faster_svd(base: u64) -> Result<Outcome> {
    let k = 10;
    let sizes = FasterKsvdSizes { s: 40, p: 160, p_cs: 400 };
    let bound = 1.25f64.powi(3);
    let a = power_law(500, 500, 1.0, data(base, 0));
    let best = tail_energy(&a, k);
    let mut t = Tally::default();
    let mut passes_ok = true;
    for i in 0..SEEDS {
        let r = faster_ksvd(&a, k, sizes, trial(base, i))?.with_error(&a);
        passes_ok &= r.passes_over_a == 2;
        t.add(r.error_fro.unwrap_or(f64::INFINITY).powi(2) / best, bound);
    }
    let mut out = Outcome::new();
    out.metric("ratio_pass_rate", t.rate());
    out.metric("ratio_mean", t.mean());
    out.metric("ratio_worst", t.worst);
    out.check(t.rate() >= 0.8, format!("ratio <= {bound} in {}/{}", t.hits, t.total));
    out.check(passes_ok, "two passes per run".into());
    Ok(out)
}

fn block_lanczos(base: u64) -> Result<Outcome> {
    let (k, q) = (10, 30);
    let mut t = Tally::default();
    for i in 0..SEEDS {
        let a = gaussian_matrix(100, 80, data(base, i));
        let oracle = singular_values(&a);
        let r = block_lanczos_ksvd(&a, k, q, trial(base, i))?;
        let got = &r.factors.singular_values;
        let worst = if got.len() < k {
            f64::INFINITY
        } else {
            (0..k).map(|j| (got[j] - oracle[j]).abs() / oracle[j]).fold(0.0, f64::max)
        };
        t.add(worst, 1e-8);
    }
    let mut out = Outcome::new();
    out.metric("sigma_rel_error_worst", t.worst);
    out.check(t.rate() == 1.0, format!("top-{k} values within 1e-8 in {}/{}", t.hits, t.total));
    Ok(out)
}

fn smw(base: u64) -> Result<Outcome> {
    let mut out = Outcome::new();
    for (ai, alpha) in [1e-2, 1.0, 1e2].into_iter().enumerate() {
        let (mut plain, mut shifted) = (Tally::default(), Tally::default());
        for i in 0..20 {
            let l = gaussian_matrix(200, 20, data(base, 2 * i));
            let y = gaussian_matrix(200, 1, data(base, 2 * i + 1)).column(0).to_vec();
            let dense = (&l * &l.transpose()).shift_diagonal(alpha);
            let oracle = solve(&dense, &DenseMatrix::column_vector(&y))?.column(0).to_vec();
            plain.add(rel_vec(&smw_solve(&l, alpha, &y)?, &oracle), 1e-8);
            let w = shifted_smw_solve(&l, &DenseMatrix::identity(20), alpha, &y)?;
            shifted.add(rel_vec(&w, &oracle), 1e-8);
        }
        let tag = ["1e-2", "1", "1e2"][ai];
        out.metric(format!("smw_rel_error_worst_alpha_{tag}"), plain.worst);
        out.metric(format!("shifted_smw_rel_error_worst_alpha_{tag}"), shifted.worst);
        out.check(plain.rate() == 1.0, format!("alpha {tag}: smw worst {:.2e}", plain.worst));
        out.check(shifted.rate() == 1.0, format!("alpha {tag}: shifted smw worst {:.2e}", shifted.worst));
    }
    Ok(out)
}

/// Points and bandwidth shared by the SPSD and Nyström comparisons.
fn spsd_fixture(base: u64) -> (DenseMatrix, f64) {
    (gaussian_matrix(400, 5, data(base, 0)), 2.0)
}

fn faster_spsd(base: u64) -> Result<Outcome> {
    let (s, p) = (20, 80);
    let (x, sigma) = spsd_fixture(base);
    let k = rbf_kernel(&x, &x, sigma)?;
    let view = KernelView::new(&x, KernelSpec::rbf(sigma)?);
    let mut t = Tally::default();
    let mut within_budget = 0;
    for i in 0..SEEDS {
        view.reset_counter();
        let sk = spsd_faster(&view, s, p, trial(base, i))?;
        let fit = sk.fit_indices.as_ref().map_or(0, Vec::len);
        if view.entries_evaluated() <= (x.rows() * s + fit * fit) as u64 {
            within_budget += 1;
        }
        let z_best = optimal_core(&k, &sk.q);
        let best = (&k - &(&(&sk.q * &z_best) * &sk.q.transpose())).frobenius_norm().powi(2);
        t.add(sk.error_fro(&k).powi(2) / best, 1.25);
    }
    let mut out = Outcome::new();
    out.metric("ratio_pass_rate", t.rate());
    out.metric("ratio_mean", t.mean());
    out.metric("ratio_worst", t.worst);
    out.check(t.rate() >= 0.8, format!("ratio <= 1.25 in {}/{}", t.hits, t.total));
    out.check(
        within_budget == SEEDS,
        format!("entry count within n*s + |P|^2 in {within_budget}/{SEEDS}"),
    );
    Ok(out)
}

fn nystrom_checks(base: u64) -> Result<Outcome> {
    let s = 20;
    let mut out = Outcome::new();
    for r in [5, 16] {
        let mut t = Tally::default();
        for i in 0..SEEDS {
            let f = gaussian_matrix(400, r, data(base, 100 + i));
            let k = &f * &f.transpose();
            let ny = nystrom(&k, s, None, trial(base, i))?;
            t.add(rel_mat(&ny.reconstruct(), &k), 1e-6);
        }
        out.metric(format!("rank_{r}_recovery_worst"), t.worst);
        out.check(t.rate() == 1.0, format!("rank-{r} kernel recovered in {}/{}", t.hits, t.total));
    }
    let (x, sigma) = spsd_fixture(base);
    let k = rbf_kernel(&x, &x, sigma)?;
    let (mut ny_err, mut fast_err) = (Tally::default(), Tally::default());
    for i in 0..SEEDS {
        let seed = trial(base, 1000 + i);
        let ny = nystrom(&k, s, None, seed)?;
        ny_err.add((&k - &ny.reconstruct()).frobenius_norm(), f64::INFINITY);
        fast_err.add(spsd_faster(&k, s, 4 * s, seed)?.error_fro(&k), f64::INFINITY);
    }
    out.metric("nystrom_error_mean", ny_err.mean());
    out.metric("faster_spsd_error_mean", fast_err.mean());
    out.check(
        ny_err.mean() >= fast_err.mean(),
        format!("mean error nystrom {:.4} vs faster {:.4}", ny_err.mean(), fast_err.mean()),
    );
    Ok(out)
}

fn cur_checks(base: u64) -> Result<Outcome> {
    let mut out = Outcome::new();

    let a = gaussian_matrix(60, 50, data(base, 0));
    let proto = cur_prototype(&a, 50, 60, trial(base, 0))?;
    let full = CurOptions {
        p_c: Some(60),
        p_r: Some(50),
        sampler: Sampler::Uniform,
    };
    let fast = cur_faster(&a, 50, 60, full, trial(base, 1))?;
    let worst = rel_mat(&proto.reconstruct(), &a).max(rel_mat(&fast.reconstruct(), &a));
    out.metric("full_selection_rel_error", worst);
    out.check(worst <= 1e-10, format!("full selection error {worst:.2e}"));

    let (c, r) = (15, 15);
    let a = power_law(300, 300, 1.0, data(base, 1));
    let opts = CurOptions {
        sampler: Sampler::Leverage,
        ..CurOptions::default()
    };
    let mut t = Tally::default();
    for i in 0..SEEDS {
        let f = cur_faster(&a, c, r, opts, trial(base, 10 + i))?;
        let u = optimal_intersection(&a, &f.c, &f.r);
        let best = (&a - &(&(&f.c * &u) * &f.r)).frobenius_norm().powi(2);
        t.add(f.error_fro(&a).powi(2) / best, 1.25);
    }
    out.metric("ratio_pass_rate", t.rate());
    out.metric("ratio_worst", t.worst);
    out.check(t.rate() >= 0.8, format!("ratio <= 1.25 in {}/{}", t.hits, t.total));

    let x_test = gaussian_matrix(300, 3, data(base, 2));
    let x_train = gaussian_matrix(300, 3, data(base, 3));
    let sigma = 1.5;
    let dense = rbf_kernel(&x_test, &x_train, sigma)?;
    let p = default_secondary_size(c, r) as u64;
    let budget = 300 * c as u64 + 300 * r as u64 + (p + r as u64) * (p + c as u64);
    let (mut identical, mut within, mut max_visited) = (0, 0, 0u64);
    let runs = [Sampler::Uniform, Sampler::Leverage];
    for i in 0..SEEDS {
        let sampler = runs[i as usize % 2];
        let opts = CurOptions {
            sampler,
            ..CurOptions::default()
        };
        let seed = trial(base, 100 + i);
        let lazy = cur_faster_kernel(&x_test, &x_train, sigma, c, r, opts, seed)?;
        let full = cur_faster(&dense, c, r, opts, seed)?;
        if lazy.c == full.c && lazy.u == full.u && lazy.r == full.r {
            identical += 1;
        }
        if lazy.entries_visited <= budget {
            within += 1;
        }
        max_visited = max_visited.max(lazy.entries_visited);
    }
    out.metric("kernel_entries_visited_max", max_visited as f64);
    out.metric("kernel_entries_budget", budget as f64);
    out.check(identical == SEEDS, format!("lazy and dense kernel CUR identical in {identical}/{SEEDS}"));
    out.check(within == SEEDS, format!("entries visited within budget in {within}/{SEEDS}"));
    Ok(out)
}

fn applications(base: u64) -> Result<Outcome> {
    let mut out = Outcome::new();

    let centers = vec![vec![0.0, 0.0], vec![6.0, 0.0], vec![3.0, 5.0]];
    for method in [ClusterMethod::Faster, ClusterMethod::Nystrom] {
        let mut t = Tally::default();
        for i in 0..SEEDS {
            let (x, truth) = blobs(&centers, 100, 1.0, data(base, i));
            let c = spectral_cluster(&x, 1.5, 3, method, trial(base, i))?;
            // Scored as a shortfall so that the tally's bound reads "≥ 95%".
            t.add(1.0 - cluster_accuracy(&c.labels, &truth)?, 0.05);
        }
        let name = format!("{method:?}").to_lowercase();
        out.metric(format!("cluster_pass_rate_{name}"), t.rate());
        out.metric(format!("cluster_accuracy_worst_{name}"), 1.0 - t.worst);
        out.check(t.rate() >= 0.9, format!("{name} clustering >= 95% in {}/{}", t.hits, t.total));
    }

    let mut kpca = Tally::default();
    let mut gpr = Tally::default();
    for i in 0..10 {
        let seed = trial(base, 100 + i);
        let x_train = gaussian_matrix(300, 3, data(base, 100 + 2 * i));
        let x_test = gaussian_matrix(300, 3, data(base, 101 + 2 * i));
        let model = kpca_train(&x_train, 1.5, 5, None, seed)?;
        let direct = kpca_test(&x_train, &x_test, 1.5, &model, false, seed)?;
        let via_cur = kpca_test(&x_train, &x_test, 1.5, &model, true, seed)?;
        kpca.add(rel_mat(&via_cur, &direct), 0.1);

        let x = uniform_points(300, 2, 0.0, 3.0, data(base, 200 + i));
        let y: Vec<f64> = (0..300).map(|j| (2.0 * x.get(j, 0)).sin() + 0.5 * x.get(j, 1).cos()).collect();
        let (sigma, alpha) = (1.0, 1e-2);
        let m = gpr_train(&x, &y, sigma, alpha, Some(150), seed)?;
        let k = rbf_kernel(&x, &x, sigma)?.shift_diagonal(alpha);
        let exact = solve_spd(&k, &DenseMatrix::column_vector(&y))?.column(0).to_vec();
        gpr.add(rel_vec(&m.w, &exact), 0.1);
    }
    out.metric("kpca_cur_rel_diff_worst", kpca.worst);
    out.metric("gpr_weight_rel_error_worst", gpr.worst);
    out.check(kpca.rate() == 1.0, format!("kpca cur vs direct worst {:.2e}", kpca.worst));
    out.check(gpr.rate() == 1.0, format!("gpr weights worst {:.2e}", gpr.worst));
    Ok(out)
}

fn fact_dims(seed: u64) -> (usize, usize) {
    let m = 12 + (seed % 20) as usize;
    let n = 4 + (seed % 8) as usize;
    (m, n)
}

/// Six matrix identities on 20 instances each. Every fact reports its worst
/// residual, already divided by the tolerance it must meet.
fn matrix_facts(base: u64) -> Result<Outcome> {
    let instances = 20;
    let mut worst = [0.0f64; 6];
    for i in 0..instances {
        let seed = data(base, i);
        let (m, n) = fact_dims(seed);
        let rank = 1 + (seed % n as u64) as usize;
        let tol = 1e-10;

        // Products of orthonormal factors are orthonormal.
        let q1 = orthonormal(m, n, seed);
        let q2 = thin_qr(&gaussian_matrix(n, rank, seed ^ 1))?.q;
        worst[0] = worst[0].max(orthonormality_defect(&(&q1 * &q2)) / 1e-12);

        // Projection onto range(A): pseudo-inverse, singular basis and an
        // iterative least-squares fit agree.
        let a = low_rank(m, n, rank, seed);
        let b = gaussian_matrix(m, 2, seed ^ 2);
        let via_pinv = &(&a * &pinv(&a)) * &b;
        let ua = condensed_svd(&a)?.u;
        let via_basis = &ua * &ua.tr_mul(&b);
        let fitted: Vec<Vec<f64>> = (0..2)
            .map(|j| lsr_cg(&a, b.column(j), 1e-14, 500).map(|s| a.mul_vec(&s.x)))
            .collect::<Result<_>>()?;
        let via_cg = DenseMatrix::from_fn(m, 2, |r, c| fitted[c][r]);
        worst[1] = worst[1]
            .max(rel_mat(&via_basis, &via_pinv) / tol)
            .max(rel_mat(&via_cg, &via_pinv) / 1e-8);

        // Rank-k fit inside a subspace is the truncated projection.
        let s = 2 + (seed % 3) as usize;
        let k = 1 + (seed % s as u64) as usize;
        let g = gaussian_matrix(m, n, seed ^ 3);
        let q = orthonormal(m, s, seed ^ 4);
        let x_star = truncated_svd(&q.tr_mul(&g), k)?.reconstruct();
        let best = (&g - &(&q * &x_star)).frobenius_norm();
        let mut gap: f64 = 0.0;
        for t in 0..10 {
            let cand = &gaussian_matrix(s, k, seed ^ (10 + t)) * &gaussian_matrix(k, n, seed ^ (30 + t));
            gap = gap.max(best - (&g - &(&q * &cand)).frobenius_norm());
        }
        worst[2] = worst[2].max(gap.max(0.0) / (tol * g.frobenius_norm()));

        // Penrose conditions.
        let ap = pinv(&a);
        worst[3] = worst[3]
            .max(rel_mat(&(&(&a * &ap) * &a), &a) / tol)
            .max(rel_mat(&(&(&ap * &a) * &ap), &ap) / tol);

        // A† = R† Qᵀ from a thin QR.
        let f = gaussian_matrix(m, n, seed ^ 5);
        let qr = thin_qr(&f)?;
        worst[4] = worst[4].max(rel_mat(&(&pinv(&qr.r) * &qr.q.transpose()), &pinv(&f)) / tol);

        // Leverage scores from Q, from U and from the library all equal the
        // hat-matrix diagonal.
        let hat_g = solve_spd(&f.tr_mul(&f), &f.transpose())?;
        let hat: Vec<f64> = (0..m).map(|r| (0..n).map(|c| f.get(r, c) * hat_g.get(c, r)).sum()).collect();
        let row_norms = |b: &DenseMatrix| -> Vec<f64> {
            (0..b.rows()).map(|r| b.row(r).iter().map(|v| v * v).sum()).collect()
        };
        let u = condensed_svd(&f)?.u;
        for l in [row_norms(&qr.q), row_norms(&u), leverage_scores(&f.transpose(), None)?] {
            let d = l.iter().zip(&hat).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            worst[5] = worst[5].max(d / tol);
        }
    }
    let mut out = Outcome::new();
    for (i, w) in worst.iter().enumerate() {
        out.metric(format!("fact_{}_residual_over_tolerance", i + 1), *w);
        out.check(*w <= 1.0, format!("fact {} worst {w:.2e} of tolerance", i + 1));
    }
    Ok(out)
}
