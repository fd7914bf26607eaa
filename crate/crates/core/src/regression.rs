//! Least squares `min ‖Ax − b‖₂` and its matrix-valued relatives: exact and
//! iterative solvers, sketch-and-solve, sketch-and-precondition, CX and
//! CUR-type core regression.

use crate::error::{Error, Result, Warning};
use crate::linalg::{condition_number, default_rank_tolerance, pinv, pinv_with_rank, solve_upper_triangular, thin_qr};
use crate::matrix::{dot, norm2, DenseMatrix};
use crate::rng::derive_seed;
use crate::sketch::{leverage_sample_columns, uniform_sample_columns, SketchSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct LsrSolution {
    pub x: Vec<f64>,
    /// `‖Ax − b‖₂²`.
    pub objective: f64,
    /// Zero for direct solvers.
    pub iterations: usize,
    /// `κ(AT)` of the preconditioned system, when requested.
    pub kappa_estimate: Option<f64>,
    pub converged: bool,
    pub warnings: Vec<Warning>,
}

/// `‖Ax − b‖₂²`.
pub fn objective(a: &DenseMatrix, b: &[f64], x: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn check_system(op: &'static str, a: &DenseMatrix, b: &[f64]) -> Result<()> {
    let (n, d) = a.shape();
    if b.len() != n {
        return Err(Error::dim(op, format!("A has {n} rows but b has {}", b.len())));
    }
    if n < d {
        return Err(Error::dim(op, format!("need n >= d, got {n}x{d}")));
    }
    if d == 0 {
        return Err(Error::dim(op, "A has no columns"));
    }
    Ok(())
}

fn direct(a: &DenseMatrix, b: &[f64], x: Vec<f64>, warnings: Vec<Warning>) -> LsrSolution {
    LsrSolution {
        objective: objective(a, b, &x),
        x,
        iterations: 0,
        kappa_estimate: None,
        converged: true,
        warnings,
    }
}

/// `x = A† b`.
pub fn lsr_exact(a: &DenseMatrix, b: &[f64]) -> Result<LsrSolution> {
    check_system("lsr_exact", a, b)?;
    let x = pinv(a).mul_vec(b);
    Ok(direct(a, b, x, Vec::new()))
}

/// Conjugate gradient on the normal equations `AᵀA x = Aᵀb` (CGNR).
///
/// Stops when `‖Aᵀ(b − Ax)‖ ≤ tol ‖Aᵀb‖`. If `maxit` runs out first, the
/// iterate with the smallest normal-equation residual is returned and
/// flagged.
pub fn lsr_cg(a: &DenseMatrix, b: &[f64], tol: f64, maxit: usize) -> Result<LsrSolution> {
    check_system("lsr_cg", a, b)?;
    let d = a.cols();
    let mut x = vec![0.0; d];
    let mut r = b.to_vec();
    let mut s = a.tr_mul_vec(&r);
    let reference = norm2(&s);
    if reference == 0.0 {
        return Ok(LsrSolution {
            iterations: 0,
            ..direct(a, b, x, Vec::new())
        });
    }
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let (mut best_x, mut best_res) = (x.clone(), 1.0);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < maxit {
        iterations += 1;
        let q = a.mul_vec(&p);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &q);
        s = a.tr_mul_vec(&r);
        let gamma_new = dot(&s, &s);
        let rel = gamma_new.sqrt() / reference;
        if rel < best_res {
            best_res = rel;
            best_x.clone_from(&x);
        }
        if rel <= tol {
            converged = true;
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + beta * *pi;
        }
    }
    let mut warnings = Vec::new();
    if !converged {
        warnings.push(Warning::NotConverged {
            iterations,
            relative_residual: best_res,
        });
    }
    let x = if converged { x } else { best_x };
    Ok(LsrSolution {
        iterations,
        converged,
        ..direct(a, b, x, warnings)
    })
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Sketches `[A, b]` jointly along its rows and splits the result.
fn sketch_system(spec: &SketchSpec, a: &DenseMatrix, b: &[f64]) -> Result<(DenseMatrix, Vec<f64>)> {
    let d = a.cols();
    let stacked = DenseMatrix::hstack(&[a, &DenseMatrix::column_vector(b)])?;
    let y = spec.apply_rows(&stacked)?.matrix;
    let idx: Vec<usize> = (0..d).collect();
    Ok((y.select_columns(&idx), y.column(d).to_vec()))
}

/// Sketch-and-solve: `x̃ = argmin ‖Sᵀ(Ax − b)‖₂`.
pub fn lsr_sketched(a: &DenseMatrix, b: &[f64], spec: &SketchSpec) -> Result<LsrSolution> {
    check_system("lsr_sketched", a, b)?;
    let d = a.cols();
    if spec.output_size() < d {
        return Err(Error::param(
            "lsr_sketched",
            format!("sketch size {} is below d = {d}", spec.output_size()),
        ));
    }
    let (y, sb) = sketch_system(spec, a, b)?;
    let (yp, rank) = pinv_with_rank(&y, default_rank_tolerance(y.rows(), d));
    let mut warnings = Vec::new();
    if rank < d {
        warnings.push(Warning::RankDeficient {
            context: "sketched least squares",
            rank,
            expected: d,
        });
    }
    Ok(direct(a, b, yp.mul_vec(&sb), warnings))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InnerSolver {
    /// Fixed-step gradient descent.
    GradientDescent { step: f64 },
    ConjugateGradient,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreconditionOptions {
    /// Row sketch used to build the preconditioner.
    pub sketch: SketchSpec,
    /// Target accuracy; sets the iteration budget `⌈10 log₁₀(1/eps)⌉`.
    pub eps: f64,
    pub solver: InnerSolver,
    /// Overrides the iteration budget.
    pub max_iters: Option<usize>,
    /// Computes `κ(AT)` for diagnostics. This forms `AT` explicitly.
    pub estimate_kappa: bool,
}

impl PreconditionOptions {
    /// Count sketch of size `min(d², 20d)` (at most `n`), gradient descent
    /// with unit step.
    pub fn new(n: usize, d: usize, eps: f64, seed: u64) -> Self {
        Self {
            sketch: SketchSpec::count_sketch(default_precondition_size(n, d), seed),
            eps,
            solver: InnerSolver::GradientDescent { step: 1.0 },
            max_iters: None,
            estimate_kappa: false,
        }
    }

    pub fn iteration_budget(&self) -> usize {
        self.max_iters
            .unwrap_or_else(|| (10.0 * (1.0 / self.eps).log10()).ceil().max(1.0) as usize)
    }
}

pub fn default_precondition_size(n: usize, d: usize) -> usize {
    (d * d).min(20 * d).min(n).max(d)
}

/// Sketch-and-precondition least squares.
///
/// `Y = SᵀA = Q_Y R_Y`, `T = R_Y⁻¹`, `z₀ = Q_Yᵀ Sᵀb`, then iterations on
/// `min_z ‖ATz − b‖` with `AT` applied as two products. Returns `x = Tz`.
///
/// The loop runs for the iteration budget and stops early once an update no
/// longer changes `z` at working precision. A singular `R_Y` triggers one
/// redraw of the sketch from a derived seed.
pub fn lsr_preconditioned(a: &DenseMatrix, b: &[f64], opts: &PreconditionOptions) -> Result<LsrSolution> {
    check_system("lsr_preconditioned", a, b)?;
    let d = a.cols();
    if opts.sketch.output_size() < d {
        return Err(Error::param(
            "lsr_preconditioned",
            format!("sketch size {} is below d = {d}", opts.sketch.output_size()),
        ));
    }
    if !(opts.eps > 0.0 && opts.eps < 1.0) {
        return Err(Error::param("lsr_preconditioned", "eps must lie in (0, 1)"));
    }
    let mut warnings = Vec::new();
    let (qy, t, sb) = match preconditioner(&opts.sketch, a, b)? {
        Some(f) => f,
        None => {
            warnings.push(Warning::Resampled {
                context: "preconditioner",
            });
            let retry = opts.sketch.reseeded(derive_seed(opts.sketch.seed, 0x5EED));
            preconditioner(&retry, a, b)?.ok_or_else(|| {
                Error::singular("lsr_preconditioned", "sketched R factor is singular after a redraw")
            })?
        }
    };

    let apply = |z: &[f64]| a.mul_vec(&t.mul_vec(z));
    let apply_t = |r: &[f64]| t.tr_mul_vec(&a.tr_mul_vec(r));
    let mut z = qy.tr_mul_vec(&sb);
    let reference = norm2(&apply_t(b)).max(f64::MIN_POSITIVE);

    let budget = opts.iteration_budget();
    let mut iterations = 0;
    let mut r: Vec<f64> = b.iter().zip(apply(&z)).map(|(bi, v)| bi - v).collect();
    let mut g = apply_t(&r);
    let mut best = Best::new(&z, norm2(&g));
    match opts.solver {
        InnerSolver::GradientDescent { step } => {
            while iterations < budget {
                iterations += 1;
                let dz: Vec<f64> = g.iter().map(|v| step * v).collect();
                axpy(&mut z, 1.0, &dz);
                r = b.iter().zip(apply(&z)).map(|(bi, v)| bi - v).collect();
                g = apply_t(&r);
                if best.update(&z, norm2(&g)) || norm2(&dz) <= f64::EPSILON * norm2(&z) {
                    break;
                }
            }
        }
        InnerSolver::ConjugateGradient => {
            let mut p = g.clone();
            let mut gamma = dot(&g, &g);
            while iterations < budget && gamma > 0.0 {
                iterations += 1;
                let q = apply(&p);
                let qq = dot(&q, &q);
                if qq == 0.0 {
                    break;
                }
                let alpha = gamma / qq;
                axpy(&mut z, alpha, &p);
                axpy(&mut r, -alpha, &q);
                g = apply_t(&r);
                let gamma_new = dot(&g, &g);
                if best.update(&z, gamma_new.sqrt())
                    || alpha.abs() * norm2(&p) <= f64::EPSILON * norm2(&z)
                {
                    break;
                }
                let beta = gamma_new / gamma;
                gamma = gamma_new;
                for (pi, gi) in p.iter_mut().zip(&g) {
                    *pi = gi + beta * *pi;
                }
            }
        }
    }
    let z = best.z;
    g = apply_t(&b.iter().zip(apply(&z)).map(|(bi, v)| bi - v).collect::<Vec<_>>());
    let relative_residual = norm2(&g) / reference;
    let converged = relative_residual <= opts.eps;
    if !converged {
        warnings.push(Warning::NotConverged {
            iterations,
            relative_residual,
        });
    }
    let kappa_estimate = opts.estimate_kappa.then(|| condition_number(&(a * &t)));
    let x = t.mul_vec(&z);
    Ok(LsrSolution {
        objective: objective(a, b, &x),
        x,
        iterations,
        kappa_estimate,
        converged,
        warnings,
    })
}

/// Best iterate seen so far by gradient norm. Iterations stop once the
/// gradient has failed to improve several times in a row: past that point
/// only rounding noise is being fed back.
struct Best {
    z: Vec<f64>,
    grad: f64,
    stale: usize,
}

impl Best {
    const PATIENCE: usize = 3;

    fn new(z: &[f64], grad: f64) -> Self {
        Self {
            z: z.to_vec(),
            grad,
            stale: 0,
        }
    }

    /// Records an iterate; returns true when iterations should stop.
    fn update(&mut self, z: &[f64], grad: f64) -> bool {
        if grad < self.grad {
            self.z.clear();
            self.z.extend_from_slice(z);
            self.grad = grad;
            self.stale = 0;
        } else {
            self.stale += 1;
        }
        self.stale >= Self::PATIENCE
    }
}

/// `(Q_Y, R_Y⁻¹, Sᵀb)`, or `None` when `R_Y` is numerically singular.
fn preconditioner(
    spec: &SketchSpec,
    a: &DenseMatrix,
    b: &[f64],
) -> Result<Option<(DenseMatrix, DenseMatrix, Vec<f64>)>> {
    let d = a.cols();
    let (y, sb) = sketch_system(spec, a, b)?;
    if y.rows() < d {
        return Err(Error::param("lsr_preconditioned", "sketch has fewer rows than columns"));
    }
    let qr = thin_qr(&y)?;
    let diag = qr.r.diagonal();
    let big = diag.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let tol = default_rank_tolerance(y.rows(), d) * big;
    if big == 0.0 || diag.iter().any(|v| v.abs() <= tol) {
        return Ok(None);
    }
    let t = solve_upper_triangular(&qr.r, &DenseMatrix::identity(d))?;
    Ok(Some((qr.q, t, sb)))
}

/// Matrix-valued regression result with any rank warnings raised on the way.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreSolution {
    pub x: DenseMatrix,
    pub warnings: Vec<Warning>,
}

/// Sketched CX regression `X̃ = (SᵀC)† (SᵀA)`, with `S` acting on rows.
pub fn cx_regression(a: &DenseMatrix, c: &DenseMatrix, spec: &SketchSpec) -> Result<CoreSolution> {
    if a.rows() != c.rows() {
        return Err(Error::dim(
            "cx_regression",
            format!("A has {} rows, C has {}", a.rows(), c.rows()),
        ));
    }
    let nc = c.cols();
    if spec.output_size() < nc {
        return Err(Error::param(
            "cx_regression",
            format!("sketch size {} is below c = {nc}", spec.output_size()),
        ));
    }
    let joint = spec.apply_rows(&DenseMatrix::hstack(&[c, a])?)?.matrix;
    let sc = joint.select_columns(&(0..nc).collect::<Vec<_>>());
    let sa = joint.select_columns(&(nc..nc + a.cols()).collect::<Vec<_>>());
    let (scp, rank) = pinv_with_rank(&sc, default_rank_tolerance(sc.rows(), nc));
    let mut warnings = Vec::new();
    if rank < nc {
        warnings.push(Warning::RankDeficient {
            context: "sketched C",
            rank,
            expected: nc,
        });
    }
    Ok(CoreSolution {
        x: &scp * &sa,
        warnings,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampler {
    Uniform,
    Leverage,
}

impl std::str::FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Sampler::Uniform),
            "leverage" => Ok(Sampler::Leverage),
            other => Err(Error::param("sampler", format!("unknown sampler `{other}`"))),
        }
    }
}

/// Sampled rows of `m` (by its row leverage scores or uniformly) with their
/// scale factors.
fn sample_rows(m: &DenseMatrix, s: usize, seed: u64, sampler: Sampler) -> Result<(Vec<usize>, Vec<f64>)> {
    match sampler {
        Sampler::Uniform => {
            let (_, sel) = uniform_sample_columns(&m.transpose(), s, seed)?;
            let w = vec![1.0; sel.len()];
            Ok((sel.indices, w))
        }
        Sampler::Leverage => {
            let (_, sel) = leverage_sample_columns(&m.transpose(), s, seed, None, true)?;
            Ok((sel.indices, sel.weights.expect("scaled selection")))
        }
    }
}

/// Sketched CUR core `X̃ = (S_CᵀC)† (S_Cᵀ A S_R) (R S_R)†`, sampling `s_c` rows
/// of `C` and `s_r` columns of `R`.
#[allow(clippy::too_many_arguments)]
pub fn cur_core_regression(
    c: &DenseMatrix,
    r: &DenseMatrix,
    a: &DenseMatrix,
    s_c: usize,
    s_r: usize,
    seed: u64,
    sampler: Sampler,
) -> Result<CoreSolution> {
    let (m, n) = a.shape();
    if c.rows() != m || r.cols() != n {
        return Err(Error::dim(
            "cur_core_regression",
            format!("C is {}x{}, R is {}x{}, A is {m}x{n}", c.rows(), c.cols(), r.rows(), r.cols()),
        ));
    }
    if s_c == 0 || s_c > m || s_r == 0 || s_r > n {
        return Err(Error::param(
            "cur_core_regression",
            format!("sample sizes ({s_c}, {s_r}) outside 1..={m} and 1..={n}"),
        ));
    }
    let (rows, wr) = sample_rows(c, s_c, derive_seed(seed, 1), sampler)?;
    let (cols, wc) = sample_rows(&r.transpose(), s_r, derive_seed(seed, 2), sampler)?;
    let cs = c.select_rows(&rows).scale_rows(&wr);
    let rs = r.select_columns(&cols).scale_columns(&wc);
    let core = a.submatrix(&rows, &cols).scale_rows(&wr).scale_columns(&wc);
    let (cp, rank_c) = pinv_with_rank(&cs, default_rank_tolerance(cs.rows(), cs.cols()));
    let (rp, rank_r) = pinv_with_rank(&rs, default_rank_tolerance(rs.rows(), rs.cols()));
    let mut warnings = Vec::new();
    if rank_c < c.cols() {
        warnings.push(Warning::RankDeficient {
            context: "sampled rows of C",
            rank: rank_c,
            expected: c.cols(),
        });
    }
    if rank_r < r.rows() {
        warnings.push(Warning::RankDeficient {
            context: "sampled columns of R",
            rank: rank_r,
            expected: r.rows(),
        });
    }
    Ok(CoreSolution {
        x: &(&cp * &core) * &rp,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::SketchKind;
    use crate::synth::{gaussian_matrix, ill_conditioned, orthonormal};

    fn rel(a: &[f64], b: &[f64]) -> f64 {
        let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        norm2(&d) / norm2(b)
    }

    #[test]
    fn exact_on_identity() {
        let b = [1.0, -2.0, 3.5];
        let s = lsr_exact(&DenseMatrix::identity(3), &b).unwrap();
        assert!(rel(&s.x, &b) < 1e-15);
        assert!(s.objective < 1e-28);
    }

    #[test]
    fn exact_recovers_consistent_solution() {
        let a = gaussian_matrix(30, 5, 1);
        let x0 = [1.0, 2.0, -1.0, 0.5, 3.0];
        let b = a.mul_vec(&x0);
        let s = lsr_exact(&a, &b).unwrap();
        assert!(rel(&s.x, &x0) < 1e-12);
        assert!(s.objective < 1e-20);
    }

    #[test]
    fn exact_residual_is_orthogonal() {
        let a = gaussian_matrix(40, 6, 2);
        let b = gaussian_matrix(40, 1, 3).column(0).to_vec();
        let s = lsr_exact(&a, &b).unwrap();
        let r: Vec<f64> = a.mul_vec(&s.x).iter().zip(&b).map(|(p, q)| p - q).collect();
        let g = a.tr_mul_vec(&r);
        assert!(norm2(&g) <= 1e-8 * a.frobenius_norm() * norm2(&b));
        assert!(lsr_exact(&gaussian_matrix(3, 5, 1), &[0.0; 3]).is_err());
    }

    #[test]
    fn cg_one_step_on_orthonormal_columns() {
        let q = orthonormal(20, 4, 5);
        let b = gaussian_matrix(20, 1, 6).column(0).to_vec();
        let s = lsr_cg(&q, &b, 1e-10, 10).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(s.converged);
    }

    #[test]
    fn cg_matches_exact_when_well_conditioned() {
        let a = gaussian_matrix(60, 8, 7);
        let b = gaussian_matrix(60, 1, 8).column(0).to_vec();
        let cg = lsr_cg(&a, &b, 1e-12, 100).unwrap();
        let ex = lsr_exact(&a, &b).unwrap();
        assert!(rel(&cg.x, &ex.x) < 1e-8);
    }

    #[test]
    fn cg_flags_exhausted_budget() {
        let a = ill_conditioned(200, 20, 1e6, 1);
        let b = gaussian_matrix(200, 1, 2).column(0).to_vec();
        let s = lsr_cg(&a, &b, 1e-14, 3).unwrap();
        assert!(!s.converged);
        assert!(matches!(s.warnings[0], Warning::NotConverged { iterations: 3, .. }));
    }

    #[test]
    fn sketched_with_full_selection_is_exact() {
        let a = gaussian_matrix(50, 4, 1);
        let b = gaussian_matrix(50, 1, 2).column(0).to_vec();
        let spec = SketchSpec::new(SketchKind::UniformColumns, 50, 9);
        let sk = lsr_sketched(&a, &b, &spec).unwrap();
        let ex = lsr_exact(&a, &b).unwrap();
        assert!(rel(&sk.x, &ex.x) < 1e-10);
    }

    #[test]
    fn sketched_objective_never_beats_optimum() {
        let a = gaussian_matrix(300, 5, 4);
        let b = gaussian_matrix(300, 1, 5).column(0).to_vec();
        let best = lsr_exact(&a, &b).unwrap().objective;
        for seed in 0..10 {
            let s = lsr_sketched(&a, &b, &SketchSpec::count_sketch(60, seed)).unwrap();
            assert!(s.objective >= best * (1.0 - 1e-12));
            let recomputed = objective(&a, &b, &s.x);
            assert!((s.objective - recomputed).abs() <= 1e-8 * recomputed);
        }
    }

    #[test]
    fn sketched_orthogonal_rhs_has_finite_ratio() {
        // b orthogonal to range(A): optimum is ‖b‖², and any x is no better.
        let q = orthonormal(40, 4, 3);
        let a = q.select_columns(&[0, 1, 2]);
        let b = q.column(3).to_vec();
        let spec = SketchSpec::new(SketchKind::UniformColumns, 20, 2);
        let s = lsr_sketched(&a, &b, &spec).unwrap();
        assert!(s.objective.is_finite());
        assert!(s.objective >= 1.0 - 1e-12);
    }

    #[test]
    fn preconditioned_orthonormal_is_immediate() {
        let q = orthonormal(400, 5, 3);
        let x0 = [1.0, -1.0, 2.0, 0.0, 0.5];
        let b = q.mul_vec(&x0);
        let mut opts = PreconditionOptions::new(400, 5, 1e-10, 1);
        opts.sketch = SketchSpec::gaussian(100, 1);
        let s = lsr_preconditioned(&q, &b, &opts).unwrap();
        assert!(rel(&s.x, &x0) < 1e-10);
        assert!(s.converged);
    }

    #[test]
    fn preconditioned_matches_exact_on_ill_conditioned_input() {
        let a = ill_conditioned(1000, 10, 1e6, 5);
        let x0: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let b = a.mul_vec(&x0);
        let ex = lsr_exact(&a, &b).unwrap();
        for solver in [InnerSolver::GradientDescent { step: 1.0 }, InnerSolver::ConjugateGradient] {
            let mut opts = PreconditionOptions::new(1000, 10, 1e-8, 3);
            opts.solver = solver;
            opts.estimate_kappa = true;
            let s = lsr_preconditioned(&a, &b, &opts).unwrap();
            assert!(rel(&s.x, &ex.x) < 1e-8, "{solver:?}");
            assert!(s.kappa_estimate.unwrap() < 3.0);
        }
    }

    #[test]
    fn cx_full_selection_equals_pinv() {
        let a = gaussian_matrix(12, 9, 1);
        let c = a.select_columns(&[0, 3, 5]);
        let spec = SketchSpec::new(SketchKind::UniformColumns, 12, 4);
        let x = cx_regression(&a, &c, &spec).unwrap().x;
        let oracle = &pinv(&c) * &a;
        assert_eq!(x.shape(), (3, 9));
        assert!((&x - &oracle).max_abs() < 1e-10);
    }

    #[test]
    fn cur_core_full_selection_is_closed_form() {
        let a = gaussian_matrix(15, 12, 2);
        let c = a.select_columns(&[1, 4, 7]);
        let r = a.select_rows(&[0, 2, 9, 11]);
        let x = cur_core_regression(&c, &r, &a, 15, 12, 6, Sampler::Uniform).unwrap();
        let oracle = &(&pinv(&c) * &a) * &pinv(&r);
        assert_eq!(x.x.shape(), (3, 4));
        assert!((&x.x - &oracle).max_abs() < 1e-10);
        assert!(x.warnings.is_empty());
    }
}
