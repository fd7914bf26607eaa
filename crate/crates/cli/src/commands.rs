//! Subcommands. Each one loads its inputs, runs a single algorithm and
//! returns the reports to print.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use randnla::apps::{
    cluster_accuracy, gpr_predict, gpr_train, knn_classify, kpca_test, kpca_train, spectral_cluster, ClusterMethod,
};
use randnla::cur::{cur_faster, cur_faster_kernel, cur_prototype, optimal_intersection, CurOptions, CurFactors};
use randnla::kernel::{rbf_kernel, KernelSpec, KernelView};
use randnla::ksvd::{block_lanczos_ksvd, faster_ksvd, prototype_ksvd, FasterKsvdSizes};
use randnla::linalg::tail_energy;
use randnla::regression::{lsr_cg, lsr_exact, lsr_preconditioned, lsr_sketched, PreconditionOptions, Sampler};
use randnla::sketch::{estimate_eta, estimate_gamma};
use randnla::spsd::{nystrom, optimal_core, spsd_faster, spsd_prototype, SpsdSketch};
use randnla::synth::gaussian_matrix;
use randnla::{DenseMatrix, SketchKind, SketchSpec};

use crate::acceptance;
use crate::io::{load_matrix, load_vector, save_matrix, save_vector, Format};
use crate::report::{RunReport, Status};

#[derive(Debug, Parser)]
#[command(name = "randnla", version, about = "Randomized sketching, solvers and kernel approximations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Seed for every random draw. Required by randomized methods.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// File format for inputs and outputs (inferred from the extension
    /// otherwise).
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Where to write the main result.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a sketching operator to the columns of a matrix.
    Sketch(SketchArgs),
    /// Estimate the subspace-embedding or low-rank factor of a sketch.
    Verify(VerifyArgs),
    /// Least squares `min ‖Ax − b‖`.
    Lsr(LsrArgs),
    /// Rank-k SVD.
    Ksvd(KsvdArgs),
    /// SPSD sketch `K ≈ Q Z Qᵀ` of a kernel matrix.
    Spsd(SpsdArgs),
    /// Nyström factor `K ≈ L Lᵀ`.
    Nystrom(NystromArgs),
    /// CUR decomposition.
    Cur(CurArgs),
    /// Approximate kernel PCA features.
    Kpca(KpcaArgs),
    /// Spectral clustering.
    Cluster(ClusterArgs),
    /// Gaussian process regression.
    Gpr(GprArgs),
    /// Run a benchmark suite.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SketchArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "gaussian")]
    pub method: String,
    #[arg(long = "sketch-size")]
    pub s: usize,
    /// Count-sketch width for `combined`.
    #[arg(long = "cs-size")]
    pub s_cs: Option<usize>,
    /// Second stage for `combined`: gaussian or srht.
    #[arg(long, default_value = "gaussian")]
    pub stage2: String,
    /// Rescale sampled columns (selection methods).
    #[arg(long)]
    pub scale: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Property {
    SubspaceEmbedding,
    LowRank,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub property: Property,
    #[arg(long, default_value = "gaussian")]
    pub method: String,
    /// Matrix to sketch; a Gaussian `m x n` matrix is generated otherwise.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, visible_alias = "sketch-size")]
    pub s: usize,
    #[arg(long = "cs-size")]
    pub s_cs: Option<usize>,
    #[arg(long, default_value = "gaussian")]
    pub stage2: String,
    /// Probe directions for the subspace-embedding estimate.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Target rank for the low-rank property.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Flag the report when the estimate exceeds this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LsrMethod {
    Exact,
    Cg,
    Sketched,
    Preconditioned,
}

#[derive(Debug, Args)]
pub struct LsrArgs {
    #[arg(long, value_enum, default_value = "exact")]
    pub method: LsrMethod,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub rhs: PathBuf,
    /// Target accuracy (preconditioned, cg).
    #[arg(long, default_value_t = 1e-8)]
    pub eps: f64,
    #[arg(long = "sketch-size")]
    pub s: Option<usize>,
    /// Sketch family for the sketched and preconditioned methods.
    #[arg(long, default_value = "count_sketch")]
    pub sketch: String,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KsvdMethod {
    Lanczos,
    Prototype,
    Faster,
}

#[derive(Debug, Args)]
pub struct KsvdArgs {
    #[arg(long, value_enum, default_value = "prototype")]
    pub method: KsvdMethod,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Sketch width (prototype, faster).
    #[arg(long = "sketch-size")]
    pub s: Option<usize>,
    /// Sketch family (prototype).
    #[arg(long, default_value = "gaussian")]
    pub sketch: String,
    /// Second-sketch rows (faster).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub p_cs: Option<usize>,
    /// Krylov blocks (lanczos).
    #[arg(long, default_value_t = 30)]
    pub q: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Either an explicit kernel matrix or points for an RBF kernel.
#[derive(Debug, Args, Clone)]
pub struct KernelSource {
    /// Kernel matrix.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Points (one per row) for an RBF kernel.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpsdMethod {
    Prototype,
    Faster,
}

#[derive(Debug, Args)]
pub struct SpsdArgs {
    #[arg(long, value_enum, default_value = "faster")]
    pub method: SpsdMethod,
    #[command(flatten)]
    pub kernel: KernelSource,
    #[arg(long = "sketch-size")]
    pub s: usize,
    /// Sampled rows for the core (faster); `4s` by default.
    #[arg(long)]
    pub p: Option<usize>,
    /// Sketch family (prototype).
    #[arg(long, default_value = "uniform")]
    pub sketch: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct NystromArgs {
    #[command(flatten)]
    pub kernel: KernelSource,
    #[arg(long = "sketch-size")]
    pub s: usize,
    /// Target rank; `⌈0.8 s⌉` by default.
    #[arg(long)]
    pub k: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CurMethod {
    Prototype,
    Faster,
}

#[derive(Debug, Args)]
pub struct CurArgs {
    #[arg(long, value_enum, default_value = "faster")]
    pub method: CurMethod,
    /// Matrix to decompose.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Training points; with `--test-data` the RBF cross-kernel is decomposed
    /// without being formed.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub c: usize,
    #[arg(long)]
    pub r: usize,
    #[arg(long)]
    pub p_c: Option<usize>,
    #[arg(long)]
    pub p_r: Option<usize>,
    #[arg(long, default_value = "uniform")]
    pub sampler: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct KpcaArgs {
    /// Training points.
    #[arg(long)]
    pub data: PathBuf,
    /// Test points; the training points are featurized otherwise.
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long = "sketch-size")]
    pub s: Option<usize>,
    /// Replace the test kernel by a CUR decomposition.
    #[arg(long)]
    pub cur: bool,
    /// Training labels; with test labels, reports k-NN accuracy.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub test_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub neighbors: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value = "faster")]
    pub method: String,
    /// True labels; reports clustering accuracy.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GprArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub targets: PathBuf,
    #[arg(long)]
    pub test_data: Option<PathBuf>,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Nyström columns.
    #[arg(long)]
    pub l: Option<usize>,
    /// Replace the test kernel by a CUR decomposition.
    #[arg(long)]
    pub cur: bool,
    /// Also solve the exact system and report the weight error.
    #[arg(long)]
    pub exact: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Acceptance,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "acceptance")]
    pub suite: Suite,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u64>,
    #[command(flatten)]
    pub common: Common,
}

/// Failure that turns into an `error` report.
#[derive(Debug)]
pub struct CommandError(pub String);

impl<E: std::error::Error> From<E> for CommandError {
    fn from(e: E) -> Self {
        CommandError(e.to_string())
    }
}

type Outcome = Result<RunReport, CommandError>;

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Sketch(_) => "sketch",
            Command::Verify(_) => "verify",
            Command::Lsr(_) => "lsr",
            Command::Ksvd(_) => "ksvd",
            Command::Spsd(_) => "spsd",
            Command::Nystrom(_) => "nystrom",
            Command::Cur(_) => "cur",
            Command::Kpca(_) => "kpca",
            Command::Cluster(_) => "cluster",
            Command::Gpr(_) => "gpr",
            Command::Bench(_) => "bench",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Sketch(a) => &a.common,
            Command::Verify(a) => &a.common,
            Command::Lsr(a) => &a.common,
            Command::Ksvd(a) => &a.common,
            Command::Spsd(a) => &a.common,
            Command::Nystrom(a) => &a.common,
            Command::Cur(a) => &a.common,
            Command::Kpca(a) => &a.common,
            Command::Cluster(a) => &a.common,
            Command::Gpr(a) => &a.common,
            Command::Bench(a) => &a.common,
        }
    }
}

/// Runs a command; every failure becomes an `error` report.
pub fn run(cmd: &Command) -> Vec<RunReport> {
    let start = Instant::now();
    let seed = cmd.common().seed.unwrap_or(0);
    if let Command::Bench(args) = cmd {
        return match bench(args) {
            Ok(reports) => reports,
            Err(e) => vec![RunReport::error("bench", seed, e.0)],
        };
    }
    let result = match cmd {
        Command::Sketch(a) => sketch(a),
        Command::Verify(a) => verify(a),
        Command::Lsr(a) => lsr(a),
        Command::Ksvd(a) => ksvd(a),
        Command::Spsd(a) => spsd(a),
        Command::Nystrom(a) => nystrom_cmd(a),
        Command::Cur(a) => cur(a),
        Command::Kpca(a) => kpca(a),
        Command::Cluster(a) => cluster(a),
        Command::Gpr(a) => gpr(a),
        Command::Bench(_) => unreachable!("handled above"),
    };
    let mut report = result.unwrap_or_else(|e| RunReport::error(cmd.name(), seed, e.0));
    report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    vec![report]
}

fn require_seed(common: &Common, what: &str) -> Result<u64, CommandError> {
    common
        .seed
        .ok_or_else(|| CommandError(format!("--seed is required for {what}")))
}

fn load(path: &Path, common: &Common) -> Result<DenseMatrix, CommandError> {
    Ok(load_matrix(path, common.format)?)
}

fn write_matrix(m: &DenseMatrix, common: &Common, report: &mut RunReport) -> Result<(), CommandError> {
    if let Some(p) = &common.output {
        save_matrix(m, p, common.format)?;
        report.param("output", p.display().to_string());
    }
    Ok(())
}

fn write_vector(v: &[f64], common: &Common, report: &mut RunReport) -> Result<(), CommandError> {
    if let Some(p) = &common.output {
        save_vector(v, p, common.format)?;
        report.param("output", p.display().to_string());
    }
    Ok(())
}

fn parse<T: std::str::FromStr<Err = randnla::Error>>(s: &str) -> Result<T, CommandError> {
    s.parse().map_err(|e: randnla::Error| CommandError(e.to_string()))
}

fn build_spec(method: &str, s: usize, s_cs: Option<usize>, stage2: &str, seed: u64) -> Result<SketchSpec, CommandError> {
    let kind: SketchKind = parse(method)?;
    if kind == SketchKind::Combined {
        let s_cs = s_cs.ok_or_else(|| CommandError("combined sketches need --cs-size".into()))?;
        return Ok(SketchSpec::combined(s_cs, parse(stage2)?, s, seed));
    }
    Ok(SketchSpec::new(kind, s, seed))
}

fn sketch(a: &SketchArgs) -> Outcome {
    let seed = require_seed(&a.common, "sketching")?;
    let m = load(&a.input, &a.common)?;
    let spec = build_spec(&a.method, a.s, a.s_cs, &a.stage2, seed)?.with_scaling(a.scale);
    let out = spec.apply(&m)?;
    let mut r = RunReport::new("sketch", seed);
    r.param("method", spec.kind.name()).param("sketch_size", a.s);
    r.metric("rows", out.matrix.rows() as f64)
        .metric("cols", out.matrix.cols() as f64)
        .metric("fro_ratio", out.matrix.frobenius_norm() / m.frobenius_norm());
    if let Some(sel) = &out.selection {
        r.param("indices", sel.indices.clone());
    }
    write_matrix(&out.matrix, &a.common, &mut r)?;
    Ok(r)
}

fn verify(a: &VerifyArgs) -> Outcome {
    let seed = require_seed(&a.common, "verification")?;
    let m = match &a.input {
        Some(p) => load(p, &a.common)?,
        None => gaussian_matrix(a.m, a.n, seed),
    };
    let spec = build_spec(&a.method, a.s, a.s_cs, &a.stage2, seed)?;
    let mut r = RunReport::new("verify", seed);
    r.param("method", spec.kind.name())
        .param("s", a.s)
        .param("m", m.rows())
        .param("n", m.cols());
    let value = match a.property {
        Property::SubspaceEmbedding => {
            r.param("property", "subspace-embedding").param("trials", a.trials);
            let g = estimate_gamma(&m, &spec, a.trials, seed)?;
            r.metric("gamma", g.gamma).metric("probes_skipped", g.probes_skipped as f64);
            g.gamma
        }
        Property::LowRank => {
            r.param("property", "low-rank").param("k", a.k);
            let c = spec.apply(&m)?.matrix;
            let e = estimate_eta(&m, &c, a.k)?;
            r.metric("eta", e.best).metric("eta_proj", e.proj);
            e.best
        }
    };
    if let Some(t) = a.threshold {
        r.param("threshold", t);
        if value > t {
            r.warn(format!("estimate {value} exceeds threshold {t}"));
        }
    }
    Ok(r)
}

fn lsr(a: &LsrArgs) -> Outcome {
    let m = load(&a.input, &a.common)?;
    let b = load_vector(&a.rhs, a.common.format)?;
    let (n, d) = m.shape();
    let exact = lsr_exact(&m, &b)?;
    let mut r = RunReport::new("lsr", a.common.seed.unwrap_or(0));
    let sol = match a.method {
        LsrMethod::Exact => exact.clone(),
        LsrMethod::Cg => lsr_cg(&m, &b, a.eps, a.max_iters)?,
        LsrMethod::Sketched => {
            let seed = require_seed(&a.common, "sketched least squares")?;
            let s = a.s.ok_or_else(|| CommandError("--sketch-size is required".into()))?;
            r.param("sketch", a.sketch.as_str()).param("sketch_size", s);
            lsr_sketched(&m, &b, &SketchSpec::new(parse(&a.sketch)?, s, seed))?
        }
        LsrMethod::Preconditioned => {
            let seed = require_seed(&a.common, "preconditioned least squares")?;
            let mut opts = PreconditionOptions::new(n, d, a.eps, seed);
            let s = a.s.unwrap_or(opts.sketch.s);
            opts.sketch = SketchSpec::new(parse(&a.sketch)?, s, seed);
            opts.estimate_kappa = true;
            r.param("sketch", a.sketch.as_str()).param("sketch_size", s).param("eps", a.eps);
            lsr_preconditioned(&m, &b, &opts)?
        }
    };
    r.param("method", format!("{:?}", a.method).to_lowercase());
    r.metric("objective", sol.objective)
        .metric("iterations", sol.iterations as f64);
    if exact.objective > 0.0 {
        r.metric("objective_ratio", sol.objective / exact.objective);
    }
    if let Some(k) = sol.kappa_estimate {
        r.metric("kappa", k);
    }
    r.warnings_from(&sol.warnings);
    write_vector(&sol.x, &a.common, &mut r)?;
    Ok(r)
}

fn ksvd(a: &KsvdArgs) -> Outcome {
    let seed = require_seed(&a.common, "randomized SVD")?;
    let m = load(&a.input, &a.common)?;
    let mut r = RunReport::new("ksvd", seed);
    r.param("method", format!("{:?}", a.method).to_lowercase()).param("k", a.k);
    let result = match a.method {
        KsvdMethod::Lanczos => {
            r.param("q", a.q);
            block_lanczos_ksvd(&m, a.k, a.q, seed)?
        }
        KsvdMethod::Prototype => {
            let s = a.s.unwrap_or(4 * a.k);
            r.param("sketch", a.sketch.as_str()).param("sketch_size", s);
            prototype_ksvd(&m, a.k, &SketchSpec::new(parse(&a.sketch)?, s, seed))?
        }
        KsvdMethod::Faster => {
            let mut sizes = FasterKsvdSizes::for_rank(a.k);
            sizes.s = a.s.unwrap_or(sizes.s);
            sizes.p = a.p.unwrap_or(4 * sizes.s);
            sizes.p_cs = a.p_cs.unwrap_or(4 * sizes.p).min(m.rows());
            r.param("sketch_size", sizes.s).param("p", sizes.p).param("p_cs", sizes.p_cs);
            faster_ksvd(&m, a.k, sizes, seed)?
        }
    }
    .with_error(&m);
    let err = result.error_fro.unwrap_or(f64::NAN);
    r.metric("error_fro", err).metric("passes", result.passes_over_a as f64);
    let tail = tail_energy(&m, a.k);
    if tail > 0.0 {
        r.metric("objective_ratio", err * err / tail);
    }
    r.warnings_from(&result.warnings);
    write_matrix(&DenseMatrix::column_vector(&result.factors.singular_values), &a.common, &mut r)?;
    Ok(r)
}

/// Dense kernel matrix from `--input`, or RBF points and bandwidth from
/// `--data`/`--sigma`.
enum Kernel {
    Dense(DenseMatrix),
    Points(DenseMatrix, f64),
}

fn kernel(src: &KernelSource, common: &Common) -> Result<Kernel, CommandError> {
    match (&src.input, &src.data, src.sigma) {
        (Some(p), None, _) => Ok(Kernel::Dense(load(p, common)?)),
        (None, Some(p), Some(sigma)) => Ok(Kernel::Points(load(p, common)?, sigma)),
        (None, Some(_), None) => Err(CommandError("--data needs --sigma".into())),
        _ => Err(CommandError("pass exactly one of --input or --data".into())),
    }
}

fn spsd(a: &SpsdArgs) -> Outcome {
    let seed = require_seed(&a.common, "SPSD sketching")?;
    let mut r = RunReport::new("spsd", seed);
    r.param("method", format!("{:?}", a.method).to_lowercase()).param("sketch_size", a.s);
    let p = a.p.unwrap_or(4 * a.s);
    let (sk, dense, visited): (SpsdSketch, DenseMatrix, Option<u64>) = match kernel(&a.kernel, &a.common)? {
        Kernel::Dense(k) => {
            let sk = match a.method {
                SpsdMethod::Prototype => {
                    r.param("sketch", a.sketch.as_str());
                    spsd_prototype(&k, &SketchSpec::new(parse(&a.sketch)?, a.s, seed))?
                }
                SpsdMethod::Faster => {
                    r.param("p", p);
                    spsd_faster(&k, a.s, p.min(k.rows()), seed)?
                }
            };
            (sk, k, None)
        }
        Kernel::Points(x, sigma) => {
            r.param("sigma", sigma);
            let view = KernelView::new(&x, KernelSpec::rbf(sigma)?);
            let sk = match a.method {
                SpsdMethod::Prototype => {
                    r.param("sketch", a.sketch.as_str());
                    spsd_prototype(&view, &SketchSpec::new(parse(&a.sketch)?, a.s, seed))?
                }
                SpsdMethod::Faster => {
                    r.param("p", p);
                    spsd_faster(&view, a.s, p.min(x.rows()), seed)?
                }
            };
            let visited = view.entries_evaluated();
            (sk, rbf_kernel(&x, &x, sigma)?, Some(visited))
        }
    };
    let err = sk.error_fro(&dense);
    let z_best = optimal_core(&dense, &sk.q);
    let best = (&dense - &(&(&sk.q * &z_best) * &sk.q.transpose())).frobenius_norm();
    r.metric("error_fro", err);
    if best > 0.0 {
        r.metric("objective_ratio", (err / best).powi(2));
    }
    if let Some(v) = visited {
        r.metric("entries_visited", v as f64);
    }
    r.warnings_from(&sk.warnings);
    write_matrix(&sk.reconstruct(), &a.common, &mut r)?;
    Ok(r)
}

fn nystrom_cmd(a: &NystromArgs) -> Outcome {
    let seed = require_seed(&a.common, "Nyström")?;
    let mut r = RunReport::new("nystrom", seed);
    r.param("sketch_size", a.s);
    if let Some(k) = a.k {
        r.param("k", k);
    }
    let (f, dense, visited) = match kernel(&a.kernel, &a.common)? {
        Kernel::Dense(k) => (nystrom(&k, a.s, a.k, seed)?, k, None),
        Kernel::Points(x, sigma) => {
            r.param("sigma", sigma);
            let view = KernelView::new(&x, KernelSpec::rbf(sigma)?);
            let f = nystrom(&view, a.s, a.k, seed)?;
            let visited = view.entries_evaluated();
            (f, rbf_kernel(&x, &x, sigma)?, Some(visited))
        }
    };
    let err = (&dense - &f.reconstruct()).frobenius_norm();
    r.metric("error_fro", err)
        .metric("relative_error", err / dense.frobenius_norm())
        .metric("rank", f.rank() as f64);
    if let Some(v) = visited {
        r.metric("entries_visited", v as f64);
    }
    r.warnings_from(&f.warnings);
    write_matrix(&f.l, &a.common, &mut r)?;
    Ok(r)
}

fn cur(a: &CurArgs) -> Outcome {
    let seed = require_seed(&a.common, "CUR")?;
    let mut r = RunReport::new("cur", seed);
    let sampler: Sampler = parse(&a.sampler)?;
    let opts = CurOptions {
        p_c: a.p_c,
        p_r: a.p_r,
        sampler,
    };
    r.param("method", format!("{:?}", a.method).to_lowercase())
        .param("c", a.c)
        .param("r", a.r)
        .param("sampler", a.sampler.as_str());
    let (f, dense): (CurFactors, DenseMatrix) = match (&a.input, &a.data, &a.test_data) {
        (Some(p), None, None) => {
            let m = load(p, &a.common)?;
            let f = match a.method {
                CurMethod::Prototype => cur_prototype(&m, a.c, a.r, seed)?,
                CurMethod::Faster => cur_faster(&m, a.c, a.r, opts, seed)?,
            };
            (f, m)
        }
        (None, Some(train), Some(test)) => {
            let sigma = a.sigma.ok_or_else(|| CommandError("--data needs --sigma".into()))?;
            r.param("sigma", sigma);
            let (x_train, x_test) = (load(train, &a.common)?, load(test, &a.common)?);
            let f = match a.method {
                CurMethod::Prototype => {
                    let view = KernelView::cross(&x_test, &x_train, KernelSpec::rbf(sigma)?)?;
                    cur_prototype(&view, a.c, a.r, seed)?
                }
                CurMethod::Faster => cur_faster_kernel(&x_test, &x_train, sigma, a.c, a.r, opts, seed)?,
            };
            (f, rbf_kernel(&x_test, &x_train, sigma)?)
        }
        _ => return Err(CommandError("pass --input, or --data with --test-data".into())),
    };
    let err = f.error_fro(&dense);
    let u = optimal_intersection(&dense, &f.c, &f.r);
    let best = (&dense - &(&(&f.c * &u) * &f.r)).frobenius_norm();
    r.metric("error_fro", err)
        .metric("entries_visited", f.entries_visited as f64);
    if best > 0.0 {
        r.metric("objective_ratio", (err / best).powi(2));
    }
    r.warnings_from(&f.warnings);
    r.param("col_indices", f.col_indices.clone()).param("row_indices", f.row_indices.clone());
    write_matrix(&f.u, &a.common, &mut r)?;
    Ok(r)
}

fn class_labels(path: &Path, common: &Common) -> Result<Vec<usize>, CommandError> {
    load_vector(path, common.format)?
        .into_iter()
        .map(|v| {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(CommandError(format!("{}: label {v} is not a class index", path.display())))
            }
        })
        .collect()
}

fn kpca(a: &KpcaArgs) -> Outcome {
    let seed = require_seed(&a.common, "kernel PCA")?;
    let mut r = RunReport::new("kpca", seed);
    r.param("k", a.k).param("sigma", a.sigma).param("cur", a.cur);
    let train = load(&a.data, &a.common)?;
    let model = kpca_train(&train, a.sigma, a.k, a.s, seed)?;
    r.metric("rank", model.rank() as f64);
    r.warnings_from(&model.warnings);
    let features = match &a.test_data {
        Some(p) => {
            let test = load(p, &a.common)?;
            let f = kpca_test(&train, &test, a.sigma, &model, a.cur, seed)?;
            if let (Some(l), Some(tl)) = (&a.labels, &a.test_labels) {
                let pred = knn_classify(&f, &model.train_features, &class_labels(l, &a.common)?, a.neighbors)?;
                let truth = class_labels(tl, &a.common)?;
                if truth.len() != pred.len() {
                    return Err(CommandError("test labels do not match the test points".into()));
                }
                let hits = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
                r.param("neighbors", a.neighbors);
                r.metric("knn_accuracy", hits as f64 / truth.len() as f64);
            }
            f
        }
        None => model.train_features.clone(),
    };
    write_matrix(&features, &a.common, &mut r)?;
    Ok(r)
}

fn cluster(a: &ClusterArgs) -> Outcome {
    let seed = require_seed(&a.common, "spectral clustering")?;
    let method: ClusterMethod = parse(&a.method)?;
    let mut r = RunReport::new("cluster", seed);
    r.param("k", a.k).param("sigma", a.sigma).param("method", a.method.as_str());
    let x = load(&a.data, &a.common)?;
    let c = spectral_cluster(&x, a.sigma, a.k, method, seed)?;
    if let Some(p) = &a.labels {
        r.metric("accuracy", cluster_accuracy(&c.labels, &class_labels(p, &a.common)?)?);
    }
    let labels: Vec<f64> = c.labels.iter().map(|&l| l as f64).collect();
    write_vector(&labels, &a.common, &mut r)?;
    Ok(r)
}

fn gpr(a: &GprArgs) -> Outcome {
    let seed = require_seed(&a.common, "Gaussian process regression")?;
    let mut r = RunReport::new("gpr", seed);
    r.param("sigma", a.sigma).param("alpha", a.alpha).param("cur", a.cur);
    let x = load(&a.data, &a.common)?;
    let y = load_vector(&a.targets, a.common.format)?;
    let model = gpr_train(&x, &y, a.sigma, a.alpha, a.l, seed)?;
    r.param("l", a.l.unwrap_or(randnla::apps::DEFAULT_GPR_COLUMNS).min(x.rows()));
    r.metric("rank", model.rank as f64);
    r.warnings_from(&model.warnings);
    if a.exact {
        let k = rbf_kernel(&x, &x, a.sigma)?.shift_diagonal(a.alpha);
        let w = randnla::linalg::solve_spd(&k, &DenseMatrix::column_vector(&y))?;
        let diff: f64 = w.column(0).iter().zip(&model.w).map(|(p, q)| (p - q).powi(2)).sum();
        let norm: f64 = w.column(0).iter().map(|v| v * v).sum();
        r.metric("weight_rel_error", (diff / norm).sqrt());
    }
    let out = match &a.test_data {
        Some(p) => gpr_predict(&x, &load(p, &a.common)?, a.sigma, &model.w, a.cur, seed)?,
        None => model.w.clone(),
    };
    write_vector(&out, &a.common, &mut r)?;
    Ok(r)
}

/// Worker cap from `RANDNLA_THREADS`.
pub fn thread_limit() -> Option<usize> {
    std::env::var("RANDNLA_THREADS").ok()?.trim().parse().ok().filter(|&t| t > 0)
}

fn bench(a: &BenchArgs) -> Result<Vec<RunReport>, CommandError> {
    let seed = require_seed(&a.common, "benchmarks")?;
    match a.suite {
        Suite::Acceptance => {
            if a.only.is_empty() {
                return Ok(acceptance::run_suite(seed, thread_limit()));
            }
            let list = acceptance::criteria();
            a.only
                .iter()
                .map(|id| {
                    list.iter()
                        .find(|c| c.id == *id)
                        .map(|c| acceptance::run_criterion(c, seed))
                        .ok_or_else(|| CommandError(format!("no criterion {id}")))
                })
                .collect()
        }
    }
}

/// Exit status for a batch of reports.
pub fn exit_code(reports: &[RunReport]) -> i32 {
    reports
        .iter()
        .fold(Status::Ok, |s, r| s.worst(r.status))
        .exit_code()
}
