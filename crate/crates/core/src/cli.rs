//! Command-line experiment runner: synthetic data generation, layer pruning,
//! baseline sweeps and bound verification, with deterministic CSV output.
//!
//! CSV files start with the schema comment `# maskopt-csv v1`; fields are
//! comma separated, reals carry 17 significant digits with `.` as the
//! decimal separator. With `--threads 1` (the default) output is
//! byte-identical across runs for a fixed configuration and seed.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::baselines::{
    default_damping, magnitude_scores, ria_scores, saliency_mask, sparsegpt_greedy_row,
    wanda_scores, SaliencyMatrix,
};
use crate::error::{Error, Result};
use crate::gram::{gram_from_matrix, gram_precompute};
use crate::io::{load_matrix, save_matrix};
use crate::mask::BinaryMask;
use crate::matrix::DenseMatrix;
use crate::objective::ObjectiveContext;
use crate::oracle::verify_lemma_bound;
use crate::pattern::{PatternSpec, SparsityPattern};
use crate::solver::{fw_solve, fw_solve_fixed, SolverConfig, Warmstart};
use crate::synth::generate_synthetic_layer;

pub const CSV_SCHEMA_COMMENT: &str = "# maskopt-csv v1";
pub const THREADS_ENV: &str = "MASKOPT_THREADS";

/// Formats a real CSV field with 17 significant digits, enough for an exact
/// f64 round trip.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Parser)]
#[command(name = "maskopt", version, about = "Layerwise pruning mask selection via Frank-Wolfe")]
pub struct Cli {
    /// Worker threads for sweeps; defaults to MASKOPT_THREADS or 1.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic weight/activation fixture.
    Gen(GenArgs),
    /// Prune one layer end to end; writes the mask, metrics and a trace.
    Prune(PruneArgs),
    /// Sweep solver settings against the greedy baselines.
    Bench(BenchArgs),
    /// Verify the rounding-error bound on random row instances.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub dout: usize,
    #[arg(long)]
    pub din: usize,
    #[arg(long, default_value_t = 128)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leading activation rows scaled to model outlier features.
    #[arg(long, default_value_t = 0)]
    pub outlier_cols: usize,
    #[arg(long, default_value_t = 1.0)]
    pub outlier_scale: f64,
    /// Also write gram.mxf with G = X Xᵀ.
    #[arg(long)]
    pub emit_gram: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PruneArgs {
    #[arg(long)]
    pub weights: PathBuf,
    /// Activation matrix; mutually exclusive with --gram.
    #[arg(long, conflicts_with = "gram")]
    pub acts: Option<PathBuf>,
    /// Precomputed Gram matrix G = X Xᵀ.
    #[arg(long)]
    pub gram: Option<PathBuf>,
    /// Pattern spec: u:K, u%:P, row:K, or M:N (e.g. 2:4).
    #[arg(long)]
    pub pattern: String,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.9)]
    pub alpha: f64,
    /// wanda | ria | magnitude | file:PATH.
    #[arg(long, default_value = "wanda")]
    pub warmstart: String,
    /// Trace interval in steps; 0 writes no trace file.
    #[arg(long, default_value_t = 0)]
    pub trace_every: usize,
    /// Gram accumulation batch width; 0 processes all columns at once.
    #[arg(long, default_value_t = 0)]
    pub batch_cols: usize,
    /// Evaluate gradients with the fixed weights merged into the iterate
    /// instead of treating them as pruned during the solve.
    #[arg(long)]
    pub merge_fixed: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub dout: usize,
    #[arg(long)]
    pub din: usize,
    #[arg(long, value_delimiter = ',', default_value = "128")]
    pub samples: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    pub iters: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    pub alphas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// wanda | ria | magnitude.
    #[arg(long, default_value = "wanda")]
    pub warmstart: String,
    #[arg(long)]
    pub pattern: String,
    #[arg(long, default_value_t = 0)]
    pub outlier_cols: usize,
    #[arg(long, default_value_t = 1.0)]
    pub outlier_scale: f64,
    /// Timing-harness repetitions per sample count; 0 skips the (inherently
    /// non-deterministic) timing.csv.
    #[arg(long, default_value_t = 0)]
    pub time_reps: usize,
    #[arg(long, default_value_t = 100)]
    pub time_iters: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 30)]
    pub instances: usize,
    #[arg(long)]
    pub din: usize,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 2000)]
    pub iters: usize,
    /// Calibration columns per instance; 0 uses d_in.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Warmstart flag value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WarmstartSpec {
    Wanda,
    Ria,
    Magnitude,
    File(PathBuf),
}

impl FromStr for WarmstartSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wanda" => Ok(WarmstartSpec::Wanda),
            "ria" => Ok(WarmstartSpec::Ria),
            "magnitude" => Ok(WarmstartSpec::Magnitude),
            _ => {
                if let Some(path) = s.strip_prefix("file:") {
                    Ok(WarmstartSpec::File(PathBuf::from(path)))
                } else {
                    Err(Error::InvalidArgument(format!(
                        "unknown warmstart {s:?}; expected wanda, ria, magnitude or file:PATH"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for WarmstartSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WarmstartSpec::Wanda => write!(f, "wanda"),
            WarmstartSpec::Ria => write!(f, "ria"),
            WarmstartSpec::Magnitude => write!(f, "magnitude"),
            WarmstartSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Resolved experiment settings for one solver invocation.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub d_out: usize,
    pub d_in: usize,
    pub samples: usize,
    pub outlier_cols: usize,
    pub outlier_scale: f64,
    pub pattern: PatternSpec,
    pub iters: usize,
    pub alpha: f64,
    pub warmstart: WarmstartSpec,
    pub trace_every: usize,
    pub out: PathBuf,
}

/// Parses CLI arguments from the process environment and runs the selected
/// command, returning the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) | Error::Format(_) => 2,
        _ => 3,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    let threads = resolve_threads(cli.threads)?;
    match &cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Prune(args) => cmd_prune(args),
        Command::Bench(args) => cmd_bench(args, threads),
        Command::Oracle(args) => cmd_oracle(args, threads),
    }
}

fn resolve_threads(flag: Option<usize>) -> Result<usize> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(Error::InvalidArgument("--threads must be at least 1".to_string()));
        }
        return Ok(n);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::InvalidArgument(format!("invalid {THREADS_ENV}={v:?}"))),
        Err(_) => Ok(1),
    }
}

fn write_csv(path: &Path, header: &str, rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(CSV_SCHEMA_COMMENT);
    out.push('\n');
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn cmd_gen(args: &GenArgs) -> Result<i32> {
    let (w, x) = generate_synthetic_layer(
        args.dout,
        args.din,
        args.samples,
        args.seed,
        args.outlier_cols,
        args.outlier_scale,
    )?;
    fs::create_dir_all(&args.out)?;
    let w_path = args.out.join("weights.mxf");
    let x_path = args.out.join("acts.mxf");
    save_matrix(&w_path, &w)?;
    save_matrix(&x_path, &x)?;
    println!("wrote {}", w_path.display());
    println!("wrote {}", x_path.display());
    if args.emit_gram {
        let cache = gram_precompute(&x, &w, args.samples)?;
        let g_path = args.out.join("gram.mxf");
        save_matrix(&g_path, cache.g())?;
        println!("wrote {}", g_path.display());
    }
    Ok(0)
}

struct ResolvedWarmstart {
    warmstart: Warmstart,
    saliency: SaliencyMatrix,
    warm_mask: BinaryMask,
}

/// Builds the solver warmstart, the saliency used for weight fixing, and the
/// full-budget warmstart mask used as the comparison point in metrics. File
/// warmstarts fall back to Wanda saliency for the fixing step.
fn resolve_warmstart(
    ctx: &ObjectiveContext,
    spec: &WarmstartSpec,
    pattern: &SparsityPattern,
) -> Result<ResolvedWarmstart> {
    let (warmstart, saliency) = match spec {
        WarmstartSpec::Wanda => (
            Warmstart::Wanda,
            wanda_scores(ctx.weights(), ctx.cache().g())?,
        ),
        WarmstartSpec::Ria => (Warmstart::Ria, ria_scores(ctx.weights(), ctx.cache().g())?),
        WarmstartSpec::Magnitude => (Warmstart::Magnitude, magnitude_scores(ctx.weights())?),
        WarmstartSpec::File(path) => {
            let values = load_matrix(path)?;
            let mask = BinaryMask::new(values, pattern.clone())?;
            (
                Warmstart::Custom(mask),
                wanda_scores(ctx.weights(), ctx.cache().g())?,
            )
        }
    };
    let warm_mask = match &warmstart {
        Warmstart::Custom(mask) => mask.clone(),
        _ => saliency_mask(&saliency, pattern)?,
    };
    Ok(ResolvedWarmstart {
        warmstart,
        saliency,
        warm_mask,
    })
}

fn relative_reduction(warm_loss: f64, new_loss: f64) -> f64 {
    if warm_loss == 0.0 {
        0.0
    } else {
        1.0 - new_loss / warm_loss
    }
}

pub const METRICS_HEADER: &str = "command,pattern,warmstart,alpha,iters,d_out,d_in,budget,warmstart_loss,continuous_loss,thresholded_loss,relative_reduction";
pub const TRACE_HEADER: &str = "step,loss_continuous,loss_thresholded,fw_gap,threshold_residual";

pub fn cmd_prune(args: &PruneArgs) -> Result<i32> {
    let w = load_matrix(&args.weights)?;
    w.ensure_finite("weights")?;
    let cache = match (&args.acts, &args.gram) {
        (Some(acts), None) => {
            let x = load_matrix(acts)?;
            let batch = if args.batch_cols == 0 {
                x.cols().max(1)
            } else {
                args.batch_cols
            };
            gram_precompute(&x, &w, batch)?
        }
        (None, Some(gram)) => gram_from_matrix(load_matrix(gram)?, &w)?,
        _ => {
            return Err(Error::InvalidArgument(
                "exactly one of --acts or --gram is required".to_string(),
            ))
        }
    };
    let ctx = ObjectiveContext::new(w, cache)?;
    let spec: PatternSpec = args.pattern.parse()?;
    let pattern = spec.resolve(ctx.d_out(), ctx.d_in())?;
    let warm_spec: WarmstartSpec = args.warmstart.parse()?;
    let resolved = resolve_warmstart(&ctx, &warm_spec, &pattern)?;
    let warm_loss = ctx.loss_binary(&resolved.warm_mask)?;

    let mut cfg = SolverConfig::new(pattern.clone());
    cfg.iterations = args.iters;
    cfg.alpha = args.alpha;
    cfg.warmstart = resolved.warmstart;
    cfg.trace_every = args.trace_every;
    cfg.merge_fixed_into_iterate = args.merge_fixed;

    let (mask, trace) = fw_solve_fixed(&ctx, &cfg, &resolved.saliency)?;
    let thresholded_loss = ctx.loss_binary(&mask)?;

    fs::create_dir_all(&args.out)?;
    save_matrix(args.out.join("mask.mxf"), mask.values())?;

    let row = vec![
        "prune".to_string(),
        spec.to_string(),
        warm_spec.to_string(),
        fmt_real(args.alpha),
        args.iters.to_string(),
        ctx.d_out().to_string(),
        ctx.d_in().to_string(),
        pattern.budget(ctx.d_out(), ctx.d_in()).to_string(),
        fmt_real(warm_loss),
        fmt_real(trace.final_loss_continuous),
        fmt_real(thresholded_loss),
        fmt_real(relative_reduction(warm_loss, thresholded_loss)),
    ];
    write_csv(&args.out.join("metrics.csv"), METRICS_HEADER, &[row])?;

    if args.trace_every > 0 {
        let rows: Vec<Vec<String>> = trace
            .records
            .iter()
            .map(|r| {
                vec![
                    r.step.to_string(),
                    fmt_real(r.loss_continuous),
                    fmt_real(r.loss_thresholded),
                    fmt_real(r.fw_gap),
                    fmt_real(r.threshold_residual),
                ]
            })
            .collect();
        write_csv(&args.out.join("trace.csv"), TRACE_HEADER, &rows)?;
    }
    Ok(0)
}

pub const BENCH_HEADER: &str = "method,seed,d_out,d_in,samples,pattern,warmstart,alpha,iters,loss,continuous_loss,recon_loss,relative_reduction";
pub const TIMING_HEADER: &str = "samples,iters,reps,median_iter_ns";

/// Per-row nonzero shares for the row-wise SparseGPT baseline: the exact row
/// budget where the pattern defines one, an even split (remainder to the
/// leading rows) for unstructured budgets.
fn sparsegpt_row_budgets(pattern: &SparsityPattern, rows: usize, cols: usize) -> Vec<usize> {
    match *pattern {
        SparsityPattern::PerRow { k_row } => vec![k_row; rows],
        SparsityPattern::Nm { n, m } => vec![(cols / n) * m; rows],
        SparsityPattern::Unstructured { k } => {
            let k = k.min(rows * cols);
            let base = k / rows;
            let rem = k % rows;
            (0..rows)
                .map(|i| (base + usize::from(i < rem)).min(cols))
                .collect()
        }
    }
}

struct BenchCellOutput {
    rows: Vec<Vec<String>>,
}

fn bench_cell(args: &BenchArgs, seed: u64, samples: usize) -> Result<BenchCellOutput> {
    let (w, x) = generate_synthetic_layer(
        args.dout,
        args.din,
        samples,
        seed,
        args.outlier_cols,
        args.outlier_scale,
    )?;
    let cache = gram_precompute(&x, &w, samples)?;
    let ctx = ObjectiveContext::new(w, cache)?;
    let spec: PatternSpec = args.pattern.parse()?;
    let pattern = spec.resolve(ctx.d_out(), ctx.d_in())?;
    let warm_spec: WarmstartSpec = args.warmstart.parse()?;
    if matches!(warm_spec, WarmstartSpec::File(_)) {
        return Err(Error::InvalidArgument(
            "bench supports wanda, ria and magnitude warmstarts".to_string(),
        ));
    }
    let resolved = resolve_warmstart(&ctx, &warm_spec, &pattern)?;
    let warm_loss = ctx.loss_binary(&resolved.warm_mask)?;

    let base_cells = |method: &str| {
        vec![
            method.to_string(),
            seed.to_string(),
            ctx.d_out().to_string(),
            ctx.d_in().to_string(),
            samples.to_string(),
            spec.to_string(),
        ]
    };
    let mut rows = Vec::new();

    for (method, scores) in [
        ("wanda", wanda_scores(ctx.weights(), ctx.cache().g())?),
        ("ria", ria_scores(ctx.weights(), ctx.cache().g())?),
        ("magnitude", magnitude_scores(ctx.weights())?),
    ] {
        let mask = saliency_mask(&scores, &pattern)?;
        let loss = ctx.loss_binary(&mask)?;
        let mut row = base_cells(method);
        row.extend([
            String::new(),
            String::new(),
            String::new(),
            fmt_real(loss),
            String::new(),
            String::new(),
            String::new(),
        ]);
        rows.push(row);
    }

    {
        let g = ctx.cache().g();
        let damping = default_damping(g);
        let budgets = sparsegpt_row_budgets(&pattern, ctx.d_out(), ctx.d_in());
        let mut mask_values = DenseMatrix::zeros(ctx.d_out(), ctx.d_in());
        let mut recon_loss = 0.0;
        for i in 0..ctx.d_out() {
            let w_row = ctx.weights().row(i);
            let (row_mask, rebuilt) = sparsegpt_greedy_row(w_row, g, budgets[i], damping)?;
            mask_values
                .row_mut(i)
                .copy_from_slice(row_mask.values().as_slice());
            let diff: Vec<f64> = rebuilt.iter().zip(w_row).map(|(r, w)| r - w).collect();
            for (a, &da) in diff.iter().enumerate() {
                if da == 0.0 {
                    continue;
                }
                let g_row = g.row(a);
                let dot: f64 = g_row.iter().zip(&diff).map(|(x, y)| x * y).sum();
                recon_loss += da * dot;
            }
        }
        let mask_loss = ctx.loss_values(&mask_values)?;
        let mut row = base_cells("sparsegpt");
        row.extend([
            String::new(),
            String::new(),
            String::new(),
            fmt_real(mask_loss),
            String::new(),
            fmt_real(recon_loss),
            String::new(),
        ]);
        rows.push(row);
    }

    for &iters in &args.iters {
        for &alpha in &args.alphas {
            let mut cfg = SolverConfig::new(pattern.clone());
            cfg.iterations = iters;
            cfg.alpha = alpha;
            cfg.warmstart = resolved.warmstart.clone();
            cfg.trace_every = 0;
            let (mask, trace) = fw_solve_fixed(&ctx, &cfg, &resolved.saliency)?;
            let loss = ctx.loss_binary(&mask)?;
            let mut row = base_cells("fw");
            row.extend([
                warm_spec.to_string(),
                fmt_real(alpha),
                iters.to_string(),
                fmt_real(loss),
                fmt_real(trace.final_loss_continuous),
                String::new(),
                fmt_real(relative_reduction(warm_loss, loss)),
            ]);
            rows.push(row);
        }
    }
    Ok(BenchCellOutput { rows })
}

fn bench_timing(args: &BenchArgs) -> Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for &samples in &args.samples {
        let seed = *args.seeds.first().unwrap_or(&0);
        let (w, x) = generate_synthetic_layer(
            args.dout,
            args.din,
            samples,
            seed,
            args.outlier_cols,
            args.outlier_scale,
        )?;
        let cache = gram_precompute(&x, &w, samples)?;
        let ctx = ObjectiveContext::new(w, cache)?;
        let spec: PatternSpec = args.pattern.parse()?;
        let pattern = spec.resolve(ctx.d_out(), ctx.d_in())?;
        let scores = wanda_scores(ctx.weights(), ctx.cache().g())?;
        let warm = saliency_mask(&scores, &pattern)?;
        let mut cfg = SolverConfig::new(pattern.clone());
        cfg.iterations = args.time_iters;
        cfg.trace_every = 0;
        let mut per_iter: Vec<u128> = Vec::with_capacity(args.time_reps);
        for _ in 0..args.time_reps {
            let start = Instant::now();
            let _ = fw_solve(&ctx, &cfg, &warm)?;
            per_iter.push(start.elapsed().as_nanos() / args.time_iters.max(1) as u128);
        }
        per_iter.sort_unstable();
        let median = per_iter[per_iter.len() / 2];
        rows.push(vec![
            samples.to_string(),
            args.time_iters.to_string(),
            args.time_reps.to_string(),
            median.to_string(),
        ]);
    }
    Ok(rows)
}

pub fn cmd_bench(args: &BenchArgs, threads: usize) -> Result<i32> {
    if args.samples.is_empty() || args.iters.is_empty() || args.alphas.is_empty() || args.seeds.is_empty() {
        return Err(Error::InvalidArgument("empty sweep grid".to_string()));
    }
    let cells: Vec<(u64, usize)> = args
        .seeds
        .iter()
        .flat_map(|&seed| args.samples.iter().map(move |&s| (seed, s)))
        .collect();
    let compute = |&(seed, samples): &(u64, usize)| bench_cell(args, seed, samples);
    let outputs: Vec<Result<BenchCellOutput>> = if threads <= 1 {
        cells.iter().map(compute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| cells.par_iter().map(compute).collect())
    };
    let mut rows = Vec::new();
    for out in outputs {
        rows.extend(out?.rows);
    }
    fs::create_dir_all(&args.out)?;
    write_csv(&args.out.join("bench.csv"), BENCH_HEADER, &rows)?;
    if args.time_reps > 0 {
        let timing = bench_timing(args)?;
        write_csv(&args.out.join("timing.csv"), TIMING_HEADER, &timing)?;
    }
    Ok(0)
}

pub const BOUNDS_HEADER: &str =
    "instance,seed,d_in,k,r,iters,epsilon,lambda_max,tau,raw_mass,bound_value,f_hat,f_int,satisfied";

pub fn cmd_oracle(args: &OracleArgs, threads: usize) -> Result<i32> {
    let samples = if args.samples == 0 { args.din } else { args.samples };
    let indices: Vec<usize> = (0..args.instances).collect();
    let compute = |&i: &usize| -> Result<Vec<String>> {
        let seed = args.seed + i as u64;
        let (w, x) = generate_synthetic_layer(1, args.din, samples, seed, 0, 1.0)?;
        let cache = gram_precompute(&x, &w, samples)?;
        let report = verify_lemma_bound(w.row(0), cache.g(), args.k, args.iters)?;
        Ok(vec![
            i.to_string(),
            seed.to_string(),
            args.din.to_string(),
            report.k.to_string(),
            report.r.to_string(),
            args.iters.to_string(),
            fmt_real(report.epsilon),
            fmt_real(report.lambda_max),
            fmt_real(report.tau),
            fmt_real(report.raw_mass),
            fmt_real(report.bound_value),
            fmt_real(report.f_hat),
            fmt_real(report.f_int),
            report.satisfied.to_string(),
        ])
    };
    let outputs: Vec<Result<Vec<String>>> = if threads <= 1 {
        indices.iter().map(compute).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        pool.install(|| indices.par_iter().map(compute).collect())
    };
    let mut rows = Vec::new();
    for out in outputs {
        rows.push(out?);
    }
    fs::create_dir_all(&args.out)?;
    write_csv(&args.out.join("bounds.csv"), BOUNDS_HEADER, &rows)?;
    let violations = rows.iter().filter(|r| r[13] == "false").count();
    if violations > 0 {
        eprintln!("{violations} bound violation(s); see bounds.csv");
        return Ok(4);
    }
    Ok(0)
}
