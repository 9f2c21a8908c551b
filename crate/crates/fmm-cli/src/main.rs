//! Command-line interface to the fmm library.
//!
//! Subcommands: `validate` checks algorithm triples against the defining
//! equations (exit 0 valid, 1 incorrect, 2 malformed input); `analyze`
//! prints stability quantities and error bounds; `gen` writes random
//! operand pairs; `multiply` runs a recursion plan over stored matrices,
//! optionally scaled and checked; `scale` prints a scaling trace;
//! `bench-error` sweeps measured errors against bounds into CSV;
//! `bench-perf` times multiplications.


use std::collections::HashMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fmm::{
    engine, oracle, scaling, stability, AlgoError, BilinearAlgorithm, DdMatrix, ExecMode, Matrix,
    RecursionPlan, ScalingConfig, SummationModel,
};

use fmm_cli::dist::{self, Dist};
use fmm_cli::expr::{self, AlgExpr, PlanExpr, ScalingSpec};

// ---------------------------------------------------------------------------
// Argument structures
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "fmm",
    version,
    about = "Fast matrix multiplication: exact validation, stability analysis, \
             execution under recursion plans, diagonal scaling, and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an algorithm triple against the defining equations.
    Validate(ValidateArgs),
    /// Print stability quantities and error bounds.
    Analyze(AnalyzeArgs),
    /// Generate a random operand pair.
    Gen(GenArgs),
    /// Multiply two stored matrices under a recursion plan.
    Multiply(MultiplyArgs),
    /// Diagonally scale a stored operand pair and print the trace.
    Scale(ScaleArgs),
    /// Sweep measured errors against bounds, one CSV row per configuration.
    BenchError(BenchErrorArgs),
    /// Time multiplications and report effective GFLOP/s.
    BenchPerf(BenchPerfArgs),
}

#[derive(Args)]
struct ValidateArgs {
    /// Algorithm file in the text triple format.
    file: Option<PathBuf>,
    /// Validate a built-in expression instead of a file.
    #[arg(long, conflicts_with = "file")]
    algo: Option<String>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Algorithm expression to analyze.
    #[arg(long)]
    algo: Option<String>,
    /// Algorithm file to analyze instead of an expression.
    #[arg(long, conflicts_with = "algo")]
    file: Option<PathBuf>,
    /// Recursion plan to analyze instead of a single algorithm (needs --k).
    #[arg(long, conflicts_with_all = ["algo", "file"])]
    plan: Option<String>,
    /// Summation model: sequential or dnc.
    #[arg(long, default_value = "sequential")]
    model: String,
    /// Inner dimension K for error bounds.
    #[arg(long)]
    k: Option<u64>,
    /// Levels for a stationary bound table, e.g. 1,2,3 or 0..4.
    #[arg(long)]
    levels: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 512)]
    m: usize,
    #[arg(long, default_value_t = 512)]
    k: usize,
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Input distribution: u01, u11, dist2, or dist3.
    #[arg(long, default_value = "u01")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for a.bin and b.bin (a.txt, b.txt with --text).
    #[arg(long)]
    out: PathBuf,
    /// Write text matrices instead of binary.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct MultiplyArgs {
    /// Left operand file.
    a: PathBuf,
    /// Right operand file.
    b: PathBuf,
    /// Product output file.
    out: Option<PathBuf>,
    /// Recursion plan: classical, ALG:L=N, seq(...), or tree(...).
    #[arg(long, default_value = "classical")]
    plan: String,
    /// Scaling: none, outside, inside, outside-inside, inside-outside,
    /// repeated, or repeated:N.
    #[arg(long, default_value = "none")]
    scaling: String,
    /// Stopping tolerance for repeated scaling.
    #[arg(long, default_value_t = 1e-14)]
    tau: f64,
    /// Step cap for repeated scaling (overrides repeated:N).
    #[arg(long)]
    max_steps: Option<usize>,
    /// Round scaling factors to powers of two.
    #[arg(long)]
    pow2: bool,
    /// First step of repeated scaling: outside or inside.
    #[arg(long, default_value = "outside")]
    first_step: String,
    /// Fused multiply-add base kernel.
    #[arg(long)]
    fast: bool,
    /// Separate rounding per operation (the default).
    #[arg(long, conflicts_with = "fast")]
    strict: bool,
    /// Compare against the extended-precision reference.
    #[arg(long)]
    check: bool,
    /// Read and write text matrices.
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct ScaleArgs {
    /// Left operand file.
    a: PathBuf,
    /// Right operand file.
    b: PathBuf,
    /// Scaling mode (as in multiply).
    #[arg(long, default_value = "repeated")]
    scaling: String,
    #[arg(long, default_value_t = 1e-14)]
    tau: f64,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    pow2: bool,
    #[arg(long, default_value = "outside")]
    first_step: String,
    /// Read matrices as text.
    #[arg(long)]
    text: bool,
    /// Directory for a_scaled, b_scaled, d_a.txt, and d_b.txt.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchErrorArgs {
    /// Comma-separated algorithm expressions.
    #[arg(long, default_value = "strassen")]
    algo: String,
    #[arg(long, default_value_t = 512)]
    m: usize,
    #[arg(long, default_value_t = 512)]
    k: usize,
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Comma-separated distributions.
    #[arg(long, default_value = "u01")]
    dist: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fast recursion depths: comma-separated with inclusive ranges.
    #[arg(long, default_value = "1..4")]
    levels: String,
    /// Comma-separated scaling specs.
    #[arg(long, default_value = "none")]
    scaling: String,
    #[arg(long, default_value_t = 1e-14)]
    tau: f64,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    pow2: bool,
    #[arg(long, default_value = "outside")]
    first_step: String,
    /// Fused multiply-add base kernel.
    #[arg(long)]
    fast: bool,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchPerfArgs {
    /// Comma-separated algorithm expressions.
    #[arg(long, default_value = "strassen")]
    algo: String,
    #[arg(long, default_value_t = 512)]
    m: usize,
    #[arg(long, default_value_t = 512)]
    k: usize,
    #[arg(long, default_value_t = 512)]
    n: usize,
    /// Fast recursion depths: comma-separated with inclusive ranges.
    #[arg(long, default_value = "1..4")]
    levels: String,
    /// Comma-separated scaling specs.
    #[arg(long, default_value = "none")]
    scaling: String,
    /// Timed repetitions per configuration; the median is reported.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fused multiply-add base kernel.
    #[arg(long)]
    fast: bool,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate(args) => cmd_validate(args),
        Command::Analyze(args) => cmd_analyze(args).map(|()| ExitCode::SUCCESS),
        Command::Gen(args) => cmd_gen(args).map(|()| ExitCode::SUCCESS),
        Command::Multiply(args) => cmd_multiply(args).map(|()| ExitCode::SUCCESS),
        Command::Scale(args) => cmd_scale(args).map(|()| ExitCode::SUCCESS),
        Command::BenchError(args) => cmd_bench_error(args).map(|()| ExitCode::SUCCESS),
        Command::BenchPerf(args) => cmd_bench_perf(args).map(|()| ExitCode::SUCCESS),
    }
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode> {
    let candidate = match (&args.file, &args.algo) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            match fmm::parse_algorithm(&text) {
                Ok(candidate) => candidate,
                Err(err) => {
                    eprintln!("error: {err}");
                    return Ok(ExitCode::from(2));
                }
            }
        }
        (None, Some(text)) => {
            // Built-in expressions carry validated algorithms by
            // construction; reaching build() is the whole check.
            match AlgExpr::parse(text).and_then(|e| e.build()) {
                Ok(alg) => {
                    print_valid(&alg);
                    return Ok(ExitCode::SUCCESS);
                }
                Err(err) => {
                    eprintln!("error: {err:#}");
                    return Ok(ExitCode::from(2));
                }
            }
        }
        _ => {
            eprintln!("error: provide an algorithm file or --algo");
            return Ok(ExitCode::from(2));
        }
    };
    match fmm::algo::validate(candidate) {
        Ok(alg) => {
            print_valid(&alg);
            Ok(ExitCode::SUCCESS)
        }
        Err(AlgoError::Invalid(violations)) => {
            println!("invalid: {} violated equations", violations.len());
            for violation in violations.iter().take(5) {
                println!("  {violation}");
            }
            if violations.len() > 5 {
                println!("  ...");
            }
            Ok(ExitCode::from(1))
        }
        Err(err) => {
            eprintln!("error: {err}");
            Ok(ExitCode::from(2))
        }
    }
}

fn print_valid(alg: &BilinearAlgorithm) {
    let (m0, k0, n0) = alg.dims();
    println!(
        "valid: {} <{m0}, {k0}, {n0}> rank {}",
        alg.name(),
        alg.rank()
    );
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let model = parse_model(&args.model)?;
    if let Some(plan_text) = &args.plan {
        let plan = PlanExpr::parse(plan_text)?.build()?;
        let k = args
            .k
            .ok_or_else(|| anyhow!("--plan analysis needs --k, the inner dimension"))?;
        let report = stability::analyze_plan_with(&plan, k, model)?;
        println!("plan {plan_text}");
        println!(
            "depth {}  k0-product {}  base-ratio {}",
            report.depth, report.k0_product, report.ratio
        );
        println!("delta {}", report.delta_max);
        println!("xi {}", report.xi_max);
        println!("bound-coefficient {:e}", report.bound_coefficient);
        println!(
            "bound(K={k}, unit norms) {:e}",
            report.bound_coefficient * f64::EPSILON
        );
        return Ok(());
    }

    let alg = match (&args.algo, &args.file) {
        (Some(text), None) => AlgExpr::parse(text)?.build()?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            fmm::algo::validate(fmm::parse_algorithm(&text)?)?
        }
        _ => bail!("provide --algo, --file, or --plan"),
    };
    let report = stability::analyze_with(&alg, model);
    let (m0, k0, n0) = alg.dims();
    println!("algorithm {}", alg.name());
    println!(
        "dims <{m0}, {k0}, {n0}>  rank {}  nnz {}",
        report.rank, report.nnz
    );
    println!("alpha {:?}", report.alpha);
    println!("beta {:?}", report.beta);
    println!("gamma {:?}", report.gamma);
    println!("a {}", rat_vec(&report.a));
    println!("b {}", rat_vec(&report.b));
    println!("q {:?}  Q {}", report.q, report.big_q);
    println!("e {}  E {}", rat_vec(&report.e), report.big_e);
    println!("legacy-E {}", report.legacy_e);
    if let Some(exponent) = report.stab_exponent {
        println!("stability-exponent {exponent}");
    }
    if let Some(k) = args.k {
        let levels = match &args.levels {
            Some(text) => expr::parse_levels(text)?,
            None => vec![1, 2, 3, 4],
        };
        for level in levels {
            match stability::bound_stationary(&report, level, k, 1.0, 1.0, f64::EPSILON) {
                Ok(bound) => {
                    let (flops, amp) = stability::tradeoff_point(&report, level);
                    println!(
                        "L={level}  bound {bound:e}  flop-ratio {flops:.6}  amp-ratio {amp:.6}"
                    );
                }
                Err(err) => println!("L={level}  {err}"),
            }
        }
    }
    Ok(())
}

fn parse_model(text: &str) -> Result<SummationModel> {
    match text.trim() {
        "sequential" | "seq" => Ok(SummationModel::Sequential),
        "dnc" | "divide-and-conquer" => Ok(SummationModel::DivideAndConquer),
        other => bail!("unknown summation model '{other}': expected sequential or dnc"),
    }
}

fn rat_vec(values: &[fmm::Rat]) -> String {
    let parts: Vec<String> = values.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

fn cmd_gen(args: GenArgs) -> Result<()> {
    let dist = Dist::parse(&args.dist)?;
    let (a, b) = dist::generate(dist, args.m, args.k, args.n, args.seed);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let (name_a, name_b) = if args.text {
        ("a.txt", "b.txt")
    } else {
        ("a.bin", "b.bin")
    };
    let path_a = args.out.join(name_a);
    let path_b = args.out.join(name_b);
    write_matrix(&a, &path_a, args.text)?;
    write_matrix(&b, &path_b, args.text)?;
    println!(
        "wrote {} ({}x{}) and {} ({}x{}), dist {}, seed {}",
        path_a.display(),
        args.m,
        args.k,
        path_b.display(),
        args.k,
        args.n,
        dist.name(),
        args.seed
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// multiply
// ---------------------------------------------------------------------------

fn cmd_multiply(args: MultiplyArgs) -> Result<()> {
    let plan = PlanExpr::parse(&args.plan)?.build()?;
    let spec = ScalingSpec::parse(&args.scaling)?;
    let cfg = config_from_spec(&spec, args.tau, args.max_steps, args.pow2, &args.first_step)?;
    let a = read_matrix(&args.a, args.text)?;
    let b = read_matrix(&args.b, args.text)?;
    let mode = exec_mode(args.fast);

    let start = Instant::now();
    let (c, state, _) = scaling::scaled_multiply_traced(&a, &b, &plan, &cfg, mode)?;
    let seconds = start.elapsed().as_secs_f64();
    println!(
        "{}x{} * {}x{}  plan {}  scaling {} ({} steps)  {:.3}s  {:.3} effective GFLOP/s",
        a.rows(),
        a.cols(),
        b.rows(),
        b.cols(),
        args.plan.trim(),
        spec,
        state.steps_taken,
        seconds,
        oracle::effective_gflops(a.rows(), a.cols(), b.cols(), seconds)?
    );
    if let Some(out) = &args.out {
        write_matrix(&c, out, args.text)?;
        println!("wrote {}", out.display());
    }
    if args.check {
        let bound = plan_bound(&plan, &a, &b)?;
        let reference = oracle::multiply_reference(&a, &b)?;
        let report = oracle::compare(&c, &reference, Some(bound))?;
        println!("max_abs_err {:e}", report.max_abs_err);
        println!("max_rel_err {:e}", report.max_rel_err);
        println!(
            "bound {bound:e}  within {}",
            report.within_bound().unwrap_or(false)
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// scale
// ---------------------------------------------------------------------------

fn cmd_scale(args: ScaleArgs) -> Result<()> {
    let spec = ScalingSpec::parse(&args.scaling)?;
    let cfg = config_from_spec(&spec, args.tau, args.max_steps, args.pow2, &args.first_step)?;
    let a = read_matrix(&args.a, args.text)?;
    let b = read_matrix(&args.b, args.text)?;
    let (state, trace) = scaling::scale(&a, &b, &cfg)?;
    print!("{}", trace.to_text());
    println!(
        "steps {}  cap-reached {}  fired {}",
        state.steps_taken,
        state.cap_reached,
        trace.fired()
    );
    println!(
        "norm_a {:e} -> {:e}  norm_b {:e} -> {:e}",
        a.max_norm(),
        state.a_scaled.max_norm(),
        b.max_norm(),
        state.b_scaled.max_norm()
    );
    println!("d_a in [{}]", span(&state.d_a));
    println!("d_b in [{}]", span(&state.d_b));
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        let (name_a, name_b) = if args.text {
            ("a_scaled.txt", "b_scaled.txt")
        } else {
            ("a_scaled.bin", "b_scaled.bin")
        };
        write_matrix(&state.a_scaled, &out.join(name_a), args.text)?;
        write_matrix(&state.b_scaled, &out.join(name_b), args.text)?;
        write_diagonal(&state.d_a, &out.join("d_a.txt"))?;
        write_diagonal(&state.d_b, &out.join("d_b.txt"))?;
        println!("wrote scaled pair and diagonals to {}", out.display());
    }
    Ok(())
}

fn span(values: &[f64]) -> String {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    format!("{lo:e}, {hi:e}")
}

fn write_diagonal(values: &[f64], path: &Path) -> Result<()> {
    let mut file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    for v in values {
        writeln!(file, "{v}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bench-error
// ---------------------------------------------------------------------------

fn cmd_bench_error(args: BenchErrorArgs) -> Result<()> {
    let algos = parse_algo_list(&args.algo)?;
    let dists = args
        .dist
        .split(',')
        .map(Dist::parse)
        .collect::<Result<Vec<_>>>()?;
    let levels = expr::parse_levels(&args.levels)?;
    let specs = args
        .scaling
        .split(',')
        .map(ScalingSpec::parse)
        .collect::<Result<Vec<_>>>()?;
    let mode = exec_mode(args.fast);
    let mut writer = csv_writer(&args.out)?;
    writer.write_record([
        "algo",
        "m",
        "k",
        "n",
        "dist",
        "seed",
        "L",
        "scaling",
        "steps_taken",
        "max_abs_err",
        "max_rel_err",
        "bound",
    ])?;
    writer.flush()?;

    for dist in &dists {
        let (a, b) = dist::generate(*dist, args.m, args.k, args.n, args.seed);
        // One reference product serves every configuration of this pair.
        let reference: DdMatrix = oracle::multiply_reference(&a, &b)?;
        for (name, alg) in &algos {
            for &level in &levels {
                let plan = RecursionPlan::stationary(Arc::new(alg.clone()), level);
                let bound = plan_bound(&plan, &a, &b)?;
                for spec in &specs {
                    let cfg = config_from_spec(
                        spec,
                        args.tau,
                        args.max_steps,
                        args.pow2,
                        &args.first_step,
                    )?;
                    let (c, state, _) = scaling::scaled_multiply_traced(&a, &b, &plan, &cfg, mode)?;
                    let report = oracle::compare(&c, &reference, Some(bound))?;
                    writer.write_record([
                        name.clone(),
                        args.m.to_string(),
                        args.k.to_string(),
                        args.n.to_string(),
                        dist.name().to_string(),
                        args.seed.to_string(),
                        level.to_string(),
                        spec.to_string(),
                        state.steps_taken.to_string(),
                        format!("{:e}", report.max_abs_err),
                        format!("{:e}", report.max_rel_err),
                        format!("{bound:e}"),
                    ])?;
                    writer.flush()?;
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// bench-perf
// ---------------------------------------------------------------------------

fn cmd_bench_perf(args: BenchPerfArgs) -> Result<()> {
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    let algos = parse_algo_list(&args.algo)?;
    let levels = expr::parse_levels(&args.levels)?;
    let specs = args
        .scaling
        .split(',')
        .map(ScalingSpec::parse)
        .collect::<Result<Vec<_>>>()?;
    let mode = exec_mode(args.fast);
    let (a, b) = dist::generate(Dist::U01, args.m, args.k, args.n, args.seed);
    let dims = format!("{}x{}x{}", args.m, args.k, args.n);
    let mut writer = csv_writer(&args.out)?;
    writer.write_record([
        "algo",
        "dims",
        "L",
        "scaling",
        "seconds_median",
        "effective_gflops",
    ])?;
    writer.flush()?;

    for (name, alg) in &algos {
        for &level in &levels {
            let plan = RecursionPlan::stationary(Arc::new(alg.clone()), level);
            for spec in &specs {
                let cfg = config_from_spec(spec, 1e-14, None, false, "outside")?;
                let mut times = Vec::with_capacity(args.reps);
                for _ in 0..args.reps {
                    let start = Instant::now();
                    let c = scaling::scaled_multiply_mode(&a, &b, &plan, &cfg, mode)?;
                    times.push(start.elapsed().as_secs_f64());
                    std::hint::black_box(&c);
                }
                times.sort_by(f64::total_cmp);
                let median = times[times.len() / 2];
                writer.write_record([
                    name.clone(),
                    dims.clone(),
                    level.to_string(),
                    spec.to_string(),
                    format!("{median:.6}"),
                    format!(
                        "{:.3}",
                        oracle::effective_gflops(args.m, args.k, args.n, median)?
                    ),
                ])?;
                writer.flush()?;
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

fn exec_mode(fast: bool) -> ExecMode {
    if fast {
        ExecMode::Fast
    } else {
        ExecMode::Strict
    }
}

fn parse_algo_list(text: &str) -> Result<Vec<(String, BilinearAlgorithm)>> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for part in text.split(',') {
        let expr = AlgExpr::parse(part)?;
        let name = expr.to_string();
        if seen.insert(name.clone(), ()).is_none() {
            out.push((name, expr.build()?));
        }
    }
    if out.is_empty() {
        bail!("no algorithms given");
    }
    Ok(out)
}

fn config_from_spec(
    spec: &ScalingSpec,
    tau: f64,
    max_steps: Option<usize>,
    pow2: bool,
    first_step: &str,
) -> Result<ScalingConfig> {
    let default = ScalingConfig::default();
    Ok(ScalingConfig {
        mode: spec.mode,
        first_step: expr::parse_first_step(first_step)?,
        tau,
        max_steps: max_steps
            .or(spec.rounds.map(|n| 2 * n))
            .unwrap_or(default.max_steps),
        pow2_round: pow2,
    })
}

/// First-order forward bound of the unscaled problem under this plan, with
/// the inner dimension padded as the executor pads it and the measured
/// max norms of the operands.
fn plan_bound(plan: &RecursionPlan, a: &Matrix, b: &Matrix) -> Result<f64> {
    let (_, pk, _) = engine::pad_dims(a.rows(), a.cols(), b.cols(), plan)?;
    let report = stability::analyze_plan(plan, pk as u64)?;
    Ok(report.bound_coefficient * a.max_norm() * b.max_norm() * f64::EPSILON)
}

fn read_matrix(path: &Path, text: bool) -> Result<Matrix> {
    let result = if text {
        Matrix::read_text(path)
    } else {
        Matrix::read_binary(path)
    };
    result.with_context(|| format!("reading {}", path.display()))
}

fn write_matrix(matrix: &Matrix, path: &Path, text: bool) -> Result<()> {
    let result = if text {
        matrix.write_text(path)
    } else {
        matrix.write_binary(path)
    };
    result.with_context(|| format!("writing {}", path.display()))
}

fn csv_writer(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}
