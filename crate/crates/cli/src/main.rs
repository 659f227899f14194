//! `subseq` — one binary over the whole estimation toolkit: exact
//! oracles, the windowed LCS pipelines, the sublinear LIS stack, instance
//! generators, window inspection, and the benchmark matrix.
//!
//! Scripting contract: stdout carries only the command's primary output —
//! the estimate for estimators, `1`/`0` for decisions, the generated
//! array for `gen`, CSV for `debug windows` — while progress and
//! diagnostics go to stderr. Every subcommand accepts `--seed` and
//! `--report`; `--report` writes the JSON envelope published in
//! `docs/report.schema.json`, with wall-clock numbers segregated under
//! `timings` so identical seeds diff byte-identically elsewhere.
//!
//! Exit codes: `0` success, `2` input error (unparsable flags, missing or
//! malformed files, out-of-domain parameters), `3` internal assertion
//! failure.

mod io;
mod report;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use io::{load_sequence, render_numeric, SeqFormat};
use report::RunEnvelope;
use serde::Deserialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;
use subseq_core::harness::{
    generate, read_reports, run_matrix, scaling_rows, write_reports, AlgorithmSpec, InstanceKind,
    InstanceSpec, RunReport,
};
use subseq_core::lis::{lis_approx, lis_decide, LisConfig};
use subseq_core::lis_recursive::{recursive_lis, RecursionConfig};
use subseq_core::oracles::{lcs_exact, lis_exact};
use subseq_core::pipeline::{
    approx_lcs, lcs_balanced_alphabet, LcsConfig, LcsReport, Regime, ScaleOverrides,
};
use subseq_core::strings::{Matching, Symbol};
use subseq_core::windows::{
    build_windows_cubic, build_windows_quadratic, partition_windows, WindowSet,
};
use subseq_core::CounterSnapshot;

#[derive(Parser)]
#[command(
    name = "subseq",
    version,
    about = "Certified LCS/LIS estimation, oracles, generators, and benchmarks"
)]
struct Cli {
    /// Upper bound on worker threads. The engine executes sequentially
    /// (deterministic wall times beat parallel speed here), which
    /// satisfies every cap; values below 1 are rejected.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Longest common subsequence: pipeline estimators and the exact oracle.
    #[command(subcommand)]
    Lcs(LcsCommand),
    /// Longest increasing subsequence: sublinear stack and the exact oracle.
    #[command(subcommand)]
    Lis(LisCommand),
    /// Emit a named instance (numeric encoding).
    Gen(GenArgs),
    /// Benchmark matrix runner and table renderer.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Inspection helpers.
    #[command(subcommand)]
    Debug(DebugCommand),
}

#[derive(Subcommand)]
enum LcsCommand {
    /// λ-sweep window pipeline; prints a certified lower estimate.
    Approx(LcsApproxArgs),
    /// Full dynamic program; prints the exact length.
    Exact(LcsExactArgs),
    /// Balanced-alphabet wrapper: majority-symbol baseline vs the pipeline.
    Balanced(LcsApproxArgs),
}

#[derive(Subcommand)]
enum LisCommand {
    /// λ-sweep estimator with the uniform-sampling fallback.
    Approx(LisApproxArgs),
    /// Single decision `lis(A) ≥ λ·n` at a fixed λ.
    Decide(LisDecideArgs),
    /// Bootstrapped recursive decision with `n^κ` access target.
    Recursive(LisRecursiveArgs),
    /// Patience-sorting oracle; prints the exact length.
    Exact(LisExactArgs),
}

#[derive(Subcommand)]
enum BenchCommand {
    /// Execute a declarative instance × algorithm × seed matrix.
    Run(BenchRunArgs),
    /// Render ratio/scaling tables from a matrix output.
    Report(BenchReportArgs),
}

#[derive(Subcommand)]
enum DebugCommand {
    /// Print a window inventory as CSV (`layer,left,length`).
    Windows(DebugWindowsArgs),
    /// Deliberately trip an internal assertion (exercises exit code 3).
    #[command(hide = true)]
    Panic(CommonArgs),
}

/// Flags every subcommand shares.
#[derive(Args)]
struct CommonArgs {
    /// RNG seed; identical seeds reproduce identical reports (timings aside).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the JSON run report to this path.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct PairInput {
    /// First sequence file.
    #[arg(long)]
    input_a: PathBuf,
    /// Second sequence file.
    #[arg(long)]
    input_b: PathBuf,
    /// Sequence encoding for both inputs.
    #[arg(long, value_enum, default_value_t = SeqFormat::Numeric)]
    format: SeqFormat,
}

#[derive(Args)]
struct SingleInput {
    /// Input array file.
    #[arg(long)]
    input: PathBuf,
    /// Sequence encoding.
    #[arg(long, value_enum, default_value_t = SeqFormat::Numeric)]
    format: SeqFormat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RegimeArg {
    Cubic,
    Quadratic,
    Auto,
}

impl From<RegimeArg> for Regime {
    fn from(value: RegimeArg) -> Regime {
        match value {
            RegimeArg::Cubic => Regime::Cubic,
            RegimeArg::Quadratic => Regime::Quadratic,
            RegimeArg::Auto => Regime::Auto,
        }
    }
}

#[derive(Args)]
struct LcsApproxArgs {
    #[command(flatten)]
    inputs: PairInput,
    /// Sparsification stack to sweep with.
    #[arg(long, value_enum, default_value_t = RegimeArg::Auto)]
    regime: RegimeArg,
    /// Sweep precision ε ∈ (0, 1).
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Write the certified matching as JSON `[[i, j], …]`.
    #[arg(long)]
    certificate: Option<PathBuf>,
    #[command(flatten)]
    scale: ScaleArgs,
    #[command(flatten)]
    common: CommonArgs,
}

/// Scale-constant overrides for the LCS pipeline.
///
/// The literal constructions size their window ladders and sampling budgets
/// for asymptotic soundness; on desk-scale inputs those budgets overflow
/// memory and CPU long before they pay off.  The defaults below cap the
/// window ladder and the λ′ grid and shrink the sampling multipliers, which
/// keeps every pipeline stage intact while finishing interactive runs in
/// seconds.  Pass `--literal-constants` to drop the caps and restore every
/// multiplier to 1; the internal window budget still refuses inputs whose
/// estimate table cannot fit.
#[derive(Args)]
struct ScaleArgs {
    /// Cap on window layers per direction.
    #[arg(long, default_value_t = 2)]
    layer_cap: u32,
    /// Window-construction granularity ε₀ ∈ (0, 1).
    #[arg(long, default_value_t = 0.5)]
    eps_window: f64,
    /// Keep only this many largest levels of the λ′ grid.
    #[arg(long, default_value_t = 2)]
    lambda_grid_cap: usize,
    /// Multiplier on the quadratic sparsifier's anchor-sample size.
    #[arg(long, default_value_t = 0.1)]
    anchor_scale: f64,
    /// Multiplier on the cubic sparsifier's round count.
    #[arg(long, default_value_t = 0.1)]
    round_scale: f64,
    /// Multiplier on the nearby-search sampling rate.
    #[arg(long, default_value_t = 0.1)]
    nearby_scale: f64,
    /// Multiplier on the λ-sweep acceptance targets.
    #[arg(long, default_value_t = 1.0)]
    accept_scale: f64,
    /// Stop the λ sweep at this level instead of 1/n.
    #[arg(long)]
    sweep_floor: Option<f64>,
    /// Replace the small-λ routing gate κ = n^{−1/140}.
    #[arg(long)]
    kappa_override: Option<f64>,
    /// Use the literal analysis constants: uncapped ladder and grid,
    /// granularity ε·λ, all multipliers 1.
    #[arg(
        long,
        conflicts_with_all = [
            "layer_cap", "eps_window", "lambda_grid_cap",
            "anchor_scale", "round_scale", "nearby_scale",
        ]
    )]
    literal_constants: bool,
}

impl ScaleArgs {
    fn to_overrides(&self) -> ScaleOverrides {
        if self.literal_constants {
            return ScaleOverrides {
                accept_scale: self.accept_scale,
                kappa_override: self.kappa_override,
                sweep_floor: self.sweep_floor,
                ..ScaleOverrides::default()
            };
        }
        ScaleOverrides {
            anchor_scale: self.anchor_scale,
            round_scale: self.round_scale,
            nearby_scale: self.nearby_scale,
            accept_scale: self.accept_scale,
            layer_cap: Some(self.layer_cap),
            lambda_grid_cap: Some(self.lambda_grid_cap),
            kappa_override: self.kappa_override,
            eps_window_override: Some(self.eps_window),
            sweep_floor: self.sweep_floor,
        }
    }
}

#[derive(Args)]
struct LcsExactArgs {
    #[command(flatten)]
    inputs: PairInput,
    /// Write the optimal matching as JSON `[[i, j], …]`.
    #[arg(long)]
    certificate: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LisApproxArgs {
    #[command(flatten)]
    input: SingleInput,
    /// Accuracy parameter ε ∈ (0, 1).
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Multiplier on the per-subarray sample count.
    #[arg(long, default_value_t = 1.0)]
    sample_scale: f64,
    /// Multiplier on the evaluation sampling rate.
    #[arg(long, default_value_t = 1.0)]
    eval_scale: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LisDecideArgs {
    #[command(flatten)]
    input: SingleInput,
    /// Decision level λ ∈ (0, 1].
    #[arg(long)]
    lambda: f64,
    /// Accuracy parameter ε ∈ (0, 1).
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Multiplier on the per-subarray sample count.
    #[arg(long, default_value_t = 1.0)]
    sample_scale: f64,
    /// Multiplier on the evaluation sampling rate.
    #[arg(long, default_value_t = 1.0)]
    eval_scale: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LisRecursiveArgs {
    #[command(flatten)]
    input: SingleInput,
    /// Decision level λ ∈ (0, 1].
    #[arg(long)]
    lambda: f64,
    /// Recursion exponent κ ∈ (0, 1); ζ = n^κ subarrays per level.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    kappa: f64,
    /// λ₀ = (λ/attenuation)⁴ at each wrapped level (literal value 2⁸).
    #[arg(long, default_value_t = 256.0)]
    attenuation: f64,
    /// Multiplier on the base-stage per-subarray sample count.
    #[arg(long, default_value_t = 1.0)]
    sample_scale: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct LisExactArgs {
    #[command(flatten)]
    input: SingleInput,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    RandomUniform,
    PlantedLcs,
    FootnoteTriple,
    LisSorted,
    LisBlockReversed,
    LisZeroed,
    Permutation,
}

impl From<GenKind> for InstanceKind {
    fn from(value: GenKind) -> InstanceKind {
        match value {
            GenKind::RandomUniform => InstanceKind::RandomUniform,
            GenKind::PlantedLcs => InstanceKind::PlantedLcs,
            GenKind::FootnoteTriple => InstanceKind::FootnoteTriple,
            GenKind::LisSorted => InstanceKind::LisSorted,
            GenKind::LisBlockReversed => InstanceKind::LisBlockReversed,
            GenKind::LisZeroed => InstanceKind::LisZeroed,
            GenKind::Permutation => InstanceKind::Permutation,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    /// Instance family.
    #[arg(long, value_enum)]
    kind: GenKind,
    /// Instance size.
    #[arg(long)]
    n: usize,
    /// Alphabet size for the random families.
    #[arg(long, default_value_t = 16)]
    alphabet_size: usize,
    /// Planted normalized LCS for `planted-lcs`.
    #[arg(long, default_value_t = 0.5)]
    plant_lambda: f64,
    /// Write the A side here instead of stdout.
    #[arg(long)]
    out_a: Option<PathBuf>,
    /// Write the B side here (pair-producing kinds only).
    #[arg(long)]
    out_b: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchRunArgs {
    /// Declarative TOML matrix: `instances`, `algorithms`, `seeds`.
    #[arg(long)]
    matrix: PathBuf,
    /// JSONL output, one run report per line.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BenchReportArgs {
    /// JSONL produced by `bench run`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Markdown tables destination.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum WindowFamily {
    /// Plain stride-`d` partition (both sides of the universe).
    Partition,
    /// Dense shifted ladder (`quadratic` pipeline's B side).
    Quadratic,
    /// Sparse doubling family (`cubic` pipeline's B side).
    Cubic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

#[derive(Args)]
struct DebugWindowsArgs {
    /// Sequence length the family covers.
    #[arg(long)]
    n: usize,
    /// Base window length; defaults to ⌈√n⌉.
    #[arg(long)]
    d: Option<usize>,
    /// Which construction to print.
    #[arg(long, value_enum, default_value_t = WindowFamily::Partition)]
    family: WindowFamily,
    /// Construction granularity ε₀.
    #[arg(long, default_value_t = 0.1)]
    eps0: f64,
    /// Truncate the layer ladder.
    #[arg(long)]
    layer_cap: Option<u32>,
    /// Which side of the universe to list.
    #[arg(long, value_enum, default_value_t = SideArg::A)]
    side: SideArg,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        std::process::exit(2);
    }
    // The hook would print its own trace; the exit-code contract wants a
    // single stderr line for internal failures.
    std::panic::set_hook(Box::new(|_| {}));
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli))) {
        Ok(Ok(())) => {}
        Ok(Err(err)) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            eprintln!("internal assertion failure: {message}");
            std::process::exit(3);
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads;
    match cli.command {
        Command::Lcs(LcsCommand::Approx(args)) => cmd_lcs_pipeline(args, threads, false),
        Command::Lcs(LcsCommand::Balanced(args)) => cmd_lcs_pipeline(args, threads, true),
        Command::Lcs(LcsCommand::Exact(args)) => cmd_lcs_exact(args, threads),
        Command::Lis(LisCommand::Approx(args)) => cmd_lis_approx(args, threads),
        Command::Lis(LisCommand::Decide(args)) => cmd_lis_decide(args, threads),
        Command::Lis(LisCommand::Recursive(args)) => cmd_lis_recursive(args, threads),
        Command::Lis(LisCommand::Exact(args)) => cmd_lis_exact(args, threads),
        Command::Gen(args) => cmd_gen(args, threads),
        Command::Bench(BenchCommand::Run(args)) => cmd_bench_run(args, threads),
        Command::Bench(BenchCommand::Report(args)) => cmd_bench_report(args, threads),
        Command::Debug(DebugCommand::Windows(args)) => cmd_debug_windows(args, threads),
        Command::Debug(DebugCommand::Panic(_)) => {
            panic!("deliberate self-check panic requested via `debug panic`")
        }
    }
}

/// Writes the envelope when `--report` was given.
fn finish(envelope: &RunEnvelope, report: &Option<PathBuf>) -> Result<()> {
    if let Some(path) = report {
        envelope.write(path)?;
        eprintln!("report written to {}", path.display());
    }
    Ok(())
}

fn write_certificate(path: &Path, matching: &Matching) -> Result<()> {
    let pairs: Vec<[usize; 2]> = matching.pairs().iter().map(|&(i, j)| [i, j]).collect();
    let mut body = serde_json::to_string(&pairs).context("serializing certificate")?;
    body.push('\n');
    std::fs::write(path, body)
        .with_context(|| format!("writing certificate {}", path.display()))
}

fn check_unit_interval(name: &str, value: f64, closed_top: bool) -> Result<()> {
    let ok = value > 0.0 && (value < 1.0 || (closed_top && value == 1.0));
    if !ok {
        let domain = if closed_top { "(0, 1]" } else { "(0, 1)" };
        bail!("--{name} must lie in {domain}, got {value}");
    }
    Ok(())
}

fn lcs_envelope(
    command: &str,
    args: &LcsApproxArgs,
    threads: usize,
    out: &LcsReport,
    lens: (usize, usize),
) -> RunEnvelope {
    let mut envelope = RunEnvelope::new(command, args.common.seed, threads);
    envelope.estimate = Some(out.estimate as f64);
    envelope.lambda_final = Some(out.lambda_final);
    envelope.counters = out.counters;
    envelope.details = json!({
        "regime": format!("{:?}", Regime::from(args.regime)).to_lowercase(),
        "eps": args.eps,
        "len_a": lens.0,
        "len_b": lens.1,
        "certificate_len": out.certificate.len(),
        "scale": args.scale.to_overrides(),
    });
    envelope.timings = serde_json::to_value(out.timings).expect("timings serialize");
    envelope
}

fn cmd_lcs_pipeline(args: LcsApproxArgs, threads: usize, balanced: bool) -> Result<()> {
    check_unit_interval("eps", args.eps, false)?;
    if !args.scale.literal_constants {
        check_unit_interval("eps-window", args.scale.eps_window, false)?;
    }
    let a = load_sequence(&args.inputs.input_a, args.inputs.format)?;
    let b = load_sequence(&args.inputs.input_b, args.inputs.format)?;
    let cfg = LcsConfig {
        regime: args.regime.into(),
        eps: args.eps,
        seed: args.common.seed,
        scale: args.scale.to_overrides(),
        ..LcsConfig::default()
    };
    let command = if balanced { "lcs.balanced" } else { "lcs.approx" };
    eprintln!(
        "{command}: |A| = {}, |B| = {}, regime {:?}, eps {}",
        a.len(),
        b.len(),
        cfg.regime,
        cfg.eps
    );
    let out = if balanced {
        lcs_balanced_alphabet(&a, &b, &cfg)?
    } else {
        approx_lcs(&a, &b, &cfg)?
    };
    eprintln!(
        "{command}: certified {} at lambda_final {:.4}",
        out.estimate, out.lambda_final
    );
    let mut envelope = lcs_envelope(command, &args, threads, &out, (a.len(), b.len()));
    if let Some(path) = &args.certificate {
        write_certificate(path, &out.certificate)?;
        envelope.certificate_path = Some(path.display().to_string());
    }
    println!("{}", out.estimate);
    finish(&envelope, &args.common.report)
}

fn cmd_lcs_exact(args: LcsExactArgs, threads: usize) -> Result<()> {
    let a = load_sequence(&args.inputs.input_a, args.inputs.format)?;
    let b = load_sequence(&args.inputs.input_b, args.inputs.format)?;
    eprintln!("lcs.exact: |A| = {}, |B| = {}", a.len(), b.len());
    let started = Instant::now();
    let (value, witness) = lcs_exact(&a, &b);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut envelope = RunEnvelope::new("lcs.exact", args.common.seed, threads);
    envelope.estimate = Some(value as f64);
    envelope.counters = CounterSnapshot {
        lcs_exact_calls: 1,
        dp_cells: (a.len() as u64) * (b.len() as u64),
        element_accesses: (a.len() + b.len()) as u64,
        ..CounterSnapshot::default()
    };
    envelope.details = json!({
        "len_a": a.len(),
        "len_b": b.len(),
        "certificate_len": witness.len(),
    });
    envelope.timings = json!({ "total_ms": total_ms });
    if let Some(path) = &args.certificate {
        write_certificate(path, &witness)?;
        envelope.certificate_path = Some(path.display().to_string());
    }
    println!("{value}");
    finish(&envelope, &args.common.report)
}

fn cmd_lis_approx(args: LisApproxArgs, threads: usize) -> Result<()> {
    check_unit_interval("eps", args.eps, false)?;
    let a = load_sequence(&args.input.input, args.input.format)?;
    let cfg = LisConfig {
        eps: args.eps,
        sample_scale: args.sample_scale,
        eval_scale: args.eval_scale,
        seed: args.common.seed,
        ..LisConfig::default()
    };
    eprintln!("lis.approx: n = {}", a.len());
    let started = Instant::now();
    let out = lis_approx(&a, &cfg);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    eprintln!(
        "lis.approx: estimate {:.2} at lambda_final {:.4} ({} accesses{})",
        out.estimate,
        out.lambda_final,
        out.accesses,
        if out.fallback { ", fallback" } else { "" }
    );
    let mut envelope = RunEnvelope::new("lis.approx", args.common.seed, threads);
    envelope.estimate = Some(out.estimate);
    envelope.lambda_final = Some(out.lambda_final);
    envelope.counters = CounterSnapshot {
        element_accesses: out.accesses,
        ..CounterSnapshot::default()
    };
    envelope.details = json!({
        "n": a.len(),
        "fallback": out.fallback,
        "eps": cfg.eps,
    });
    envelope.timings = json!({ "total_ms": total_ms });
    println!("{}", out.estimate);
    finish(&envelope, &args.common.report)
}

fn cmd_lis_decide(args: LisDecideArgs, threads: usize) -> Result<()> {
    check_unit_interval("lambda", args.lambda, true)?;
    check_unit_interval("eps", args.eps, false)?;
    let a = load_sequence(&args.input.input, args.input.format)?;
    let cfg = LisConfig {
        eps: args.eps,
        sample_scale: args.sample_scale,
        eval_scale: args.eval_scale,
        seed: args.common.seed,
        ..LisConfig::default()
    };
    eprintln!("lis.decide: n = {}, lambda = {}", a.len(), args.lambda);
    let started = Instant::now();
    let decision = lis_decide(&a, args.lambda, &cfg);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    eprintln!(
        "lis.decide: {} (estimate {:.2} vs threshold {:.2}, {} accesses)",
        if decision.accept { "accept" } else { "reject" },
        decision.estimate,
        decision.threshold,
        decision.accesses
    );
    let mut envelope = RunEnvelope::new("lis.decide", args.common.seed, threads);
    envelope.estimate = Some(if decision.accept { 1.0 } else { 0.0 });
    envelope.accept = Some(decision.accept);
    envelope.counters = CounterSnapshot {
        element_accesses: decision.accesses,
        ..CounterSnapshot::default()
    };
    envelope.details = json!({
        "n": a.len(),
        "lambda": args.lambda,
        "raw_estimate": decision.estimate,
        "threshold": decision.threshold,
        "pseudo_solutions": decision.t,
        "rate": decision.rate,
        "k_max": decision.k_max,
        "access_count": decision.accesses,
    });
    envelope.timings = json!({ "total_ms": total_ms });
    println!("{}", if decision.accept { 1 } else { 0 });
    finish(&envelope, &args.common.report)
}

fn cmd_lis_recursive(args: LisRecursiveArgs, threads: usize) -> Result<()> {
    check_unit_interval("lambda", args.lambda, true)?;
    check_unit_interval("kappa", args.kappa, false)?;
    if args.attenuation < 1.0 {
        bail!("--attenuation must be at least 1, got {}", args.attenuation);
    }
    let a = load_sequence(&args.input.input, args.input.format)?;
    let cfg = RecursionConfig {
        kappa: args.kappa,
        attenuation: args.attenuation,
        lis: LisConfig {
            sample_scale: args.sample_scale,
            ..LisConfig::default()
        },
        seed: args.common.seed,
        ..RecursionConfig::default()
    };
    eprintln!(
        "lis.recursive: n = {}, lambda = {}, kappa = {:.4}",
        a.len(),
        args.lambda,
        args.kappa
    );
    let started = Instant::now();
    let outcome = recursive_lis(&a, args.lambda, 0, Symbol::MAX, &cfg);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    eprintln!(
        "lis.recursive: {} (depth {}, zeta {}, {} oracle calls, {} accesses)",
        if outcome.accept { "accept" } else { "reject" },
        outcome.depth_reached,
        outcome.zeta,
        outcome.oracle_calls,
        outcome.accesses
    );
    let mut envelope = RunEnvelope::new("lis.recursive", args.common.seed, threads);
    envelope.estimate = Some(if outcome.accept { 1.0 } else { 0.0 });
    envelope.accept = Some(outcome.accept);
    envelope.counters = CounterSnapshot {
        element_accesses: outcome.accesses,
        oracle_calls: outcome.oracle_calls,
        ..CounterSnapshot::default()
    };
    envelope.details = json!({
        "n": a.len(),
        "lambda": args.lambda,
        "kappa": args.kappa,
        "zeta": outcome.zeta,
        "depth_reached": outcome.depth_reached,
        "lambda0_top": outcome.lambda0_top,
        "access_count": outcome.accesses,
    });
    envelope.timings = json!({ "total_ms": total_ms });
    println!("{}", if outcome.accept { 1 } else { 0 });
    finish(&envelope, &args.common.report)
}

fn cmd_lis_exact(args: LisExactArgs, threads: usize) -> Result<()> {
    let a = load_sequence(&args.input.input, args.input.format)?;
    eprintln!("lis.exact: n = {}", a.len());
    let started = Instant::now();
    let (value, _) = lis_exact(&a);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    let mut envelope = RunEnvelope::new("lis.exact", args.common.seed, threads);
    envelope.estimate = Some(value as f64);
    envelope.counters = CounterSnapshot {
        element_accesses: a.len() as u64,
        ..CounterSnapshot::default()
    };
    envelope.details = json!({ "n": a.len() });
    envelope.timings = json!({ "total_ms": total_ms });
    println!("{value}");
    finish(&envelope, &args.common.report)
}

fn cmd_gen(args: GenArgs, threads: usize) -> Result<()> {
    let mut spec = InstanceSpec::new(args.kind.into(), args.n, args.common.seed);
    spec.alphabet_size = args.alphabet_size;
    spec.plant_lambda = args.plant_lambda;
    let instance = generate(&spec)?;
    eprintln!(
        "gen: {:?} n = {}{}",
        InstanceKind::from(args.kind),
        args.n,
        if instance.b.is_some() {
            " (pair instance)"
        } else {
            ""
        }
    );
    match &args.out_a {
        Some(path) => {
            std::fs::write(path, render_numeric(&instance.a))
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{}", render_numeric(&instance.a)),
    }
    if let Some(path) = &args.out_b {
        let b = instance
            .b
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("kind {:?} has no B side", args.kind))?;
        std::fs::write(path, render_numeric(b))
            .with_context(|| format!("writing {}", path.display()))?;
    } else if instance.b.is_some() {
        eprintln!("gen: note — pair instance, pass --out-b to keep the B side");
    }
    let mut envelope = RunEnvelope::new("gen", args.common.seed, threads);
    envelope.details = json!({
        "kind": serde_json::to_value(InstanceKind::from(args.kind)).expect("kind serializes"),
        "n": args.n,
        "alphabet_size": args.alphabet_size,
        "plant_lambda": args.plant_lambda,
        "has_b": instance.b.is_some(),
        "out_a": args.out_a.as_ref().map(|p| p.display().to_string()),
        "out_b": args.out_b.as_ref().map(|p| p.display().to_string()),
    });
    finish(&envelope, &args.common.report)
}

/// Declarative benchmark matrix.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixConfig {
    /// Seeds applied to every (instance, algorithm) cell; when omitted,
    /// the command-line `--seed` is the single seed.
    #[serde(default)]
    seeds: Vec<u64>,
    instances: Vec<InstanceSpec>,
    algorithms: Vec<AlgorithmSpec>,
}

fn cmd_bench_run(args: BenchRunArgs, threads: usize) -> Result<()> {
    let text = std::fs::read_to_string(&args.matrix)
        .with_context(|| format!("reading matrix {}", args.matrix.display()))?;
    let config: MatrixConfig =
        toml::from_str(&text).with_context(|| format!("parsing {}", args.matrix.display()))?;
    if config.instances.is_empty() {
        bail!("matrix config declares no instances");
    }
    if config.algorithms.is_empty() {
        bail!("matrix config declares no algorithms");
    }
    let seeds = if config.seeds.is_empty() {
        vec![args.common.seed]
    } else {
        config.seeds.clone()
    };
    eprintln!(
        "bench.run: {} instances × {} algorithms × {} seeds",
        config.instances.len(),
        config.algorithms.len(),
        seeds.len()
    );
    let started = Instant::now();
    let reports = run_matrix(&config.algorithms, &config.instances, &seeds);
    let total_ms = started.elapsed().as_secs_f64() * 1e3;
    write_reports(&args.out, &reports)?;
    let errors = reports.iter().filter(|r| r.error.is_some()).count();
    eprintln!(
        "bench.run: {} runs ({} errored) -> {}",
        reports.len(),
        errors,
        args.out.display()
    );
    let mut envelope = RunEnvelope::new("bench.run", args.common.seed, threads);
    envelope.details = json!({
        "runs": reports.len(),
        "errors": errors,
        "seeds": seeds,
        "out": args.out.display().to_string(),
    });
    envelope.timings = json!({ "total_ms": total_ms });
    finish(&envelope, &args.common.report)
}

fn cmd_bench_report(args: BenchReportArgs, threads: usize) -> Result<()> {
    let reports = read_reports(&args.input)?;
    let markdown = render_tables(&reports);
    std::fs::write(&args.out, &markdown)
        .with_context(|| format!("writing tables {}", args.out.display()))?;
    eprintln!(
        "bench.report: {} runs -> {}",
        reports.len(),
        args.out.display()
    );
    let mut envelope = RunEnvelope::new("bench.report", args.common.seed, threads);
    envelope.details = json!({
        "runs": reports.len(),
        "out": args.out.display().to_string(),
    });
    finish(&envelope, &args.common.report)
}

fn kind_name(report: &RunReport) -> String {
    match serde_json::to_value(report.spec.kind).expect("kind serializes") {
        serde_json::Value::String(s) => s,
        other => other.to_string(),
    }
}

/// Renders the ratio / decision / scaling / failure tables.
fn render_tables(reports: &[RunReport]) -> String {
    use std::collections::BTreeMap;
    use std::fmt::Write as _;

    let mut out = String::from("# Run matrix tables\n");

    // Estimating runs with an exact reference.
    let mut ratio_groups: BTreeMap<(String, String, usize), Vec<&RunReport>> = BTreeMap::new();
    // Decision runs (estimate is the 0/1 verdict).
    let mut decision_groups: BTreeMap<(String, String, usize), Vec<&RunReport>> = BTreeMap::new();
    for report in reports.iter().filter(|r| r.error.is_none()) {
        let key = (
            report.algorithm.clone(),
            kind_name(report),
            report.spec.n,
        );
        if report.ratio.is_some() {
            ratio_groups.entry(key).or_default().push(report);
        } else {
            decision_groups.entry(key).or_default().push(report);
        }
    }

    out.push_str("\n## Approximation ratios\n\n");
    if ratio_groups.is_empty() {
        out.push_str("_no estimating runs with exact references_\n");
    } else {
        out.push_str(
            "| algorithm | instance | n | runs | mean estimate | mean exact | \
             ratio mean | ratio min | ratio max |\n\
             |---|---|---|---|---|---|---|---|---|\n",
        );
        for ((algorithm, kind, n), group) in &ratio_groups {
            let runs = group.len() as f64;
            let mean_estimate = group.iter().map(|r| r.estimate).sum::<f64>() / runs;
            let mean_exact = group.iter().filter_map(|r| r.exact).sum::<f64>() / runs;
            let ratios: Vec<f64> = group.iter().filter_map(|r| r.ratio).collect();
            let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
            let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            writeln!(
                out,
                "| {algorithm} | {kind} | {n} | {} | {mean_estimate:.2} | {mean_exact:.2} | \
                 {mean:.4} | {min:.4} | {max:.4} |",
                group.len()
            )
            .expect("string write");
        }
    }

    out.push_str("\n## Decision rates\n\n");
    if decision_groups.is_empty() {
        out.push_str("_no decision runs_\n");
    } else {
        out.push_str("| algorithm | instance | n | runs | accept rate |\n|---|---|---|---|---|\n");
        for ((algorithm, kind, n), group) in &decision_groups {
            let rate = group.iter().map(|r| r.estimate).sum::<f64>() / group.len() as f64;
            writeln!(
                out,
                "| {algorithm} | {kind} | {n} | {} | {rate:.2} |",
                group.len()
            )
            .expect("string write");
        }
    }

    out.push_str("\n## Scaling exponents\n\n");
    let rows = scaling_rows(reports);
    if rows.is_empty() {
        out.push_str("_needs at least two sizes per (algorithm, instance) group_\n");
    } else {
        out.push_str("| algorithm | instance | metric | exponent | sizes |\n|---|---|---|---|---|\n");
        for row in &rows {
            writeln!(
                out,
                "| {} | {} | {} | {:.3} | {} |",
                row.algorithm, row.kind, row.metric, row.exponent, row.sizes
            )
            .expect("string write");
        }
    }

    let failures: Vec<&RunReport> = reports.iter().filter(|r| r.error.is_some()).collect();
    if !failures.is_empty() {
        out.push_str("\n## Failures\n\n");
        out.push_str("| algorithm | instance | n | seed | error |\n|---|---|---|---|---|\n");
        for report in failures {
            writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                report.algorithm,
                kind_name(report),
                report.spec.n,
                report.spec.seed,
                report.error.as_deref().unwrap_or("")
            )
            .expect("string write");
        }
    }
    out
}

fn cmd_debug_windows(args: DebugWindowsArgs, threads: usize) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let d = args
        .d
        .unwrap_or_else(|| (args.n as f64).sqrt().ceil() as usize);
    if d == 0 || d > args.n {
        bail!("--d must lie in [1, n], got {d}");
    }
    let set = match args.family {
        WindowFamily::Partition => WindowSet {
            windows: partition_windows(args.n, d),
            seq_len: args.n,
        },
        WindowFamily::Quadratic => {
            let (wa, wb) = build_windows_quadratic(args.n, d, args.eps0, args.layer_cap)?;
            match args.side {
                SideArg::A => wa,
                SideArg::B => wb,
            }
        }
        WindowFamily::Cubic => {
            let (wa, wb) = build_windows_cubic(args.n, d, args.eps0, args.layer_cap)?;
            match args.side {
                SideArg::A => wa,
                SideArg::B => wb,
            }
        }
    };
    let layers = {
        let mut layers: Vec<i32> = set.windows.iter().map(|w| w.layer).collect();
        layers.sort_unstable();
        layers.dedup();
        layers.len()
    };
    eprintln!(
        "debug.windows: {:?}/{:?} n = {}, d = {} -> {} windows in {} layers",
        args.family,
        args.side,
        args.n,
        d,
        set.windows.len(),
        layers
    );
    println!("layer,left,length");
    for window in &set.windows {
        println!("{},{},{}", window.layer, window.left, window.len);
    }
    let mut envelope = RunEnvelope::new("debug.windows", args.common.seed, threads);
    envelope.details = json!({
        "family": format!("{:?}", args.family).to_lowercase(),
        "side": format!("{:?}", args.side).to_lowercase(),
        "n": args.n,
        "d": d,
        "windows": set.windows.len(),
        "layers": layers,
    });
    finish(&envelope, &args.common.report)
}
