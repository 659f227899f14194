//! Instance generators, the run matrix, and scaling regressions.
//!
//! The generators reproduce the source analysis's named constructions —
//! the block-reversed permutation `A″` (blocks of `√n` reversed inside an
//! identity array), the zeroed array `A′` (a `1/e` fraction of an identity
//! array replaced by zeros), the footnote pair of half-zero strings — plus
//! generic planted-LCS and random instances. The run matrix executes an
//! algorithm × instance × seed cross-product with per-run isolation and
//! emits one JSON record per run, so a single JSONL file backs both the
//! ratio tables and the scaling regressions.
//!
//! Scaling measurements lean on operation counters (element accesses, DP
//! cells) as the primary signal and wall time as a secondary one: the
//! counters are noise-free and match the cost model the analysis states.
//! Runs execute sequentially for the same reason — parallel runs would
//! contend for cores and pollute the wall-time column.

use crate::counters::CounterSnapshot;
use crate::lis::{lis_approx, lis_decide, LisConfig};
use crate::lis_recursive::{recursive_lis, RecursionConfig};
use crate::oracles::{lcs_exact, lis_exact};
use crate::pipeline::{approx_lcs, LcsConfig};
use crate::strings::{Matching, Symbol};
use crate::Error;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

/// The named instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    /// Two independent uniform strings over `alphabet_size` symbols.
    RandomUniform,
    /// Random strings sharing a planted common subsequence of length
    /// `⌈plant_lambda·n⌉`, witness included.
    PlantedLcs,
    /// The half-zero pair `(0^⌈n/2⌉1^⌊n/2⌋, 0^n)` whose normalized LCS is
    /// exactly 1/2 — the middle leg of the duality footnote's triple.
    FootnoteTriple,
    /// The identity array `⟨1, …, n⟩`.
    LisSorted,
    /// Identity with every block of length `round(√n)` reversed: LIS
    /// collapses to one element per block.
    LisBlockReversed,
    /// Identity with each element independently zeroed with probability
    /// `1/e`.
    LisZeroed,
    /// A uniform permutation paired with the identity, so the same
    /// instance exercises LIS directly and LCS through the permutation
    /// reduction.
    Permutation,
}

/// A reproducible instance description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub n: usize,
    #[serde(default = "default_alphabet")]
    pub alphabet_size: usize,
    #[serde(default = "default_plant_lambda")]
    pub plant_lambda: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_alphabet() -> usize {
    16
}

fn default_plant_lambda() -> f64 {
    0.5
}

impl InstanceSpec {
    pub fn new(kind: InstanceKind, n: usize, seed: u64) -> Self {
        InstanceSpec {
            kind,
            n,
            alphabet_size: default_alphabet(),
            plant_lambda: default_plant_lambda(),
            seed,
        }
    }
}

/// A generated instance: always a primary sequence, optionally a second
/// one (LCS families) and a planted witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub a: Vec<Symbol>,
    pub b: Option<Vec<Symbol>>,
    pub witness: Option<Matching>,
}

/// Builds the instance a spec describes, deterministically in the seed.
pub fn generate(spec: &InstanceSpec) -> Result<Instance, Error> {
    if spec.n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "instances must be non-empty".into(),
        });
    }
    let needs_alphabet = matches!(
        spec.kind,
        InstanceKind::RandomUniform | InstanceKind::PlantedLcs
    );
    if needs_alphabet && spec.alphabet_size == 0 {
        return Err(Error::InvalidParameter {
            name: "alphabet_size",
            reason: "random strings need at least one symbol".into(),
        });
    }
    if !(0.0..=1.0).contains(&spec.plant_lambda) {
        return Err(Error::InvalidParameter {
            name: "plant_lambda",
            reason: "the planted density must lie in [0, 1]".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = spec.n;
    let instance = match spec.kind {
        InstanceKind::RandomUniform => {
            let sigma = spec.alphabet_size as Symbol;
            let a = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let b = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            Instance {
                spec: *spec,
                a,
                b: Some(b),
                witness: None,
            }
        }
        InstanceKind::PlantedLcs => {
            let sigma = spec.alphabet_size as Symbol;
            let m = ((spec.plant_lambda * n as f64).ceil() as usize).min(n);
            let mut a: Vec<Symbol> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let mut b: Vec<Symbol> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
            let mut pos_a = rand::seq::index::sample(&mut rng, n, m).into_vec();
            let mut pos_b = rand::seq::index::sample(&mut rng, n, m).into_vec();
            pos_a.sort_unstable();
            pos_b.sort_unstable();
            for t in 0..m {
                let v = rng.gen_range(0..sigma);
                a[pos_a[t]] = v;
                b[pos_b[t]] = v;
            }
            let witness = Matching::from_monotone(
                pos_a.iter().copied().zip(pos_b.iter().copied()).collect(),
            );
            Instance {
                spec: *spec,
                a,
                b: Some(b),
                witness: Some(witness),
            }
        }
        InstanceKind::FootnoteTriple => {
            let half = n.div_ceil(2);
            let mut a = vec![0; half];
            a.extend(std::iter::repeat_n(1, n - half));
            Instance {
                spec: *spec,
                a,
                b: Some(vec![0; n]),
                witness: None,
            }
        }
        InstanceKind::LisSorted => Instance {
            spec: *spec,
            a: (1..=n as Symbol).collect(),
            b: None,
            witness: None,
        },
        InstanceKind::LisBlockReversed => {
            let m = (n as f64).sqrt().round().max(1.0) as usize;
            let mut a = Vec::with_capacity(n + m);
            let mut block = 0;
            while a.len() < n {
                for v in ((block * m + 1)..=(block + 1) * m).rev() {
                    a.push(v as Symbol);
                }
                block += 1;
            }
            a.truncate(n);
            Instance {
                spec: *spec,
                a,
                b: None,
                witness: None,
            }
        }
        InstanceKind::LisZeroed => {
            let p = 1.0 / std::f64::consts::E;
            let a = (1..=n as Symbol)
                .map(|v| if rng.gen_bool(p) { 0 } else { v })
                .collect();
            Instance {
                spec: *spec,
                a,
                b: None,
                witness: None,
            }
        }
        InstanceKind::Permutation => {
            let mut a: Vec<Symbol> = (1..=n as Symbol).collect();
            a.shuffle(&mut rng);
            Instance {
                spec: *spec,
                a,
                b: Some((1..=n as Symbol).collect()),
                witness: None,
            }
        }
    };
    Ok(instance)
}

/// Which algorithm a matrix run executes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    LcsExact,
    LcsApprox {
        #[serde(default)]
        cfg: LcsConfig,
    },
    LisExact,
    LisApprox {
        #[serde(default)]
        cfg: LisConfig,
    },
    LisDecide {
        lambda: f64,
        #[serde(default)]
        cfg: LisConfig,
    },
    LisRecursive {
        lambda: f64,
        #[serde(default)]
        cfg: RecursionConfig,
    },
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::LcsExact => "lcs_exact",
            AlgorithmSpec::LcsApprox { .. } => "lcs_approx",
            AlgorithmSpec::LisExact => "lis_exact",
            AlgorithmSpec::LisApprox { .. } => "lis_approx",
            AlgorithmSpec::LisDecide { .. } => "lis_decide",
            AlgorithmSpec::LisRecursive { .. } => "lis_recursive",
        }
    }
}

/// One row of the matrix output.
///
/// Estimating algorithms fill `exact` (when affordable) and `ratio =
/// estimate/exact`; decision algorithms leave both empty and report the
/// verdict as estimate 1.0/0.0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub spec: InstanceSpec,
    pub algorithm: String,
    pub estimate: f64,
    pub exact: Option<f64>,
    pub ratio: Option<f64>,
    pub counters: CounterSnapshot,
    pub wall_ms: f64,
    pub error: Option<String>,
}

/// Largest `n` for which the matrix computes the exact LCS reference
/// (the quadratic table stops being "free bookkeeping" past this).
const EXACT_LCS_CAP: usize = 8192;

fn run_one(algorithm: &AlgorithmSpec, spec: &InstanceSpec, seed: u64) -> RunReport {
    let mut report = RunReport {
        spec: InstanceSpec { seed, ..*spec },
        algorithm: algorithm.name().to_string(),
        estimate: 0.0,
        exact: None,
        ratio: None,
        counters: CounterSnapshot::default(),
        wall_ms: 0.0,
        error: None,
    };
    let instance = match generate(&report.spec) {
        Ok(instance) => instance,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    let outcome = catch_unwind(AssertUnwindSafe(|| {
        execute(algorithm, &instance, seed)
    }));
    match outcome {
        Ok(Ok((estimate, exact, counters, wall_ms))) => {
            report.estimate = estimate;
            report.exact = exact;
            report.ratio = exact.map(|x| if x == 0.0 { 1.0 } else { estimate / x });
            report.counters = counters;
            report.wall_ms = wall_ms;
        }
        Ok(Err(e)) => report.error = Some(e.to_string()),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".to_string());
            report.error = Some(format!("panicked: {msg}"));
        }
    }
    report
}

type Execution = (f64, Option<f64>, CounterSnapshot, f64);

fn execute(algorithm: &AlgorithmSpec, instance: &Instance, seed: u64) -> Result<Execution, Error> {
    let a = &instance.a;
    let second = instance.b.as_ref();
    let start = Instant::now();
    let wall = |start: Instant| start.elapsed().as_secs_f64() * 1e3;
    match algorithm {
        AlgorithmSpec::LcsExact => {
            let b = second.ok_or(Error::EmptyInput("instance has no second sequence"))?;
            let (value, _) = lcs_exact(a, b);
            let wall_ms = wall(start);
            let counters = CounterSnapshot {
                lcs_exact_calls: 1,
                dp_cells: (a.len() as u64) * (b.len() as u64),
                element_accesses: (a.len() + b.len()) as u64,
                ..CounterSnapshot::default()
            };
            Ok((value as f64, Some(value as f64), counters, wall_ms))
        }
        AlgorithmSpec::LcsApprox { cfg } => {
            let b = second.ok_or(Error::EmptyInput("instance has no second sequence"))?;
            let cfg = LcsConfig {
                seed,
                ..cfg.clone()
            };
            let report = approx_lcs(a, b, &cfg)?;
            let wall_ms = wall(start);
            let exact = (a.len().max(b.len()) <= EXACT_LCS_CAP)
                .then(|| lcs_exact(a, b).0 as f64);
            Ok((report.estimate as f64, exact, report.counters, wall_ms))
        }
        AlgorithmSpec::LisExact => {
            let (value, _) = lis_exact(a);
            let wall_ms = wall(start);
            let counters = CounterSnapshot {
                element_accesses: a.len() as u64,
                ..CounterSnapshot::default()
            };
            Ok((value as f64, Some(value as f64), counters, wall_ms))
        }
        AlgorithmSpec::LisApprox { cfg } => {
            let cfg = LisConfig { seed, ..*cfg };
            let report = lis_approx(a, &cfg);
            let wall_ms = wall(start);
            let counters = CounterSnapshot {
                element_accesses: report.accesses,
                ..CounterSnapshot::default()
            };
            Ok((report.estimate, Some(lis_exact(a).0 as f64), counters, wall_ms))
        }
        AlgorithmSpec::LisDecide { lambda, cfg } => {
            let cfg = LisConfig { seed, ..*cfg };
            let decision = lis_decide(a, *lambda, &cfg);
            let wall_ms = wall(start);
            let counters = CounterSnapshot {
                element_accesses: decision.accesses,
                ..CounterSnapshot::default()
            };
            Ok((
                if decision.accept { 1.0 } else { 0.0 },
                None,
                counters,
                wall_ms,
            ))
        }
        AlgorithmSpec::LisRecursive { lambda, cfg } => {
            let cfg = RecursionConfig { seed, ..*cfg };
            let outcome = recursive_lis(a, *lambda, 0, Symbol::MAX, &cfg);
            let wall_ms = wall(start);
            let counters = CounterSnapshot {
                element_accesses: outcome.accesses,
                oracle_calls: outcome.oracle_calls,
                ..CounterSnapshot::default()
            };
            Ok((
                if outcome.accept { 1.0 } else { 0.0 },
                None,
                counters,
                wall_ms,
            ))
        }
    }
}

/// Executes every algorithm on every instance under every seed.
///
/// Failures — invalid specs, pipeline errors, panics — land in the
/// report's `error` field; they never abort the rest of the matrix.
pub fn run_matrix(
    algorithms: &[AlgorithmSpec],
    specs: &[InstanceSpec],
    seeds: &[u64],
) -> Vec<RunReport> {
    let mut reports = Vec::with_capacity(algorithms.len() * specs.len() * seeds.len());
    for spec in specs {
        for algorithm in algorithms {
            for &seed in seeds {
                reports.push(run_one(algorithm, spec, seed));
            }
        }
    }
    reports
}

/// Least-squares slope of `ln y` against `ln x`. Points with a
/// non-positive coordinate are skipped; fewer than two usable points give
/// a flat 0 slope.
pub fn fit_loglog(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return 0.0;
    }
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = logs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let cov: f64 = logs.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let var: f64 = logs.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    if var == 0.0 {
        0.0
    } else {
        cov / var
    }
}

/// One fitted exponent: `metric ≈ C·n^exponent` for a family of runs of
/// the same algorithm on the same instance kind.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingRow {
    pub algorithm: String,
    pub kind: String,
    pub metric: String,
    pub exponent: f64,
    /// Distinct sizes entering the fit.
    pub sizes: usize,
}

/// Extracts one scalar cost metric from a finished run.
type MetricFn = fn(&RunReport) -> f64;

/// Fits scaling exponents per (algorithm, instance kind, metric) over all
/// successful runs, averaging repeats at the same `n`.
pub fn scaling_rows(reports: &[RunReport]) -> Vec<ScalingRow> {
    let metrics: [(&str, MetricFn); 3] = [
        ("wall_ms", |r| r.wall_ms),
        ("element_accesses", |r| r.counters.element_accesses as f64),
        ("dp_cells", |r| r.counters.dp_cells as f64),
    ];
    let mut rows = Vec::new();
    for (metric_name, metric) in metrics {
        let mut groups: BTreeMap<(String, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
        for report in reports.iter().filter(|r| r.error.is_none()) {
            groups
                .entry((report.algorithm.clone(), format!("{:?}", report.spec.kind)))
                .or_default()
                .entry(report.spec.n)
                .or_default()
                .push(metric(report));
        }
        for ((algorithm, kind), by_n) in groups {
            let points: Vec<(f64, f64)> = by_n
                .iter()
                .map(|(n, ys)| (*n as f64, ys.iter().sum::<f64>() / ys.len() as f64))
                .collect();
            if points.iter().filter(|(_, y)| *y > 0.0).count() >= 2 {
                rows.push(ScalingRow {
                    algorithm,
                    kind,
                    metric: metric_name.to_string(),
                    exponent: fit_loglog(&points),
                    sizes: points.len(),
                });
            }
        }
    }
    rows
}

/// Writes one JSON object per line.
pub fn write_reports(path: &Path, reports: &[RunReport]) -> Result<(), Error> {
    let file = std::fs::File::create(path)
        .map_err(|e| Error::InvalidParameter {
            name: "path",
            reason: format!("cannot create {}: {e}", path.display()),
        })?;
    let mut out = std::io::BufWriter::new(file);
    for report in reports {
        let line = serde_json::to_string(report).expect("reports serialize");
        writeln!(out, "{line}").map_err(|e| Error::InvalidParameter {
            name: "path",
            reason: format!("write failed: {e}"),
        })?;
    }
    Ok(())
}

/// Reads a JSONL report file back.
pub fn read_reports(path: &Path) -> Result<Vec<RunReport>, Error> {
    let file = std::fs::File::open(path).map_err(|e| Error::InvalidParameter {
        name: "path",
        reason: format!("cannot open {}: {e}", path.display()),
    })?;
    let mut reports = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::InvalidParameter {
            name: "path",
            reason: format!("read failed: {e}"),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        reports.push(
            serde_json::from_str(&line).map_err(|e| Error::InvalidParameter {
                name: "path",
                reason: format!("malformed report line: {e}"),
            })?,
        );
    }
    Ok(reports)
}
