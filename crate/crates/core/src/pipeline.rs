//! End-to-end approximate-LCS orchestration: the λ-sweep, regime
//! selection, the small-λ sampling branch, mapping trials, and the
//! balanced-alphabet wrapper.
//!
//! The driver guesses the normalized LCS by sweeping λ downward from 1 by
//! `(1−ε)` factors. Each guess is certified or refuted:
//!
//! * tiny guesses (`λ ≤ κ`, with `κ = n^{−1/140}`) go to the small-λ
//!   branch, which subsamples `⌈nλ³⌉` positions of `A` and asks a bounded
//!   LCS query against `B`;
//! * all other guesses build windows, sparsify at every level of the
//!   geometric grid `{ελ, ε(1+ε)λ, …, 1}`, merge the tables, repair with
//!   nearby search, and chain with the window DP (the cubic construction
//!   is asymmetric, so it additionally tries all four input orientations
//!   and keeps the best unmapped result).
//!
//! A guess is *accepted* when the chained total reaches the regime's
//! target at λ; the sweep returns the first accepted level. Every returned
//! estimate is the size of a verified common subsequence, so the pipeline
//! can underestimate but never overestimate.

use crate::assembly::{merge_tables, nearby_search, window_dp, NearbyParams};
use crate::counters::{CounterSnapshot, Counters};
use crate::oracles::{lcs_bounded, OptCache};
use crate::sparsify_cubic::{sparsify_cubic, CubicParams};
use crate::sparsify_quadratic::{sparsify_quadratic, EstimateTable, QuadraticParams};
use crate::strings::{Matching, Symbol};
use crate::windows::{
    build_windows_cubic, build_windows_quadratic, mapping_trials, unmap_trial_matching,
    WindowUniverse,
};
use crate::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::Instant;

/// Which sparsification stack the sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Anchored comparison structures; factor `Ω(λ³)` of the optimum.
    Cubic,
    /// Birthday-triangle tuples; factor `(1−ε)λ²` but needs constant λ.
    Quadratic,
    /// Quadratic while the sweep level is ≥ 0.1, cubic below.
    Auto,
}

/// Desk-scale multipliers and caps on the sampling constants.
///
/// Every field defaults to the literal constant of the source analysis
/// (multiplier 1, no cap). The caps exist because several constructions
/// are sized for astronomically large inputs — e.g. the quadratic window
/// layering needs `⌈log_{1+ε₀}(1/ε₀)⌉` layers, which at `ε = 0.01` is
/// several hundred — and would otherwise dominate desk-scale runs without
/// changing what the tests can observe.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaleOverrides {
    /// Multiplier on the quadratic sparsifier's anchor-sample size.
    pub anchor_scale: f64,
    /// Multiplier on the cubic sparsifier's round count.
    pub round_scale: f64,
    /// Multiplier on the nearby-search sampling rate.
    pub nearby_scale: f64,
    /// Multiplier on the λ-sweep acceptance targets.
    pub accept_scale: f64,
    /// Cap on window layers per direction.
    pub layer_cap: Option<u32>,
    /// Keep only this many largest levels of the λ′ grid.
    pub lambda_grid_cap: Option<usize>,
    /// Replaces the small-λ gate `κ = n^{−1/140}`.
    pub kappa_override: Option<f64>,
    /// Replaces the window-construction granularity `ε₀ = ε·λ`.
    pub eps_window_override: Option<f64>,
    /// Stop the sweep below this λ (default `1/n`).
    pub sweep_floor: Option<f64>,
}

impl Default for ScaleOverrides {
    fn default() -> Self {
        ScaleOverrides {
            anchor_scale: 1.0,
            round_scale: 1.0,
            nearby_scale: 1.0,
            accept_scale: 1.0,
            layer_cap: None,
            lambda_grid_cap: None,
            kappa_override: None,
            eps_window_override: None,
            sweep_floor: None,
        }
    }
}

/// Configuration of one approximate-LCS run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct LcsConfig {
    pub regime: Regime,
    /// Sweep precision; also feeds window granularity and targets.
    pub eps: f64,
    /// Window width; `None` uses `⌈√n⌉` (quadratic) or `⌈√n·λ⌉` (cubic).
    pub d: Option<usize>,
    /// Anchor/round exponent; `None` uses 1/10 (quadratic) or 2/3 (cubic).
    pub gamma: Option<f64>,
    pub seed: u64,
    pub scale: ScaleOverrides,
}

impl Default for LcsConfig {
    fn default() -> Self {
        LcsConfig {
            regime: Regime::Auto,
            eps: 0.1,
            d: None,
            gamma: None,
            seed: 0,
            scale: ScaleOverrides::default(),
        }
    }
}

/// Wall-clock decomposition of one run, in milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub windows_ms: f64,
    pub sparsify_ms: f64,
    pub nearby_ms: f64,
    pub dp_ms: f64,
    pub total_ms: f64,
}

/// Certified outcome of a pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LcsReport {
    /// Size of the certificate (never above the true LCS).
    pub estimate: usize,
    /// A verified common subsequence of the two inputs.
    pub certificate: Matching,
    /// The accepted sweep level, or 0 when no level was accepted.
    pub lambda_final: f64,
    pub counters: CounterSnapshot,
    pub timings: StageTimings,
}

impl LcsReport {
    fn empty() -> Self {
        LcsReport {
            estimate: 0,
            certificate: Matching::empty(),
            lambda_final: 0.0,
            counters: CounterSnapshot::default(),
            timings: StageTimings::default(),
        }
    }
}

/// The geometric λ′ grid `{ελ, ε(1+ε)λ, …} ∪ {1}`, optionally truncated
/// to its largest `cap` levels.
pub fn lambda_grid(lambda: f64, eps: f64, cap: Option<usize>) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut level = eps * lambda;
    while level < 1.0 {
        grid.push(level);
        level *= 1.0 + eps;
    }
    grid.push(1.0);
    if let Some(cap) = cap {
        let drop = grid.len().saturating_sub(cap.max(1));
        grid.drain(..drop);
    }
    grid
}

/// Acceptance target of the quadratic regime at sweep level `lambda`:
/// `(1−ε)·λ³·n`, scaled.
pub fn quadratic_target(lambda: f64, eps: f64, n: usize, accept_scale: f64) -> f64 {
    accept_scale * (1.0 - eps) * lambda.powi(3) * n as f64
}

/// Acceptance target of the windowed cubic regime at sweep level
/// `lambda`: `λ⁴·n/16`, scaled.
pub fn cubic_target(lambda: f64, n: usize, accept_scale: f64) -> f64 {
    accept_scale * lambda.powi(4) * n as f64 / 16.0
}

/// Small-λ gate `κ = n^{−1/140}`.
pub fn small_lambda_gate(n: usize) -> f64 {
    (n.max(2) as f64).powf(-1.0 / 140.0)
}

fn resolve_regime(cfg: Regime, lambda: f64) -> Regime {
    match cfg {
        Regime::Auto => {
            if lambda >= 0.1 {
                Regime::Quadratic
            } else {
                Regime::Cubic
            }
        }
        other => other,
    }
}

/// Subsamples `⌈nλ³⌉` positions of `a` (a uniform subset, kept in order)
/// and asks one bounded-LCS query.
///
/// Returns a certificate of size `⌈(1−ε)λ⁴n⌉` in original coordinates
/// when the sampled subsequence still shares that much with `b`; `None`
/// refutes this λ for the sampled positions.
pub fn small_lambda_branch(
    a: &[Symbol],
    b: &[Symbol],
    lambda: f64,
    eps: f64,
    counters: &Counters,
    rng: &mut ChaCha8Rng,
) -> Option<Matching> {
    let n = a.len().max(b.len());
    if n == 0 {
        return None;
    }
    let q = ((1.0 - eps) * lambda.powi(4) * n as f64).ceil() as usize;
    if q == 0 {
        return Some(Matching::empty());
    }
    let sample_size = ((n as f64 * lambda.powi(3)).ceil() as usize).min(a.len());
    let mut positions: Vec<usize> =
        rand::seq::index::sample(rng, a.len(), sample_size).into_vec();
    positions.sort_unstable();
    let sampled: Vec<Symbol> = positions.iter().map(|&p| a[p]).collect();
    Counters::add(&counters.element_accesses, positions.len() as u64);
    Counters::add(&counters.lcs_bounded_calls, 1);
    Counters::add(&counters.dp_cells, (sampled.len() * q) as u64);
    let found = lcs_bounded(&sampled, b, q)?;
    let mapped: Vec<(usize, usize)> = found
        .pairs()
        .iter()
        .map(|&(si, bj)| (positions[si], bj))
        .collect();
    Some(Matching::from_monotone(mapped))
}

/// Hard cap on windows per λ-level.
///
/// The pairwise estimate table is Θ(k²) cells, so a level past this many
/// windows cannot be compared at desk scale; it almost always means the
/// literal `ε/200` ladder was requested without caps. Rejecting with an
/// actionable error beats exhausting memory.
const MAX_WINDOWS_PER_LEVEL: usize = 10_000;

fn check_window_budget(k: usize, lambda: f64) -> Result<()> {
    if k > MAX_WINDOWS_PER_LEVEL {
        return Err(Error::InvalidParameter {
            name: "windows",
            reason: format!(
                "level λ = {lambda:.4} produces {k} windows whose estimate table needs \
                 {} cells; truncate the ladder (layer_cap), coarsen the granularity \
                 (eps_window_override), or shrink the input",
                k * (k + 1) / 2
            ),
        });
    }
    Ok(())
}

/// One windowed quadratic level: windows, the λ′ grid of sparsifier
/// passes, merge, nearby repair, DP.
fn quadratic_level(
    a: &[Symbol],
    b: &[Symbol],
    lambda: f64,
    cfg: &LcsConfig,
    counters: &Counters,
    rng: &mut ChaCha8Rng,
    timings: &mut StageTimings,
) -> Result<(usize, Matching)> {
    let n = a.len();
    let d = cfg
        .d
        .unwrap_or_else(|| (n as f64).sqrt().ceil() as usize)
        .max(1);
    let eps_prime = cfg.eps / 200.0;
    let eps_w = cfg
        .scale
        .eps_window_override
        .unwrap_or(eps_prime * lambda)
        .clamp(1e-6, 0.999);

    let t = Instant::now();
    let (wa, wb) = build_windows_quadratic(n, d, eps_w, cfg.scale.layer_cap)?;
    let universe = WindowUniverse::new(a, b, wa, wb)?;
    check_window_budget(universe.k(), lambda)?;
    timings.windows_ms += t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let params = QuadraticParams {
        eps: eps_prime,
        gamma: cfg.gamma.unwrap_or(0.1),
        anchor_scale: cfg.scale.anchor_scale,
    };
    let mut cache = OptCache::new();
    let mut tables: Vec<EstimateTable> = Vec::new();
    for level in lambda_grid(lambda, cfg.eps, cfg.scale.lambda_grid_cap) {
        tables.push(sparsify_quadratic(
            &universe, level, &params, &mut cache, counters, rng,
        ));
    }
    let merged = merge_tables(tables)?;
    timings.sparsify_ms += t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let mut nearby = NearbyParams::quadratic(
        lambda,
        cfg.eps,
        universe.a.layer_count(),
        d,
    );
    nearby.sample_scale = cfg.scale.nearby_scale;
    let repaired = nearby_search(&universe, &merged, &nearby, counters, rng);
    timings.nearby_ms += t.elapsed().as_secs_f64() * 1e3;

    let t = Instant::now();
    let outcome = window_dp(&universe, &repaired, counters);
    timings.dp_ms += t.elapsed().as_secs_f64() * 1e3;
    Ok((outcome.total, outcome.certificate))
}

/// One windowed cubic level over all four mapping trials; the best
/// outcome is unmapped back to the original coordinate frame.
fn cubic_level(
    a: &[Symbol],
    b: &[Symbol],
    lambda: f64,
    cfg: &LcsConfig,
    counters: &Counters,
    rng: &mut ChaCha8Rng,
    timings: &mut StageTimings,
) -> Result<(usize, Matching)> {
    let n = a.len();
    let d = cfg
        .d
        .unwrap_or_else(|| ((n as f64).sqrt() * lambda).ceil() as usize)
        .max(1);
    let eps_w = cfg
        .scale
        .eps_window_override
        .unwrap_or(cfg.eps * lambda)
        .clamp(1e-6, 0.999);

    let mut best: (usize, Matching) = (0, Matching::empty());
    for (kind, ta, tb) in mapping_trials(a, b) {
        let t = Instant::now();
        let (wa, wb) = build_windows_cubic(n, d, eps_w, cfg.scale.layer_cap)?;
        let universe = WindowUniverse::new(&ta, &tb, wa, wb)?;
        check_window_budget(universe.k(), lambda)?;
        timings.windows_ms += t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let params = CubicParams {
            gamma: cfg.gamma.unwrap_or(2.0 / 3.0),
            round_scale: cfg.scale.round_scale,
        };
        let mut tables: Vec<EstimateTable> = Vec::new();
        for level in lambda_grid(lambda, cfg.eps, cfg.scale.lambda_grid_cap) {
            tables.push(sparsify_cubic(&universe, level, &params, counters, rng));
        }
        let merged = merge_tables(tables)?;
        timings.sparsify_ms += t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let mut nearby = NearbyParams::cubic(lambda, cfg.eps);
        nearby.sample_scale = cfg.scale.nearby_scale;
        let repaired = nearby_search(&universe, &merged, &nearby, counters, rng);
        timings.nearby_ms += t.elapsed().as_secs_f64() * 1e3;

        let t = Instant::now();
        let outcome = window_dp(&universe, &repaired, counters);
        timings.dp_ms += t.elapsed().as_secs_f64() * 1e3;

        if outcome.total > best.0 {
            let unmapped = unmap_trial_matching(kind, &outcome.certificate, n, n);
            best = (outcome.total, unmapped);
        }
    }
    Ok(best)
}

/// Runs the λ-sweep and returns the first certified level.
///
/// Inputs of unequal length are padded with a fresh symbol (the padding
/// can never match, so certificates stay within the original
/// coordinates). The sweep multiplies λ by `(1−ε)` until acceptance or
/// until `λn < 1`; if nothing is accepted the best certified outcome seen
/// is returned with `lambda_final = 0`.
pub fn approx_lcs(a: &[Symbol], b: &[Symbol], cfg: &LcsConfig) -> Result<LcsReport> {
    let started = Instant::now();
    if a.is_empty() || b.is_empty() {
        return Ok(LcsReport::empty());
    }
    let counters = Counters::new();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut timings = StageTimings::default();

    let n = a.len().max(b.len());
    let dummy: Symbol = a
        .iter()
        .chain(b.iter())
        .copied()
        .max()
        .unwrap_or(0)
        .saturating_add(1);
    let mut pa: Vec<Symbol> = a.to_vec();
    let mut pb: Vec<Symbol> = b.to_vec();
    pa.resize(n, dummy);
    pb.resize(n, dummy);

    let kappa = cfg
        .scale
        .kappa_override
        .unwrap_or_else(|| small_lambda_gate(n));
    let floor = cfg.scale.sweep_floor.unwrap_or(1.0 / n as f64);

    let mut best: (usize, Matching, f64) = (0, Matching::empty(), 0.0);
    let mut lambda = 1.0f64;
    while lambda >= floor {
        let regime = resolve_regime(cfg.regime, lambda);
        let (value, certificate, target) = match regime {
            Regime::Quadratic => {
                let (value, certificate) =
                    quadratic_level(&pa, &pb, lambda, cfg, &counters, &mut rng, &mut timings)?;
                let target = quadratic_target(lambda, cfg.eps, n, cfg.scale.accept_scale);
                (value, certificate, target)
            }
            Regime::Cubic if lambda <= kappa => {
                let t = Instant::now();
                let found =
                    small_lambda_branch(&pa, &pb, lambda, cfg.eps, &counters, &mut rng);
                timings.sparsify_ms += t.elapsed().as_secs_f64() * 1e3;
                match found {
                    Some(certificate) => {
                        // The bounded query already enforced the target.
                        let value = certificate.len();
                        (value, certificate, value as f64)
                    }
                    None => (0, Matching::empty(), f64::INFINITY),
                }
            }
            Regime::Cubic => {
                let (value, certificate) =
                    cubic_level(&pa, &pb, lambda, cfg, &counters, &mut rng, &mut timings)?;
                let target = cubic_target(lambda, n, cfg.scale.accept_scale);
                (value, certificate, target)
            }
            Regime::Auto => unreachable!("resolved above"),
        };

        debug_assert!(crate::strings::verify_common_subsequence(
            &certificate,
            &pa,
            &pb
        ));
        if value > best.0 {
            best = (value, certificate.clone(), lambda);
        }
        if value as f64 >= target {
            timings.total_ms = started.elapsed().as_secs_f64() * 1e3;
            return Ok(LcsReport {
                estimate: value,
                certificate,
                lambda_final: lambda,
                counters: counters.snapshot(),
                timings,
            });
        }
        lambda *= 1.0 - cfg.eps;
    }

    timings.total_ms = started.elapsed().as_secs_f64() * 1e3;
    let (estimate, certificate, _) = best;
    Ok(LcsReport {
        estimate,
        certificate,
        lambda_final: 0.0,
        counters: counters.snapshot(),
        timings,
    })
}

/// Balanced-alphabet wrapper: a single-symbol baseline certificate plus
/// the full pipeline, whichever is larger.
///
/// The baseline symbol is the one maximizing the smaller of its two
/// occurrence counts; the balance condition requires that count to reach
/// `n/|Σ|`, otherwise [`crate::Error::Imbalanced`] is returned.
pub fn lcs_balanced_alphabet(a: &[Symbol], b: &[Symbol], cfg: &LcsConfig) -> Result<LcsReport> {
    if a.is_empty() || b.is_empty() {
        return Ok(LcsReport::empty());
    }
    let mut counts: std::collections::BTreeMap<Symbol, (usize, usize)> =
        std::collections::BTreeMap::new();
    for &s in a {
        counts.entry(s).or_default().0 += 1;
    }
    for &s in b {
        counts.entry(s).or_default().1 += 1;
    }
    let sigma = counts.len();
    let (&symbol, &(ca, cb)) = counts
        .iter()
        .max_by_key(|(_, &(ca, cb))| ca.min(cb))
        .expect("inputs are non-empty");
    let baseline = ca.min(cb);
    let n = a.len().max(b.len());
    let required = n as f64 / sigma as f64;
    if (baseline as f64) < required {
        return Err(crate::Error::Imbalanced { baseline, required });
    }

    let pairs: Vec<(usize, usize)> = a
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s == symbol)
        .map(|(i, _)| i)
        .zip(
            b.iter()
                .enumerate()
                .filter(|&(_, &s)| s == symbol)
                .map(|(j, _)| j),
        )
        .collect();
    let baseline_certificate = Matching::from_monotone(pairs);

    let mut report = approx_lcs(a, b, cfg)?;
    if baseline_certificate.len() > report.estimate {
        report.estimate = baseline_certificate.len();
        report.certificate = baseline_certificate;
        report.lambda_final = report
            .lambda_final
            .max(baseline as f64 / n as f64);
    }
    Ok(report)
}
