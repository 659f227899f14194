//! Global assembly: repairing underestimated window pairs, then chaining
//! certified pair bounds into one common subsequence with a
//! window-compatible dynamic program.
//!
//! Sparsification leaves two gaps. First, a few window pairs can slip
//! through with bounds far below their true LCS; [`nearby_search`] samples
//! `A`-side windows, detects such underestimated pairs by exact
//! comparison, and repairs everything within a start-index radius of them.
//! Second, per-pair bounds must be combined: [`window_dp`] runs the
//! classic skip/skip/take recurrence over the sorted distinct right ends
//! of both window sets and returns the best chain of non-overlapping,
//! index-ordered window pairs — together with a single global certificate
//! obtained by offsetting each pair certificate to absolute coordinates
//! and concatenating.

use crate::counters::Counters;
use crate::oracles::lcs_exact;
use crate::sparsify_quadratic::{BoundSource, EstimateTable};
use crate::strings::{normalize_lcs, Matching};
use crate::windows::WindowUniverse;
use crate::{Error, Result};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

const TOL: f64 = 1e-9;

/// Tuning of one nearby-search pass.
#[derive(Debug, Clone, Copy)]
pub struct NearbyParams {
    /// Sparsity exponent of the producing sparsifier (it misses at most
    /// `k^{2−eta}` pairs); drives both the sampling rate and the radius.
    pub eta: f64,
    /// Additive slack of the pass (`‖lcs‖` units); the sampling rate is
    /// inversely proportional to it.
    pub eps_nbs: f64,
    /// Ignore threshold: pairs with true `‖lcs‖` below `eps_threshold`
    /// never count as underestimated.
    pub eps_threshold: f64,
    /// A pair is underestimated when its recorded bound is below
    /// `regime_factor · true_lcs`.
    pub regime_factor: f64,
    /// The λ level recorded on repaired entries.
    pub lambda: f64,
    /// Desk-scale multiplier on the sampling rate.
    pub sample_scale: f64,
}

impl NearbyParams {
    /// Defaults for the quadratic regime at level `lambda`: slack `λ³`,
    /// approximation factor `(1−ε)λ³`, ignore threshold `ελ`. The
    /// sparsity exponent follows `ελ³/(800·layers·gap)`, which is tiny at
    /// desk scale, so the sampling rate saturates at 1.
    pub fn quadratic(lambda: f64, eps: f64, layers: usize, gap: usize) -> Self {
        NearbyParams {
            eta: eps * lambda.powi(3) / (800.0 * layers.max(1) as f64 * gap.max(1) as f64),
            eps_nbs: lambda.powi(3),
            eps_threshold: eps * lambda,
            regime_factor: (1.0 - eps) * lambda.powi(3),
            lambda,
            sample_scale: 1.0,
        }
    }

    /// Defaults for the cubic regime at level `lambda`: slack `λ⁴`,
    /// approximation factor `λ⁴/16`, sparsity exponent `0.65`.
    pub fn cubic(lambda: f64, eps: f64) -> Self {
        NearbyParams {
            eta: 0.65,
            eps_nbs: lambda.powi(4),
            eps_threshold: eps * lambda,
            regime_factor: lambda.powi(4) / 16.0,
            lambda,
            sample_scale: 1.0,
        }
    }

    /// Per-window sampling probability `min(1, 10·ln n·k^{−η/2}/ε_nbs)`,
    /// scaled by `sample_scale`.
    pub fn sampling_rate(&self, n: usize, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let raw = self.sample_scale * 10.0 * (n.max(2) as f64).ln()
            * (k as f64).powf(-self.eta / 2.0)
            / self.eps_nbs;
        raw.min(1.0)
    }

    /// Repair radius `⌈k^{η/2}·w_max⌉` in start-index distance.
    pub fn repair_radius(&self, k: usize, w_max: usize) -> usize {
        ((k as f64).powf(self.eta / 2.0) * w_max as f64).ceil() as usize
    }
}

/// Samples `A`-side windows and repairs underestimated pairs with exact
/// bounds.
///
/// Each sampled window is compared exactly against every `B`-side window.
/// When a pair's true normalized LCS reaches `eps_threshold` while the
/// table's bound is below `regime_factor` times the true size, every pair
/// within `repair_radius` start-index distance on both sides is recomputed
/// exactly and written with [`BoundSource::Nearby`]. Updates are monotone:
/// no bound ever decreases.
pub fn nearby_search(
    universe: &WindowUniverse,
    table: &EstimateTable,
    params: &NearbyParams,
    counters: &Counters,
    rng: &mut ChaCha8Rng,
) -> EstimateTable {
    let mut out = table.clone();
    let ka = universe.split();
    let k = universe.k();
    let n = universe.seq_a.len().max(universe.seq_b.len());
    let w_max = universe.a.max_len().max(universe.b.max_len());
    let p = params.sampling_rate(n, k);
    let radius = params.repair_radius(k, w_max);

    // Repairs of overlapping neighborhoods hit the same pair repeatedly;
    // compute each witness once.
    let mut exact: HashMap<(usize, usize), Matching> = HashMap::new();

    for i in 0..ka {
        if !rng.gen_bool(p) {
            continue;
        }
        for j in ka..k {
            Counters::add(&counters.nearby_exact_calls, 1);
            let (true_len, witness) = lcs_exact(universe.content(i), universe.content(j));
            exact.insert((i, j), witness);
            if true_len == 0 {
                continue;
            }
            let norm = normalize_lcs(true_len, universe.len(i), universe.len(j))
                .expect("windows are non-empty");
            let underestimated = norm >= params.eps_threshold - TOL
                && (out.bound(i, j) as f64) < params.regime_factor * true_len as f64 - TOL;
            if !underestimated {
                continue;
            }
            let li = universe.window(i).left;
            let lj = universe.window(j).left;
            for i2 in 0..ka {
                if universe.window(i2).left.abs_diff(li) > radius {
                    continue;
                }
                for j2 in ka..k {
                    if universe.window(j2).left.abs_diff(lj) > radius {
                        continue;
                    }
                    let witness = exact.entry((i2, j2)).or_insert_with(|| {
                        Counters::add(&counters.nearby_exact_calls, 1);
                        lcs_exact(universe.content(i2), universe.content(j2)).1
                    });
                    out.improve(i2, j2, BoundSource::Nearby, params.lambda, witness.clone());
                }
            }
        }
    }
    out
}

/// One taken pair in the optimal window chain.
#[derive(Debug, Clone)]
pub struct DpChainLink {
    /// Universe id of the `A`-side window.
    pub a: usize,
    /// Universe id of the `B`-side window.
    pub b: usize,
    /// The pair certificate in window-local coordinates.
    pub certificate: Matching,
}

/// Result of the window-compatible dynamic program.
#[derive(Debug, Clone)]
pub struct DpOutcome {
    /// Sum of the chained bounds.
    pub total: usize,
    /// Taken pairs in chain order.
    pub chain: Vec<DpChainLink>,
    /// Global certificate over the full sequences (size = `total`).
    pub certificate: Matching,
}

/// Backpointer of one DP cell.
#[derive(Debug, Clone, Copy)]
enum Back {
    Zero,
    SkipA,
    SkipB,
    Take { pair: usize, px: usize, py: usize },
}

/// Chains certified pair bounds into the best window-compatible total.
///
/// The recurrence runs over the sorted distinct right ends `S₁`, `S₂` of
/// the two window sets: a cell either skips the latest right end on one
/// side or takes a flagged pair ending exactly there, continuing from the
/// cell just before the pair's left ends. Exactly `|S₁|·|S₂|` cells are
/// computed (counted as `dp_cells`).
///
/// The returned chain is strictly index-ordered and non-overlapping, so
/// offsetting each certificate by its window's start positions yields one
/// monotone global matching; its size equals the chained total.
pub fn window_dp(
    universe: &WindowUniverse,
    table: &EstimateTable,
    counters: &Counters,
) -> DpOutcome {
    let ka = universe.split();
    let k = universe.k();

    let mut rights_a: Vec<usize> = (0..ka).map(|i| universe.window(i).right()).collect();
    rights_a.sort_unstable();
    rights_a.dedup();
    let mut rights_b: Vec<usize> = (ka..k).map(|j| universe.window(j).right()).collect();
    rights_b.sort_unstable();
    rights_b.dedup();
    let (ra, rb) = (rights_a.len(), rights_b.len());

    // Bucket cross-side flagged pairs by the cell their right ends land in.
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut buckets: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (i, j, _) in table.iter_flagged() {
        if i >= ka || j < ka {
            continue; // same-side entry (diagonal prefill etc.)
        }
        let x = rights_a.partition_point(|&r| r <= universe.window(i).right());
        let y = rights_b.partition_point(|&r| r <= universe.window(j).right());
        buckets.entry((x, y)).or_default().push(pairs.len());
        pairs.push((i, j));
    }

    let cols = rb + 1;
    let idx = |x: usize, y: usize| x * cols + y;
    let mut value = vec![0usize; (ra + 1) * cols];
    let mut back = vec![Back::Zero; (ra + 1) * cols];

    for x in 1..=ra {
        for y in 1..=rb {
            Counters::add(&counters.dp_cells, 1);
            let mut best = value[idx(x - 1, y)];
            let mut how = Back::SkipA;
            if value[idx(x, y - 1)] > best {
                best = value[idx(x, y - 1)];
                how = Back::SkipB;
            }
            if let Some(bucket) = buckets.get(&(x, y)) {
                for &pair in bucket {
                    let (i, j) = pairs[pair];
                    // A previous pair must end at or before this pair's
                    // left ends.
                    let px = rights_a.partition_point(|&r| r <= universe.window(i).left);
                    let py = rights_b.partition_point(|&r| r <= universe.window(j).left);
                    let cand = value[idx(px, py)] + table.bound(i, j);
                    if cand > best {
                        best = cand;
                        how = Back::Take { pair, px, py };
                    }
                }
            }
            value[idx(x, y)] = best;
            back[idx(x, y)] = how;
        }
    }

    // Walk the backpointers from the full-prefix cell.
    let mut chain: Vec<DpChainLink> = Vec::new();
    let (mut x, mut y) = (ra, rb);
    while x > 0 && y > 0 {
        match back[idx(x, y)] {
            Back::Zero => break,
            Back::SkipA => x -= 1,
            Back::SkipB => y -= 1,
            Back::Take { pair, px, py } => {
                let (i, j) = pairs[pair];
                chain.push(DpChainLink {
                    a: i,
                    b: j,
                    certificate: table
                        .certificate(i, j)
                        .expect("taken pair is flagged"),
                });
                x = px;
                y = py;
            }
        }
    }
    chain.reverse();

    let pieces: Vec<Matching> = chain
        .iter()
        .map(|link| {
            link.certificate.offset(
                universe.window(link.a).left,
                universe.window(link.b).left,
            )
        })
        .collect();
    let certificate =
        Matching::concat(&pieces).expect("chained window certificates must be monotone");
    let total = value[idx(ra, rb)];
    assert_eq!(
        total,
        certificate.len(),
        "chained total must equal the assembled certificate size"
    );
    DpOutcome {
        total,
        chain,
        certificate,
    }
}

/// Entrywise-max merge of tables from different λ levels.
///
/// All tables must cover the same window universe.
pub fn merge_tables(tables: Vec<EstimateTable>) -> Result<EstimateTable> {
    let mut iter = tables.into_iter();
    let Some(mut merged) = iter.next() else {
        return Err(Error::EmptyInput("merge_tables needs at least one table"));
    };
    for table in iter {
        if table.k() != merged.k() {
            return Err(Error::InvalidParameter {
                name: "tables",
                reason: format!(
                    "cannot merge tables over {} and {} windows",
                    merged.k(),
                    table.k()
                ),
            });
        }
        merged.merge_from(table);
    }
    Ok(merged)
}
