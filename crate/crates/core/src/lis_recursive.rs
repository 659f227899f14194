//! Bootstrapped LIS estimation: the pseudo-solution framework applied
//! recursively, with the same algorithm serving as its own interval
//! oracle on subarrays.
//!
//! On inputs longer than `n^{2κ}` the estimator partitions into `ζ = n^κ`
//! blocks (`n` is the length at the *top* call), builds candidate domains
//! restricted to the ambient value interval `[lo, hi]`, peels
//! pseudo-solutions, and — instead of evaluating qualities — samples
//! block ids at rate `p = 20·ln⁴n/(λ₀·ζ)` and asks the oracle to decide
//! each sampled interval at the attenuated level `λ₀ = (λ/2⁸)⁴`. A
//! pseudo-solution with at least `3·λ₀·p·ζ/4` accepted intervals accepts
//! the whole input. At or below `n^{2κ}` elements the recursion bottoms
//! out in the direct pipeline (domains → pseudo-solutions → evaluation)
//! with the literal threshold `λ·|A|`.
//!
//! The price of each level is the doubly-exponential ratio bookkeeping
//! `h_i(λ) = λ^{2·4^{i−1}−4} / 256^{2·4^{i−1}+3·4^{i−2}−7}`, exposed here
//! in log-space ([`ln_ratio_h`]) because the literal values underflow
//! `f64` after a few levels. The attenuation base `2⁸` is itself a knob:
//! at desk scale the literal `λ₀` collapses every threshold below one, so
//! separation experiments run with attenuation 1 while the bookkeeping
//! functions keep the literal constants.

use crate::counters::Counters;
use crate::lis::{
    construct_candidate_domains, construct_pseudo_solutions, domain_sample_count,
    evaluate_pseudo_solutions, CandidateDomain, LisConfig, SubarrayGrid,
};
use crate::strings::Symbol;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Tuning of the recursive estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct RecursionConfig {
    /// Access exponent; `ζ = n^κ` blocks per level, base case at `n^{2κ}`.
    pub kappa: f64,
    /// Attenuation base of the per-level guess: `λ₀ = (λ/attenuation)⁴`.
    /// The literal constant is `2⁸ = 256`.
    pub attenuation: f64,
    /// Multiplier on the id-sampling rate `p`.
    pub sample_scale: f64,
    /// Knobs of the domain/pseudo-solution/evaluation stages.
    pub lis: LisConfig,
    pub seed: u64,
}

impl Default for RecursionConfig {
    fn default() -> Self {
        RecursionConfig {
            kappa: 1.0 / 3.0,
            attenuation: 256.0,
            sample_scale: 1.0,
            lis: LisConfig::default(),
            seed: 0,
        }
    }
}

/// Depth bound `⌈1/κ⌉ − 1`.
pub fn depth_bound(kappa: f64) -> usize {
    ((1.0 / kappa).ceil() as usize).saturating_sub(1)
}

/// Attenuated recursion level `λ₀ = (λ/attenuation)⁴`.
pub fn lambda_zero(lambda: f64, attenuation: f64) -> f64 {
    (lambda / attenuation).powi(4)
}

/// `ln h_i(λ)` for the per-level approximation ratio
/// `h_i(λ) = λ^{2·4^{i−1}−4} / 256^{2·4^{i−1}+3·4^{i−2}−7}`.
///
/// `h_2(λ) = λ⁴/2³²` is the base of the induction; each level composes
/// as `h_i(λ⁴/2³²)·λ⁴/2³³`, which dominates the closed form `h_{i+1}(λ)`.
pub fn ln_ratio_h(i: u32, lambda: f64) -> f64 {
    assert!(i >= 2, "the ratio induction starts at i = 2");
    assert!(lambda > 0.0 && lambda < 1.0);
    let pow_i1 = 4f64.powi(i as i32 - 1);
    let pow_i2 = 4f64.powi(i as i32 - 2);
    let num_exp = 2.0 * pow_i1 - 4.0;
    let den_exp = 2.0 * pow_i1 + 3.0 * pow_i2 - 7.0;
    num_exp * lambda.ln() - den_exp * 256f64.ln()
}

/// `ln` of the advertised end-to-end ratio `λ^{2·4^L} / 256^{3·4^L}`
/// with `L = ⌈1/κ⌉ − 1` (a lower bound on `h_{L+1}`, hence still valid).
pub fn ln_final_guarantee(kappa: f64, lambda: f64) -> f64 {
    assert!(lambda > 0.0 && lambda < 1.0);
    let level = 4f64.powi(depth_bound(kappa) as i32);
    2.0 * level * lambda.ln() - 3.0 * level * 256f64.ln()
}

/// Runs one level of the oracle-driven estimator over `zeta` blocks.
///
/// The oracle receives `(block id, block slice, λ₀, ℓᵢ, rᵢ)` and answers
/// the decision contract "is the restricted LIS of this block ≥ λ₀·|block|
/// (up to the oracle's own approximation)". Accepts when some
/// pseudo-solution gets `3·λ₀·p·ζ/4` of its sampled intervals approved.
#[allow(clippy::too_many_arguments)]
pub fn recursive_estimate_with_oracle<F>(
    a: &[Symbol],
    zeta: usize,
    lambda: f64,
    lo: Symbol,
    hi: Symbol,
    n0: usize,
    cfg: &RecursionConfig,
    counters: &Counters,
    rng: &mut ChaCha8Rng,
    oracle: &mut F,
) -> bool
where
    F: FnMut(usize, &[Symbol], f64, Symbol, Symbol) -> bool,
{
    if a.is_empty() {
        return lambda <= 0.0;
    }
    let block = (a.len() / zeta.max(1)).max(1);
    let grid = SubarrayGrid::new(a, block, counters).expect("block is positive");
    let zeta_eff = grid.count();

    let mut k_max = 0;
    let domains: Vec<Vec<CandidateDomain>> = (0..zeta_eff)
        .map(|i| {
            k_max = k_max.max(domain_sample_count(grid.subarray_len(i), lambda, &cfg.lis));
            construct_candidate_domains(&grid, i, lambda, &cfg.lis, rng)
                .into_iter()
                .filter(|d| lo <= d.lo && d.hi <= hi)
                .collect()
        })
        .collect();
    let solutions = construct_pseudo_solutions(&domains, lambda, cfg.lis.eps, k_max);

    let lambda0 = lambda_zero(lambda, cfg.attenuation);
    let ln4 = (n0.max(2) as f64).ln().powi(4);
    let p = (cfg.sample_scale * 20.0 * ln4 / (lambda0 * zeta_eff as f64)).min(1.0);
    let sampled: Vec<usize> = (0..zeta_eff).filter(|_| rng.gen_bool(p)).collect();
    let threshold = 3.0 * lambda0 * p * zeta_eff as f64 / 4.0;

    for ps in &solutions {
        let mut accepted = 0u64;
        for &i in &sampled {
            if let Some((li, ri)) = ps.intervals()[i] {
                let (start, end) = grid.bounds(i);
                if oracle(i, &a[start..end], lambda0, li, ri) {
                    accepted += 1;
                }
            }
        }
        if accepted as f64 >= threshold {
            return true;
        }
    }
    false
}

/// Outcome of one recursive decision.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecursionReport {
    pub accept: bool,
    /// Deepest recursion level reached (0 = the top call answered alone).
    pub depth_reached: usize,
    /// λ₀ used by the top-level estimator, when it recursed.
    pub lambda0_top: Option<f64>,
    /// Block count per level.
    pub zeta: usize,
    /// Oracle invocations that did real work (memoized hits excluded).
    pub oracle_calls: u64,
    /// Total elements read.
    pub accesses: u64,
}

struct Recursor<'c> {
    n0: usize,
    cfg: &'c RecursionConfig,
    counters: &'c Counters,
    zeta: usize,
    depth_reached: usize,
    lambda0_top: Option<f64>,
}

impl Recursor<'_> {
    fn run(
        &mut self,
        a: &[Symbol],
        lambda: f64,
        lo: Symbol,
        hi: Symbol,
        depth: usize,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        assert!(
            depth <= depth_bound(self.cfg.kappa),
            "recursion depth {} exceeds the bound {}",
            depth,
            depth_bound(self.cfg.kappa)
        );
        self.depth_reached = self.depth_reached.max(depth);
        // Snap the cutoff to the nearest integer when the float power is
        // within rounding noise of one (4096^{2/3} evaluates below 256).
        let mut base_len = (self.n0 as f64).powf(2.0 * self.cfg.kappa);
        if (base_len - base_len.round()).abs() < 1e-6 {
            base_len = base_len.round();
        }
        if (a.len() as f64) > base_len {
            if depth == 0 {
                self.lambda0_top = Some(lambda_zero(lambda, self.cfg.attenuation));
            }
            let mut estimate_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let mut child_rng = ChaCha8Rng::seed_from_u64(rng.gen());
            let mut memo: HashMap<(usize, Symbol, Symbol), bool> = HashMap::new();
            let (zeta, n0, cfg, counters) = (self.zeta, self.n0, self.cfg, self.counters);
            let this = std::cell::RefCell::new(&mut *self);
            recursive_estimate_with_oracle(
                a,
                zeta,
                lambda,
                lo,
                hi,
                n0,
                cfg,
                counters,
                &mut estimate_rng,
                &mut |i, sa, l0, li, ri| {
                    if let Some(&hit) = memo.get(&(i, li, ri)) {
                        return hit;
                    }
                    Counters::add(&counters.oracle_calls, 1);
                    let outcome =
                        this.borrow_mut()
                            .run(sa, l0, li, ri, depth + 1, &mut child_rng);
                    memo.insert((i, li, ri), outcome);
                    outcome
                },
            )
        } else {
            self.base(a, lambda, lo, hi, rng)
        }
    }

    /// Direct pipeline with the literal acceptance threshold `λ·|A|`.
    fn base(
        &mut self,
        a: &[Symbol],
        lambda: f64,
        lo: Symbol,
        hi: Symbol,
        rng: &mut ChaCha8Rng,
    ) -> bool {
        if a.is_empty() {
            return true; // 0 ≥ λ·0
        }
        let block = (a.len() / self.zeta.max(1)).max(1);
        let grid = SubarrayGrid::new(a, block, self.counters).expect("block is positive");
        let mut k_max = 0;
        let domains: Vec<Vec<CandidateDomain>> = (0..grid.count())
            .map(|i| {
                k_max =
                    k_max.max(domain_sample_count(grid.subarray_len(i), lambda, &self.cfg.lis));
                construct_candidate_domains(&grid, i, lambda, &self.cfg.lis, rng)
                    .into_iter()
                    .filter(|d| lo <= d.lo && d.hi <= hi)
                    .collect()
            })
            .collect();
        let solutions = construct_pseudo_solutions(&domains, lambda, self.cfg.lis.eps, k_max);
        let evaluation = evaluate_pseudo_solutions(&grid, &solutions, lambda, &self.cfg.lis, rng);
        evaluation.best() >= lambda * a.len() as f64
    }
}

/// Decides `lis(A) ∩ [lo, hi] ≥ λ·|A|` with `Õ(n^κ·poly(1/λ))`-style
/// access patterns, recursing on subarrays until the base size `n^{2κ}`.
pub fn recursive_lis(
    a: &[Symbol],
    lambda: f64,
    lo: Symbol,
    hi: Symbol,
    cfg: &RecursionConfig,
) -> RecursionReport {
    let counters = Counters::new();
    let n0 = a.len();
    let zeta = (n0.max(1) as f64).powf(cfg.kappa).round().max(1.0) as usize;
    let mut recursor = Recursor {
        n0,
        cfg,
        counters: &counters,
        zeta,
        depth_reached: 0,
        lambda0_top: None,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let accept = recursor.run(a, lambda, lo, hi, 0, &mut rng);
    let snapshot = counters.snapshot();
    RecursionReport {
        accept,
        depth_reached: recursor.depth_reached,
        lambda0_top: recursor.lambda0_top,
        zeta,
        oracle_calls: snapshot.oracle_calls,
        accesses: snapshot.element_accesses,
    }
}
