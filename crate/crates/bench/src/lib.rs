//! Shared fixtures for the criterion benchmarks.
//!
//! Everything here routes through the harness generators so the benched
//! inputs are the same reproducible families the run matrix uses, and
//! through the desk-scale pipeline configuration the command line ships
//! with, so the numbers describe the tool as invoked rather than an
//! artificial fast path.

use subseq_core::harness::{generate, InstanceKind, InstanceSpec};
use subseq_core::pipeline::{LcsConfig, Regime, ScaleOverrides};
use subseq_core::strings::Symbol;

/// A planted pair with normalized LCS 0.6, deterministic in `n`.
pub fn planted_pair(n: usize) -> (Vec<Symbol>, Vec<Symbol>) {
    let mut spec = InstanceSpec::new(InstanceKind::PlantedLcs, n, 7);
    spec.plant_lambda = 0.6;
    let instance = generate(&spec).expect("planted instance");
    let b = instance.b.expect("planted pairs carry a B side");
    (instance.a, b)
}

/// A single array from one of the LIS families.
pub fn lis_array(kind: InstanceKind, n: usize) -> Vec<Symbol> {
    generate(&InstanceSpec::new(kind, n, 7))
        .expect("lis instance")
        .a
}

/// The desk-scale pipeline configuration: capped ladder and λ′ grid,
/// granularity 1/2, sampling multipliers 1/10 — the command-line defaults.
pub fn desk_lcs_config(regime: Regime, eps: f64, seed: u64) -> LcsConfig {
    LcsConfig {
        regime,
        eps,
        seed,
        scale: ScaleOverrides {
            anchor_scale: 0.1,
            round_scale: 0.1,
            nearby_scale: 0.1,
            layer_cap: Some(2),
            lambda_grid_cap: Some(2),
            eps_window_override: Some(0.5),
            ..ScaleOverrides::default()
        },
        ..LcsConfig::default()
    }
}
