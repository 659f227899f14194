//! Cost accounting shared by every stage of the pipelines.
//!
//! Counters are the primary scaling signal of this crate: wall-clock timings
//! vary with the machine, but oracle-call counts, DP cell counts, and element
//! accesses are deterministic for a fixed seed, so scaling claims are stated
//! and tested in terms of counter snapshots.
//!
//! All counters are atomic so a single [`Counters`] value can be threaded
//! through a pipeline by shared reference.

use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};

/// Mutable counter set, incremented in place by the algorithms.
#[derive(Debug, Default)]
pub struct Counters {
    /// Full LCS table computations (exact oracle invocations).
    pub lcs_exact_calls: AtomicU64,
    /// Bounded-size LCS computations (threshold oracle invocations).
    pub lcs_bounded_calls: AtomicU64,
    /// Dynamic-programming cells touched (both oracles and the chain DP).
    pub dp_cells: AtomicU64,
    /// Window pairs examined by sparsifier scans.
    pub window_pairs_scanned: AtomicU64,
    /// Exact recomputations performed by the nearby repair stage.
    pub nearby_exact_calls: AtomicU64,
    /// Individual input-element reads performed by the sublinear LIS stack.
    pub element_accesses: AtomicU64,
    /// Decision-oracle invocations made by the recursive LIS layer.
    pub oracle_calls: AtomicU64,
}

impl Counters {
    /// Fresh all-zero counters.
    pub fn new() -> Self {
        Counters::default()
    }

    /// Adds `n` to a counter field.
    pub fn add(field: &AtomicU64, n: u64) {
        field.fetch_add(n, Ordering::Relaxed);
    }

    /// Immutable copy of the current values.
    pub fn snapshot(&self) -> CounterSnapshot {
        CounterSnapshot {
            lcs_exact_calls: self.lcs_exact_calls.load(Ordering::Relaxed),
            lcs_bounded_calls: self.lcs_bounded_calls.load(Ordering::Relaxed),
            dp_cells: self.dp_cells.load(Ordering::Relaxed),
            window_pairs_scanned: self.window_pairs_scanned.load(Ordering::Relaxed),
            nearby_exact_calls: self.nearby_exact_calls.load(Ordering::Relaxed),
            element_accesses: self.element_accesses.load(Ordering::Relaxed),
            oracle_calls: self.oracle_calls.load(Ordering::Relaxed),
        }
    }
}

/// Serializable counter values at a point in time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterSnapshot {
    pub lcs_exact_calls: u64,
    pub lcs_bounded_calls: u64,
    pub dp_cells: u64,
    pub window_pairs_scanned: u64,
    pub nearby_exact_calls: u64,
    pub element_accesses: u64,
    pub oracle_calls: u64,
}

impl CounterSnapshot {
    /// Field-wise difference (`self - earlier`), saturating at zero.
    pub fn since(&self, earlier: &CounterSnapshot) -> CounterSnapshot {
        CounterSnapshot {
            lcs_exact_calls: self.lcs_exact_calls.saturating_sub(earlier.lcs_exact_calls),
            lcs_bounded_calls: self
                .lcs_bounded_calls
                .saturating_sub(earlier.lcs_bounded_calls),
            dp_cells: self.dp_cells.saturating_sub(earlier.dp_cells),
            window_pairs_scanned: self
                .window_pairs_scanned
                .saturating_sub(earlier.window_pairs_scanned),
            nearby_exact_calls: self
                .nearby_exact_calls
                .saturating_sub(earlier.nearby_exact_calls),
            element_accesses: self
                .element_accesses
                .saturating_sub(earlier.element_accesses),
            oracle_calls: self.oracle_calls.saturating_sub(earlier.oracle_calls),
        }
    }
}
