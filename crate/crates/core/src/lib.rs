//! Estimation toolkit for longest common subsequence (LCS) and longest
//! increasing subsequence (LIS).
//!
//! The crate is organized as a pipeline of small, independently testable
//! stages:
//!
//! * [`strings`] — sequences, matchings (certified common subsequences),
//!   normalized scores, and the matching algebra used everywhere else.
//! * [`counters`] — cost accounting (oracle calls, DP cells, element reads).
//! * [`oracles`] — exact baselines: full LCS, bounded-length LCS, LIS and
//!   range-restricted LIS, plus witness-projection helpers.
//! * [`windows`] — layered window families over both input strings and the
//!   four orientation trials used by the window pipeline.
//! * [`sparsify_quadratic`] — anchor/tuple sparsification producing a
//!   certified estimate table with a near-quadratic call budget.
//! * [`sparsify_cubic`] — comparison-structure sparsification (extract
//!   disjoint common subsequences once per anchor, answer pair queries in
//!   linear time) with a near-cubic-to-subquadratic reduction.
//! * [`assembly`] — nearby repair of underestimated window pairs and the
//!   chain DP that assembles window-local certificates into a global one.
//! * [`pipeline`] — the end-to-end LCS estimator: λ-sweep, regime choice,
//!   sampled branch for small λ, and the balanced-alphabet wrapper.
//! * [`lis`] — the sublinear LIS stack: candidate domains, pseudo-solutions,
//!   sampled evaluation, decision and estimation sweeps.
//! * [`lis_recursive`] — bootstrapped recursive LIS decision with an
//!   oracle-counting outer layer.
//! * [`harness`] — instance generators, run matrices, JSONL records and
//!   log-log scaling fits used by the measurement CLI.
//!
//! Every estimator in this crate is *certifying*: a reported LCS bound is
//! always accompanied by a [`strings::Matching`] that verifies against the
//! original inputs, so estimates can never exceed the true optimum.

pub mod assembly;
pub mod counters;
pub mod harness;
pub mod lis;
pub mod lis_recursive;
pub mod oracles;
pub mod pipeline;
pub mod sparsify_cubic;
pub mod sparsify_quadratic;
pub mod strings;
pub mod windows;

pub use counters::{CounterSnapshot, Counters};
pub use strings::{Matching, Sequence};

/// Crate-wide error type.
///
/// Input validation failures (empty sequences, malformed parameters,
/// imbalanced alphabets) are reported through this enum; internal logic
/// errors are defended by assertions instead.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An operation received an empty sequence where content is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    /// A numeric or structural parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: String,
    },
    /// A matching failed structural validation (monotonicity or bounds).
    #[error("malformed matching: {0}")]
    MalformedMatching(String),
    /// The balanced-alphabet wrapper was called on an imbalanced pair.
    #[error(
        "alphabet imbalance: best single-symbol baseline {baseline} is below \
         the required n/|alphabet| = {required:.2}"
    )]
    Imbalanced { baseline: usize, required: f64 },
    /// Wrapped I/O error (file-backed harness operations).
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    /// Wrapped serialization error (report and record handling).
    #[error("serialization: {0}")]
    Serde(#[from] serde_json::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
