//! The JSON run report written by `--report`.
//!
//! Every subcommand emits the same envelope; fields that do not apply
//! stay `null` so one published schema (`docs/report.schema.json`)
//! covers all of them. Wall-clock measurements are segregated under the
//! single `timings` key — strip that one key and reports from repeated
//! runs with the same seed compare byte-for-byte.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::Path;
use subseq_core::CounterSnapshot;

/// The one report shape shared by all subcommands.
#[derive(Debug, Serialize)]
pub struct RunEnvelope {
    /// Dotted subcommand path, e.g. `lcs.approx`.
    pub command: String,
    pub seed: u64,
    /// Requested parallelism cap (the engine runs sequentially, which
    /// satisfies every cap).
    pub threads: usize,
    /// The value printed on stdout, when the command produces one.
    pub estimate: Option<f64>,
    /// Decision verdict, for the decision procedures.
    pub accept: Option<bool>,
    /// Accepted λ-sweep level, for the sweeping estimators.
    pub lambda_final: Option<f64>,
    /// Operation counters (zeroed where a command does not count).
    pub counters: CounterSnapshot,
    /// Command-specific deterministic facts.
    pub details: Value,
    /// Where the certificate was written, when requested.
    pub certificate_path: Option<String>,
    /// Wall-clock section — the only non-deterministic part.
    pub timings: Value,
}

impl RunEnvelope {
    pub fn new(command: &str, seed: u64, threads: usize) -> Self {
        RunEnvelope {
            command: command.to_string(),
            seed,
            threads,
            estimate: None,
            accept: None,
            lambda_final: None,
            counters: CounterSnapshot::default(),
            details: json!({}),
            certificate_path: None,
            timings: json!({}),
        }
    }

    /// Writes the envelope as pretty-printed JSON.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut body = serde_json::to_string_pretty(self).context("serializing report")?;
        body.push('\n');
        std::fs::write(path, body)
            .with_context(|| format!("writing report {}", path.display()))
    }
}
