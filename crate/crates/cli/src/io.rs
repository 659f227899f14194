//! Sequence file loading and emission.
//!
//! Two encodings, chosen per invocation with `--format`:
//!
//! * `numeric` — whitespace-separated decimal alphabet codes, one value
//!   per line canonically. This is what `gen` emits, so generated
//!   instances feed straight back into the estimators.
//! * `text` — raw bytes of the file, each byte one symbol in `0..=255`.

use anyhow::{Context, Result};
use clap::ValueEnum;
use std::path::Path;
use subseq_core::strings::Symbol;

/// On-disk sequence encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeqFormat {
    /// Whitespace-separated decimal codes.
    Numeric,
    /// Raw bytes, one symbol per byte.
    Text,
}

/// Reads one sequence from `path` under the given encoding.
pub fn load_sequence(path: &Path, format: SeqFormat) -> Result<Vec<Symbol>> {
    let raw =
        std::fs::read(path).with_context(|| format!("reading sequence {}", path.display()))?;
    match format {
        SeqFormat::Text => Ok(raw.into_iter().map(Symbol::from).collect()),
        SeqFormat::Numeric => {
            let text = String::from_utf8(raw)
                .with_context(|| format!("{} is not valid UTF-8", path.display()))?;
            text.split_whitespace()
                .map(|token| {
                    token.parse::<Symbol>().with_context(|| {
                        format!("bad symbol {token:?} in {}", path.display())
                    })
                })
                .collect()
        }
    }
}

/// Canonical numeric rendering: one decimal code per line.
pub fn render_numeric(seq: &[Symbol]) -> String {
    let mut out = String::with_capacity(seq.len() * 4);
    for symbol in seq {
        out.push_str(&symbol.to_string());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numeric_round_trips_through_render() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.txt");
        let seq = vec![4, 3, 2, 1, 8, 7, 6, 5];
        std::fs::write(&path, render_numeric(&seq)).unwrap();
        assert_eq!(load_sequence(&path, SeqFormat::Numeric).unwrap(), seq);
    }

    #[test]
    fn numeric_accepts_any_whitespace_and_rejects_garbage() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.txt");
        std::fs::write(&path, "1 2\t3\n4").unwrap();
        assert_eq!(
            load_sequence(&path, SeqFormat::Numeric).unwrap(),
            vec![1, 2, 3, 4]
        );
        std::fs::write(&path, "1 two 3").unwrap();
        assert!(load_sequence(&path, SeqFormat::Numeric).is_err());
    }

    #[test]
    fn text_mode_maps_bytes_to_codes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("seq.txt");
        std::fs::write(&path, b"aba").unwrap();
        assert_eq!(
            load_sequence(&path, SeqFormat::Text).unwrap(),
            vec![97, 98, 97]
        );
    }
}
