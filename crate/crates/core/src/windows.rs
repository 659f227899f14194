//! Layered window families over the two input strings.
//!
//! The window pipeline never compares full strings: it compares windows. One
//! side (`A`) is cut into a plain partition of stride-`d` windows; the other
//! side (`B`) gets a redundant, layered family rich enough that any
//! well-aligned segment of an optimal matching is approximated by some
//! window at small relative loss.
//!
//! Two families are provided:
//!
//! * [`build_windows_quadratic`] — geometric length ladder `d·(1+ε₀)^i`
//!   with sub-window shifts of granularity `ε₀·dᵢ`; dense, used when the
//!   target similarity is a constant.
//! * [`build_windows_cubic`] — doubling ladder `d·2^i` with length steps of
//!   `d`; sparser (size `O((n/d)·log(1/ε₀))`), used in the general regime.
//!
//! Windows are descriptors (`left`, `len`, `layer`) into an unmodified
//! string; a [`WindowUniverse`] indexes the `A`-side and `B`-side families
//! in one id space so estimate tables and sparsifiers can address both.
//!
//! [`mapping_trials`] enumerates the four orientations (as-is, swapped,
//! both reversed, swapped and reversed) under which the window pipeline is
//! run; certificates are mapped back with [`unmap_trial_matching`].

use crate::strings::{Matching, Symbol};
use crate::{Error, Result};

/// Layer tag for the ragged tail window of a partition.
pub const TAIL_LAYER: i32 = i32::MAX;

/// A window descriptor: `len` symbols starting at `left`, tagged with the
/// layer that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Window {
    pub left: usize,
    pub len: usize,
    pub layer: i32,
}

impl Window {
    /// One-past-the-end position.
    pub fn right(&self) -> usize {
        self.left + self.len
    }

    /// Content slice of this window within its sequence.
    pub fn content<'s>(&self, seq: &'s [Symbol]) -> &'s [Symbol] {
        &seq[self.left..self.right()]
    }
}

/// A family of windows over one sequence of length `seq_len`.
#[derive(Debug, Clone)]
pub struct WindowSet {
    pub windows: Vec<Window>,
    pub seq_len: usize,
}

impl WindowSet {
    /// Largest window length in the family (0 when empty).
    pub fn max_len(&self) -> usize {
        self.windows.iter().map(|w| w.len).max().unwrap_or(0)
    }

    /// Number of distinct layers present.
    pub fn layer_count(&self) -> usize {
        let mut layers: Vec<i32> = self.windows.iter().map(|w| w.layer).collect();
        layers.sort_unstable();
        layers.dedup();
        layers.len()
    }
}

/// Plain partition of `[0, n)` into stride-`d` windows; a ragged tail (when
/// `d` does not divide `n`) becomes its own window tagged [`TAIL_LAYER`].
pub fn partition_windows(n: usize, d: usize) -> Vec<Window> {
    let mut windows = Vec::with_capacity(n / d + 1);
    let mut left = 0;
    while left + d <= n {
        windows.push(Window {
            left,
            len: d,
            layer: 0,
        });
        left += d;
    }
    if left < n {
        windows.push(Window {
            left,
            len: n - left,
            layer: TAIL_LAYER,
        });
    }
    windows
}

fn validate_window_params(n: usize, d: usize, eps0: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyInput("window construction"));
    }
    if d == 0 || d > n {
        return Err(Error::InvalidParameter {
            name: "d",
            reason: format!("stride {} outside [1, {}]", d, n),
        });
    }
    if !(eps0 > 0.0 && eps0 < 1.0) {
        return Err(Error::InvalidParameter {
            name: "eps0",
            reason: format!("granularity {} outside (0, 1)", eps0),
        });
    }
    Ok(())
}

/// Hard cap on one family's size.
///
/// The literal construction granularity (`ε₀` of order `ε/200`) is an
/// analysis device: taken at face value it emits `Θ(n)` windows per layer
/// across thousands of layers, which no desk-scale machine can hold, let
/// alone compare pairwise. Builders reject such requests early with an
/// actionable error instead of exhausting memory.
pub const MAX_FAMILY_WINDOWS: usize = 200_000;

fn check_family_budget(count: usize) -> Result<()> {
    if count > MAX_FAMILY_WINDOWS {
        return Err(Error::InvalidParameter {
            name: "windows",
            reason: format!(
                "window family exceeds {MAX_FAMILY_WINDOWS} entries; truncate the ladder \
                 (layer_cap) or coarsen the granularity (eps_window_override)"
            ),
        });
    }
    Ok(())
}

/// Dense geometric window family.
///
/// The `A` side is the stride-`d` partition. The `B` side spans layers
/// `i ∈ {-f, …, f}` with `f = ⌈log_{1+ε₀}(1/ε₀)⌉ + 1`; layer `i` uses
/// window length `dᵢ = ⌊d·(1+ε₀)^i⌋` and start granularity
/// `gᵢ = max(1, ⌊ε₀·dᵢ⌋)`, placing windows at `left = x·gᵢ + y·dᵢ` for
/// `x ∈ {0, …, ⌊dᵢ/gᵢ⌋-1}`, `y ∈ {0, 1, …}`. Layers whose length leaves
/// `[1, n]` are skipped, as are windows crossing the right boundary.
///
/// `layer_cap` truncates the ladder to `|i| ≤ cap`; the full ladder has
/// `Θ((1/ε₀)·log(1/ε₀))` layers, which is the intended asymptotic shape but
/// far past what small experiments need.
pub fn build_windows_quadratic(
    n: usize,
    d: usize,
    eps0: f64,
    layer_cap: Option<u32>,
) -> Result<(WindowSet, WindowSet)> {
    validate_window_params(n, d, eps0)?;
    let f = (1.0 / eps0).ln() / (1.0 + eps0).ln();
    let f = f.ceil() as i64 + 1;
    let cap = layer_cap.map_or(f, |c| f.min(c as i64));

    let mut b_windows = Vec::new();
    for layer in -cap..=cap {
        let d_i = (d as f64 * (1.0 + eps0).powi(layer as i32)).floor() as usize;
        if d_i < 1 || d_i > n {
            continue;
        }
        let g_i = ((eps0 * d_i as f64).floor() as usize).max(1);
        let shifts = (d_i / g_i).max(1);
        for y in 0..=(n / d_i) {
            for x in 0..shifts {
                let left = x * g_i + y * d_i;
                if left + d_i > n {
                    break;
                }
                b_windows.push(Window {
                    left,
                    len: d_i,
                    layer: layer as i32,
                });
            }
            check_family_budget(b_windows.len())?;
        }
    }
    b_windows.sort_by_key(|w| (w.layer, w.left, w.len));
    b_windows.dedup();

    Ok((
        WindowSet {
            windows: partition_windows(n, d),
            seq_len: n,
        },
        WindowSet {
            windows: b_windows,
            seq_len: n,
        },
    ))
}

/// Sparse doubling window family.
///
/// The `A` side is the stride-`d` partition. The `B` side is the stride-`d`
/// partition (layer 0) plus layers `i ∈ {1, …, f}` with
/// `f = ⌈log₂(1/ε₀)⌉`: layer `i` uses block length `dᵢ = d·2^i`, starts
/// `y·dᵢ`, and window lengths `dᵢ/2 + x·d` for `x ∈ {1, …, dᵢ/(2d)}`.
/// The family size is `O((n/d)·log(1/ε₀))`.
pub fn build_windows_cubic(
    n: usize,
    d: usize,
    eps0: f64,
    layer_cap: Option<u32>,
) -> Result<(WindowSet, WindowSet)> {
    validate_window_params(n, d, eps0)?;
    let f = (1.0 / eps0).log2().ceil() as i64;
    let cap = layer_cap.map_or(f, |c| f.min(c as i64));

    let mut b_windows = partition_windows(n, d);
    for layer in 1..=cap {
        let d_i = d << layer;
        if d_i > n {
            break;
        }
        let steps = d_i / (2 * d);
        for y in 0..(n / d_i) {
            let start = y * d_i;
            for x in 1..=steps {
                let len = d_i / 2 + x * d;
                if start + len > n {
                    break;
                }
                b_windows.push(Window {
                    left: start,
                    len,
                    layer: layer as i32,
                });
            }
            check_family_budget(b_windows.len())?;
        }
    }
    b_windows.sort_by_key(|w| (w.layer, w.left, w.len));
    b_windows.dedup();

    Ok((
        WindowSet {
            windows: partition_windows(n, d),
            seq_len: n,
        },
        WindowSet {
            windows: b_windows,
            seq_len: n,
        },
    ))
}

/// Both window families over their two sequences, addressed by one id space:
/// ids `0..ka` are `A`-side windows, ids `ka..ka+kb` are `B`-side windows.
#[derive(Debug)]
pub struct WindowUniverse<'s> {
    pub seq_a: &'s [Symbol],
    pub seq_b: &'s [Symbol],
    pub a: WindowSet,
    pub b: WindowSet,
}

impl<'s> WindowUniverse<'s> {
    /// Assembles a universe, validating that the window sets fit their
    /// sequences.
    pub fn new(seq_a: &'s [Symbol], seq_b: &'s [Symbol], a: WindowSet, b: WindowSet) -> Result<Self> {
        for (seq, set, name) in [(seq_a, &a, "a"), (seq_b, &b, "b")] {
            if set.seq_len != seq.len() || set.windows.iter().any(|w| w.right() > seq.len()) {
                return Err(Error::InvalidParameter {
                    name: "windows",
                    reason: format!("window set `{}` does not fit its sequence", name),
                });
            }
        }
        Ok(WindowUniverse { seq_a, seq_b, a, b })
    }

    /// Total number of windows across both sides.
    pub fn k(&self) -> usize {
        self.a.windows.len() + self.b.windows.len()
    }

    /// Number of `A`-side windows (`B`-side ids start here).
    pub fn split(&self) -> usize {
        self.a.windows.len()
    }

    /// True when the id addresses an `A`-side window.
    pub fn is_a_side(&self, idx: usize) -> bool {
        idx < self.a.windows.len()
    }

    /// Window descriptor by universe id.
    pub fn window(&self, idx: usize) -> Window {
        if self.is_a_side(idx) {
            self.a.windows[idx]
        } else {
            self.b.windows[idx - self.a.windows.len()]
        }
    }

    /// Content slice by universe id.
    pub fn content(&self, idx: usize) -> &'s [Symbol] {
        if self.is_a_side(idx) {
            self.a.windows[idx].content(self.seq_a)
        } else {
            self.b.windows[idx - self.a.windows.len()].content(self.seq_b)
        }
    }

    /// Window length by universe id.
    pub fn len(&self, idx: usize) -> usize {
        self.window(idx).len
    }

    /// Smallest symbol strictly above all content on both sides.
    pub fn fresh_symbol(&self) -> Symbol {
        let max_a = self.seq_a.iter().copied().max().unwrap_or(0);
        let max_b = self.seq_b.iter().copied().max().unwrap_or(0);
        max_a.max(max_b) + 1
    }
}

/// Orientation of one pipeline trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TrialKind {
    /// `(x, y) = (a, b)`.
    Forward,
    /// `(x, y) = (b, a)`.
    Swapped,
    /// `(x, y) = (reverse a, reverse b)`.
    Reversed,
    /// `(x, y) = (reverse b, reverse a)`.
    SwappedReversed,
}

/// The four orientation trials of the window pipeline.
///
/// A common subsequence is preserved under simultaneously reversing both
/// strings and under swapping them, so the pipeline may run whichever
/// orientation aligns best with its fixed `A`-partition / `B`-layered roles
/// and keep the best certified outcome.
pub fn mapping_trials(a: &[Symbol], b: &[Symbol]) -> Vec<(TrialKind, Vec<Symbol>, Vec<Symbol>)> {
    let rev = |s: &[Symbol]| s.iter().rev().copied().collect::<Vec<_>>();
    vec![
        (TrialKind::Forward, a.to_vec(), b.to_vec()),
        (TrialKind::Swapped, b.to_vec(), a.to_vec()),
        (TrialKind::Reversed, rev(a), rev(b)),
        (TrialKind::SwappedReversed, rev(b), rev(a)),
    ]
}

/// Maps a matching produced under a trial orientation back to coordinates
/// of the original `(a, b)` pair.
pub fn unmap_trial_matching(
    kind: TrialKind,
    m: &Matching,
    len_a: usize,
    len_b: usize,
) -> Matching {
    match kind {
        TrialKind::Forward => m.clone(),
        TrialKind::Swapped => m.flipped(),
        TrialKind::Reversed => m.unreverse(len_a, len_b),
        TrialKind::SwappedReversed => m.unreverse(len_b, len_a).flipped(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_keeps_ragged_tail() {
        let w = partition_windows(13, 4);
        assert_eq!(w.len(), 4);
        assert_eq!((w[3].left, w[3].len, w[3].layer), (12, 1, TAIL_LAYER));
        assert!(w[..3].iter().all(|w| w.len == 4 && w.layer == 0));
    }

    #[test]
    fn quadratic_worked_example() {
        // n = 64, d = 8, eps0 = 0.5: f = ceil(log_1.5 2) + 1 = 3.
        let (a, b) = build_windows_quadratic(64, 8, 0.5, None).unwrap();
        assert_eq!(a.windows.len(), 8);
        let layer0: Vec<usize> = b
            .windows
            .iter()
            .filter(|w| w.layer == 0)
            .map(|w| w.left)
            .collect();
        // Layer 0: length 8, granularity 4: starts 0, 4, …, 56.
        assert_eq!(layer0, (0..=56).step_by(4).collect::<Vec<_>>());
        let layers: Vec<i32> = {
            let mut l: Vec<i32> = b.windows.iter().map(|w| w.layer).collect();
            l.sort_unstable();
            l.dedup();
            l
        };
        assert_eq!(layers, vec![-3, -2, -1, 0, 1, 2, 3]);
    }

    #[test]
    fn quadratic_windows_stay_in_bounds() {
        for (n, d, eps0) in [(64, 8, 0.5), (100, 10, 0.3), (37, 5, 0.25)] {
            let (a, b) = build_windows_quadratic(n, d, eps0, None).unwrap();
            assert!(a.windows.iter().all(|w| w.right() <= n && w.len >= 1));
            assert!(b.windows.iter().all(|w| w.right() <= n && w.len >= 1));
        }
    }

    #[test]
    fn quadratic_layer_cap_truncates() {
        let (_, b_full) = build_windows_quadratic(64, 8, 0.5, None).unwrap();
        let (_, b_capped) = build_windows_quadratic(64, 8, 0.5, Some(1)).unwrap();
        assert!(b_capped.windows.len() < b_full.windows.len());
        assert!(b_capped.windows.iter().all(|w| w.layer.abs() <= 1));
    }

    #[test]
    fn cubic_worked_example() {
        // n = 64, d = 8, eps0 = 0.25: f = 2.
        let (a, b) = build_windows_cubic(64, 8, 0.25, None).unwrap();
        assert_eq!(a.windows.len(), 8);

        let layer1: Vec<(usize, usize)> = b
            .windows
            .iter()
            .filter(|w| w.layer == 1)
            .map(|w| (w.left, w.len))
            .collect();
        assert_eq!(layer1, vec![(0, 16), (16, 16), (32, 16), (48, 16)]);

        let layer2: Vec<(usize, usize)> = b
            .windows
            .iter()
            .filter(|w| w.layer == 2)
            .map(|w| (w.left, w.len))
            .collect();
        assert_eq!(layer2, vec![(0, 24), (0, 32), (32, 24), (32, 32)]);

        // Family size bound for these parameters: (n/d)·(1 + log2(1/eps0)).
        assert_eq!(b.windows.len(), 16);
        assert!(b.windows.len() <= 24);
    }

    #[test]
    fn cubic_windows_stay_in_bounds() {
        for (n, d, eps0) in [(64, 8, 0.25), (100, 10, 0.2), (50, 7, 0.1)] {
            let (a, b) = build_windows_cubic(n, d, eps0, None).unwrap();
            assert!(a.windows.iter().all(|w| w.right() <= n));
            assert!(b.windows.iter().all(|w| w.right() <= n && w.len >= 1));
        }
    }

    #[test]
    fn parameter_validation() {
        assert!(build_windows_quadratic(0, 4, 0.5, None).is_err());
        assert!(build_windows_quadratic(8, 0, 0.5, None).is_err());
        assert!(build_windows_quadratic(8, 9, 0.5, None).is_err());
        assert!(build_windows_cubic(8, 4, 0.0, None).is_err());
        assert!(build_windows_cubic(8, 4, 1.0, None).is_err());
    }

    #[test]
    fn universe_indexing_round_trips() {
        let seq_a: Vec<u32> = (0..64).collect();
        let seq_b: Vec<u32> = (100..164).collect();
        let (a, b) = build_windows_cubic(64, 8, 0.25, None).unwrap();
        let ka = a.windows.len();
        let u = WindowUniverse::new(&seq_a, &seq_b, a, b).unwrap();
        assert_eq!(u.k(), ka + 16);
        assert!(u.is_a_side(ka - 1) && !u.is_a_side(ka));
        assert_eq!(u.content(0), &seq_a[0..8]);
        assert_eq!(u.content(ka), &seq_b[0..8]);
        assert_eq!(u.fresh_symbol(), 164);
    }

    #[test]
    fn mapping_trials_enumerates_four_orientations() {
        let a = vec![1, 2];
        let b = vec![3, 4];
        let trials = mapping_trials(&a, &b);
        let shapes: Vec<(TrialKind, Vec<u32>, Vec<u32>)> = trials;
        assert_eq!(
            shapes,
            vec![
                (TrialKind::Forward, vec![1, 2], vec![3, 4]),
                (TrialKind::Swapped, vec![3, 4], vec![1, 2]),
                (TrialKind::Reversed, vec![2, 1], vec![4, 3]),
                (TrialKind::SwappedReversed, vec![4, 3], vec![2, 1]),
            ]
        );
    }

    #[test]
    fn unmap_restores_original_coordinates() {
        use crate::strings::verify_common_subsequence;
        let a: Vec<u32> = vec![5, 1, 2, 9];
        let b: Vec<u32> = vec![1, 2, 7];
        for (kind, x, y) in mapping_trials(&a, &b) {
            let (_, m) = crate::oracles::lcs_exact(&x, &y);
            let back = unmap_trial_matching(kind, &m, a.len(), b.len());
            assert!(
                verify_common_subsequence(&back, &a, &b),
                "trial {:?} failed to unmap",
                kind
            );
            assert_eq!(back.len(), m.len());
        }
    }
}
