//! Exact baselines: full LCS, bounded-size LCS, LIS, and range-restricted
//! LIS, plus the witness-projection score used by comparison structures.
//!
//! Everything downstream is validated against these oracles, so they are
//! deliberately simple: classic quadratic DP for LCS with a canonical
//! backtrack, the minimum-end-position table for bounded LCS, and patience
//! sorting for LIS. The canonical backtrack rule (take a symbol match when
//! available, otherwise prefer moving up, then left) makes every witness
//! deterministic, which keeps caches and frozen test values stable.

use crate::counters::Counters;
use crate::strings::{Matching, Symbol};
use std::collections::HashMap;

/// Exact LCS size and a canonical witness matching.
///
/// Runs the full `(|x|+1)×(|y|+1)` dynamic program and backtracks with the
/// canonical rule: when `x[i] == y[j]` the match edge is always taken
/// (it is always optimal), otherwise ties between skipping a symbol of `x`
/// ("up") and a symbol of `y` ("left") resolve toward "up". Two calls with
/// equal inputs return identical matchings.
///
/// # Examples
///
/// ```
/// use subseq_core::oracles::lcs_exact;
/// use subseq_core::strings::Sequence;
///
/// let x = Sequence::from_bytes(b"abcbdab");
/// let y = Sequence::from_bytes(b"bdcaba");
/// let (len, witness) = lcs_exact(&x, &y);
/// assert_eq!(len, 4);
/// assert_eq!(witness.len(), 4);
/// ```
pub fn lcs_exact(x: &[Symbol], y: &[Symbol]) -> (usize, Matching) {
    let (n, m) = (x.len(), y.len());
    assert!(
        n < u16::MAX as usize && m < u16::MAX as usize,
        "exact LCS table limited to lengths below 65535"
    );
    if n == 0 || m == 0 {
        return (0, Matching::empty());
    }
    let width = m + 1;
    let mut dp = vec![0u16; (n + 1) * width];
    for i in 1..=n {
        let (prev, cur) = dp.split_at_mut(i * width);
        let prev = &prev[(i - 1) * width..];
        let xi = x[i - 1];
        for j in 1..=m {
            cur[j] = if xi == y[j - 1] {
                prev[j - 1] + 1
            } else {
                prev[j].max(cur[j - 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(dp[n * width + m] as usize);
    let (mut i, mut j) = (n, m);
    while i > 0 && j > 0 {
        if x[i - 1] == y[j - 1] {
            pairs.push((i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if dp[(i - 1) * width + j] == dp[i * width + j] {
            i -= 1;
        } else {
            j -= 1;
        }
    }
    pairs.reverse();
    (dp[n * width + m] as usize, Matching::from_monotone(pairs))
}

/// Successor index over one sequence: for each symbol, the sorted list of
/// its positions, answering "first occurrence of `c` at or after `from`"
/// by binary search.
#[derive(Debug, Clone)]
pub struct CharIndex {
    buckets: HashMap<Symbol, Vec<usize>>,
}

impl CharIndex {
    /// Builds the index in one pass over `y`.
    pub fn new(y: &[Symbol]) -> Self {
        let mut buckets: HashMap<Symbol, Vec<usize>> = HashMap::new();
        for (pos, &c) in y.iter().enumerate() {
            buckets.entry(c).or_default().push(pos);
        }
        CharIndex { buckets }
    }

    /// Smallest position `p >= from` with `y[p] == c`, if any.
    pub fn successor(&self, c: Symbol, from: usize) -> Option<usize> {
        let bucket = self.buckets.get(&c)?;
        let k = bucket.partition_point(|&p| p < from);
        bucket.get(k).copied()
    }
}

/// Minimum-end-position table for bounded LCS.
///
/// `min_end(i, j)` is the smallest number of leading symbols of `y` whose
/// LCS with `x[..i]` already reaches size `j` (`|y|+1` encodes "impossible").
/// Building row by row up to a requested bound `q` costs `O(|x|·q·log|y|)`
/// instead of the full quadratic table, which is what makes repeated
/// extraction loops affordable.
#[derive(Debug)]
pub struct BoundedLcsTable {
    n: usize,
    m: usize,
    q: usize,
    /// Row-major `(n+1) × (q+1)`: `t[i*(q+1)+j]` = minimal end position.
    t: Vec<usize>,
}

impl BoundedLcsTable {
    /// Builds the table for matches of size up to `q`.
    pub fn build(x: &[Symbol], y: &[Symbol], q: usize) -> Self {
        let (n, m) = (x.len(), y.len());
        let inf = m + 1;
        let width = q + 1;
        let index = CharIndex::new(y);
        let mut t = vec![inf; (n + 1) * width];
        for i in 0..=n {
            t[i * width] = 0;
        }
        for i in 1..=n {
            let c = x[i - 1];
            for j in 1..=q.min(i) {
                let skip = t[(i - 1) * width + j];
                let extend_from = t[(i - 1) * width + j - 1];
                let extended = if extend_from >= m {
                    inf
                } else {
                    match index.successor(c, extend_from) {
                        Some(p) => p + 1,
                        None => inf,
                    }
                };
                t[i * width + j] = skip.min(extended);
            }
        }
        BoundedLcsTable { n, m, q, t }
    }

    /// Table inspection: minimal end position for `j` matches within
    /// `x[..i]`, where `|y|+1` means unreachable.
    pub fn min_end(&self, i: usize, j: usize) -> usize {
        self.t[i * (self.q + 1) + j]
    }

    /// Largest certified size: `max { j ≤ q : min_end(|x|, j) ≤ |y| }`.
    pub fn value(&self) -> usize {
        (0..=self.q)
            .rev()
            .find(|&j| self.min_end(self.n, j) <= self.m)
            .unwrap_or(0)
    }

    /// Witness of exactly `j` matches, if the table certifies one.
    ///
    /// Ties between skipping and matching resolve toward skipping, so the
    /// witness is deterministic.
    pub fn matching(&self, j: usize) -> Option<Matching> {
        if j > self.q || self.min_end(self.n, j) > self.m {
            return None;
        }
        let width = self.q + 1;
        let mut pairs = Vec::with_capacity(j);
        let (mut i, mut jj) = (self.n, j);
        while jj > 0 {
            debug_assert!(i > 0, "bounded backtrack ran out of rows");
            if self.t[i * width + jj] == self.t[(i - 1) * width + jj] {
                i -= 1;
            } else {
                // Row i matched x[i-1] at y position t[i][jj]-1.
                pairs.push((i - 1, self.t[i * width + jj] - 1));
                jj -= 1;
                i -= 1;
            }
        }
        pairs.reverse();
        Some(Matching::from_monotone(pairs))
    }
}

/// Threshold LCS: a witness of size exactly `q` when `lcs(x, y) >= q`,
/// `None` otherwise. `q = 0` always succeeds with an empty witness.
pub fn lcs_bounded(x: &[Symbol], y: &[Symbol], q: usize) -> Option<Matching> {
    if q == 0 {
        return Some(Matching::empty());
    }
    BoundedLcsTable::build(x, y, q).matching(q)
}

/// Exact strictly-increasing LIS size with a witness index list.
///
/// Patience sorting: `O(n log n)`. The witness holds positions into `a`
/// whose values are strictly increasing.
///
/// # Examples
///
/// ```
/// use subseq_core::oracles::lis_exact;
///
/// let (len, _) = lis_exact(&[4, 3, 2, 1, 8, 7, 6, 5]);
/// assert_eq!(len, 2);
/// ```
pub fn lis_exact(a: &[Symbol]) -> (usize, Vec<usize>) {
    // tails[k] = index of the smallest value that ends an increasing
    // subsequence of length k+1 seen so far.
    let mut tails: Vec<usize> = Vec::new();
    let mut prev: Vec<Option<usize>> = vec![None; a.len()];
    for (i, &v) in a.iter().enumerate() {
        let pos = tails.partition_point(|&t| a[t] < v);
        prev[i] = if pos > 0 { Some(tails[pos - 1]) } else { None };
        if pos == tails.len() {
            tails.push(i);
        } else {
            tails[pos] = i;
        }
    }
    let mut witness = Vec::with_capacity(tails.len());
    let mut cur = tails.last().copied();
    while let Some(i) = cur {
        witness.push(i);
        cur = prev[i];
    }
    witness.reverse();
    (tails.len(), witness)
}

/// LIS restricted to values inside `[lo, hi]` (inclusive on both ends).
///
/// Elements outside the interval are skipped; the subsequence must still be
/// strictly increasing.
///
/// # Examples
///
/// ```
/// use subseq_core::oracles::lis_range;
///
/// assert_eq!(lis_range(&[5, 1, 4, 2, 3], 2, 4), 2); // 2, 3
/// ```
pub fn lis_range(a: &[Symbol], lo: Symbol, hi: Symbol) -> usize {
    let mut tails: Vec<Symbol> = Vec::new();
    for &v in a {
        if v < lo || v > hi {
            continue;
        }
        let pos = tails.partition_point(|&t| t < v);
        if pos == tails.len() {
            tails.push(v);
        } else {
            tails[pos] = v;
        }
    }
    tails.len()
}

/// Witness-projection score: the LCS of (the subsequence of `w_i` matched by
/// `opt_ia`) against `w_j`.
///
/// `opt_ia` must be a matching whose left coordinates address `w_i`. This is
/// the reference value for comparison-structure queries: how much of the
/// anchor-side witness survives into a third window.
pub fn lcs_via_witness(opt_ia: &Matching, w_i: &[Symbol], w_j: &[Symbol]) -> usize {
    let projected: Vec<Symbol> = opt_ia.pairs().iter().map(|&(i, _)| w_i[i]).collect();
    lcs_exact(&projected, w_j).0
}

/// Cache of canonical LCS witnesses between identified windows.
///
/// Keys are unordered window-id pairs; the stored matching is oriented from
/// the smaller id to the larger. Fetching the opposite orientation flips the
/// certificate. Misses run [`lcs_exact`] and bill one oracle call plus the
/// table cells to the supplied [`Counters`]; the diagonal is served as an
/// identity matching without touching the oracle.
#[derive(Debug, Default)]
pub struct OptCache {
    map: HashMap<(usize, usize), Matching>,
}

impl OptCache {
    /// Fresh empty cache.
    pub fn new() -> Self {
        OptCache::default()
    }

    /// Number of distinct pairs computed so far.
    pub fn computed_pairs(&self) -> usize {
        self.map.len()
    }

    /// Canonical witness between windows `i` and `j` with contents
    /// `content_i` / `content_j`, oriented `(i-side, j-side)`.
    pub fn opt(
        &mut self,
        i: usize,
        content_i: &[Symbol],
        j: usize,
        content_j: &[Symbol],
        counters: &Counters,
    ) -> Matching {
        if i == j {
            return Matching::identity(content_i.len());
        }
        let key = (i.min(j), i.max(j));
        let canonical = match self.map.get(&key) {
            Some(m) => m.clone(),
            None => {
                let (lo, hi) = if i < j {
                    (content_i, content_j)
                } else {
                    (content_j, content_i)
                };
                let (_, m) = lcs_exact(lo, hi);
                Counters::add(&counters.lcs_exact_calls, 1);
                Counters::add(&counters.dp_cells, lo.len() as u64 * hi.len() as u64);
                self.map.insert(key, m.clone());
                m
            }
        };
        if i <= j {
            canonical
        } else {
            canonical.flipped()
        }
    }

    /// Length of the canonical witness between `i` and `j`, computing and
    /// caching it on first use.
    ///
    /// Unlike [`OptCache::opt`] this never clones the stored matching, so
    /// it is the right query for threshold prefilters that only need the
    /// witness length.
    pub fn opt_len(
        &mut self,
        i: usize,
        content_i: &[Symbol],
        j: usize,
        content_j: &[Symbol],
        counters: &Counters,
    ) -> usize {
        if i == j {
            return content_i.len();
        }
        let key = (i.min(j), i.max(j));
        if let Some(m) = self.map.get(&key) {
            return m.len();
        }
        let (lo, hi) = if i < j {
            (content_i, content_j)
        } else {
            (content_j, content_i)
        };
        let (_, m) = lcs_exact(lo, hi);
        Counters::add(&counters.lcs_exact_calls, 1);
        Counters::add(&counters.dp_cells, lo.len() as u64 * hi.len() as u64);
        let len = m.len();
        self.map.insert(key, m);
        len
    }
}
