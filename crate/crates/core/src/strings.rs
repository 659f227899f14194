//! Sequences, matchings, and normalized similarity scores.
//!
//! A [`Matching`] is the universal certificate format of this crate: a list
//! of index pairs, strictly increasing in both coordinates, whose left
//! indices address one sequence and right indices another. Every estimator
//! returns its bound together with such a certificate, and
//! [`verify_common_subsequence`] checks a certificate against the inputs in
//! linear time.
//!
//! The module also hosts the small matching algebra the sparsifiers rely on:
//! composing three matchings through shared middle sequences
//! ([`intersect_three`]), re-orienting and offsetting matchings, and the
//! normalized score conventions (geometric-mean normalization for LCS, the
//! exact duality with insertion/deletion edit distance).

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Symbol type shared by the LCS side (`u32` code points / byte values) and
/// the LIS side (`u32` values compared by `<`).
pub type Symbol = u32;

/// Normalized similarity score in `[0, 1]`.
pub type NormalizedScore = f64;

/// An input sequence over `u32` symbols.
///
/// Text inputs are widened bytes; numeric inputs are parsed decimal values.
/// All algorithms operate on `&[Symbol]` slices; `Sequence` owns the storage
/// and records how it was read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sequence {
    symbols: Vec<Symbol>,
}

impl Sequence {
    /// Wraps raw symbol values.
    pub fn from_values(symbols: Vec<Symbol>) -> Self {
        Sequence { symbols }
    }

    /// Widens a byte string into symbols.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        Sequence {
            symbols: bytes.iter().map(|&b| b as Symbol).collect(),
        }
    }

    /// Symbol slice view.
    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Number of symbols.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    /// True when the sequence holds no symbols.
    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Smallest symbol value strictly larger than every symbol present.
    ///
    /// Used to mint dummy padding symbols that can never match real content.
    pub fn fresh_symbol(&self) -> Symbol {
        self.symbols.iter().copied().max().map_or(0, |m| m + 1)
    }
}

impl std::ops::Deref for Sequence {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.symbols
    }
}

/// A common-subsequence certificate: index pairs strictly increasing in both
/// coordinates.
///
/// The pair `(i, j)` asserts `x[i] == y[j]` for the two sequences the
/// matching refers to. Constructors validate monotonicity; symbol equality
/// is checked against concrete sequences by [`verify_common_subsequence`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    /// Empty matching (the certificate of a zero bound).
    pub fn empty() -> Self {
        Matching { pairs: Vec::new() }
    }

    /// Builds a matching after validating strict monotonicity in both
    /// coordinates.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        for w in pairs.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.0 >= b.0 || a.1 >= b.1 {
                return Err(Error::MalformedMatching(format!(
                    "pairs {:?} and {:?} are not strictly increasing",
                    a, b
                )));
            }
        }
        Ok(Matching { pairs })
    }

    /// Builds a matching the caller guarantees to be monotone.
    ///
    /// Checked in debug builds; used on hot paths where monotonicity holds
    /// by construction.
    pub fn from_monotone(pairs: Vec<(usize, usize)>) -> Self {
        debug_assert!(
            pairs
                .windows(2)
                .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1),
            "from_monotone received non-monotone pairs"
        );
        Matching { pairs }
    }

    /// The identity matching `(0,0), (1,1), …, (n-1,n-1)`.
    pub fn identity(n: usize) -> Self {
        Matching {
            pairs: (0..n).map(|i| (i, i)).collect(),
        }
    }

    /// Number of matched pairs (the size of the certified common
    /// subsequence).
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True when no pairs are matched.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pair slice view.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Matching with both coordinates swapped (certificate for the pair in
    /// the opposite orientation). Monotonicity is preserved.
    pub fn flipped(&self) -> Matching {
        Matching {
            pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }

    /// Matching translated by `(dx, dy)`; maps window-local certificates to
    /// global string coordinates.
    pub fn offset(&self, dx: usize, dy: usize) -> Matching {
        Matching {
            pairs: self.pairs.iter().map(|&(i, j)| (i + dx, j + dy)).collect(),
        }
    }

    /// Concatenates matchings of consecutive, non-overlapping regions.
    ///
    /// Fails if the concatenation violates monotonicity at a seam.
    pub fn concat(pieces: &[Matching]) -> Result<Matching> {
        let mut pairs = Vec::with_capacity(pieces.iter().map(Matching::len).sum());
        for piece in pieces {
            pairs.extend_from_slice(&piece.pairs);
        }
        Matching::new(pairs)
    }

    /// Remaps a matching produced on reversed inputs back to original
    /// coordinates: pair `(i, j)` on `(rev x, rev y)` becomes
    /// `(len_x-1-i, len_y-1-j)` and the pair order is reversed.
    pub fn unreverse(&self, len_x: usize, len_y: usize) -> Matching {
        let mut pairs: Vec<(usize, usize)> = self
            .pairs
            .iter()
            .rev()
            .map(|&(i, j)| (len_x - 1 - i, len_y - 1 - j))
            .collect();
        // Reversing a strictly decreasing list yields a strictly increasing
        // one; keep the debug check for safety.
        debug_assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        pairs.shrink_to_fit();
        Matching { pairs }
    }
}

/// Checks a matching against concrete sequences: strict monotonicity in both
/// coordinates, index bounds, and symbol equality at every pair.
pub fn verify_common_subsequence(m: &Matching, x: &[Symbol], y: &[Symbol]) -> bool {
    let mut last: Option<(usize, usize)> = None;
    for &(i, j) in m.pairs() {
        if i >= x.len() || j >= y.len() || x[i] != y[j] {
            return false;
        }
        if let Some((pi, pj)) = last {
            if i <= pi || j <= pj {
                return false;
            }
        }
        last = Some((i, j));
    }
    true
}

/// Composes three matchings through their shared middle sequences.
///
/// `m_ia` matches sequence *i* against *a*, `m_ab` matches *a* against *b*,
/// and `m_bj` matches *b* against *j*. A pair `(p, q)` survives when some
/// position of *i* is matched to a position of *a* that `m_ab` carries to a
/// position of *b* that `m_bj` matches into *j*. The result is a valid
/// matching between *i* and *j* whose size is the three-way intersection of
/// the chained certificates.
///
/// # Examples
///
/// ```
/// use subseq_core::strings::{intersect_three, Matching};
///
/// let m_ia = Matching::new(vec![(0, 1), (1, 3)]).unwrap();
/// let m_ab = Matching::new(vec![(1, 0), (3, 2)]).unwrap();
/// let m_bj = Matching::new(vec![(0, 4), (2, 5)]).unwrap();
/// let chained = intersect_three(&m_ia, &m_ab, &m_bj).unwrap();
/// assert_eq!(chained.pairs(), &[(0, 4), (1, 5)]);
/// ```
pub fn intersect_three(m_ia: &Matching, m_ab: &Matching, m_bj: &Matching) -> Result<Matching> {
    // Walk the two outer matchings against the middle one with two-pointer
    // merges; all lists are strictly increasing in the shared coordinate.
    let mut pairs = Vec::new();
    let ab = m_ab.pairs();
    let bj = m_bj.pairs();
    let mut ab_pos = 0usize;
    for &(i, a) in m_ia.pairs() {
        while ab_pos < ab.len() && ab[ab_pos].0 < a {
            ab_pos += 1;
        }
        if ab_pos == ab.len() {
            break;
        }
        if ab[ab_pos].0 != a {
            continue;
        }
        let b = ab[ab_pos].1;
        // Binary search is unnecessary: b values arrive in increasing order,
        // but a fresh search keeps this obviously correct for sparse lists.
        if let Ok(k) = bj.binary_search_by_key(&b, |&(bb, _)| bb) {
            pairs.push((i, bj[k].1));
        }
    }
    Matching::new(pairs).map_err(|_| {
        Error::MalformedMatching("chained matchings are not mutually compatible".into())
    })
}

/// Normalizes an LCS size by the geometric mean of the two lengths:
/// `len / sqrt(len_x * len_y)`.
///
/// For equal lengths this is the plain ratio `len / n`. Zero-length inputs
/// are rejected.
///
/// # Examples
///
/// ```
/// let s = subseq_core::strings::normalize_lcs(4, 8, 16).unwrap();
/// assert!((s - 4.0 / (128.0f64).sqrt()).abs() < 1e-12);
/// ```
pub fn normalize_lcs(len: usize, len_x: usize, len_y: usize) -> Result<NormalizedScore> {
    if len_x == 0 || len_y == 0 {
        return Err(Error::InvalidParameter {
            name: "len_x/len_y",
            reason: "normalization requires non-empty sequences".into(),
        });
    }
    Ok(len as f64 / ((len_x as f64) * (len_y as f64)).sqrt())
}

/// Normalized insertion/deletion edit distance of two length-`n` sequences
/// with LCS size `lcs_len`: `(2n - 2·lcs) / (2n) = 1 - lcs/n`.
///
/// The complementary identity with the normalized LCS score is exact, which
/// the duality tests assert bit-for-bit.
pub fn ed_lcs_duality(n: usize, lcs_len: usize) -> Result<NormalizedScore> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "duality requires non-empty sequences".into(),
        });
    }
    if lcs_len > n {
        return Err(Error::InvalidParameter {
            name: "lcs_len",
            reason: format!("lcs size {} exceeds sequence length {}", lcs_len, n),
        });
    }
    Ok(1.0 - lcs_len as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_rejects_non_monotone_pairs() {
        assert!(Matching::new(vec![(0, 0), (1, 0)]).is_err());
        assert!(Matching::new(vec![(2, 0), (1, 5)]).is_err());
        assert!(Matching::new(vec![(0, 0), (1, 2), (2, 3)]).is_ok());
    }

    #[test]
    fn verify_checks_symbols_and_bounds() {
        let x = Sequence::from_bytes(b"abcab");
        let y = Sequence::from_bytes(b"bca");
        let good = Matching::new(vec![(1, 0), (2, 1), (3, 2)]).unwrap();
        assert!(verify_common_subsequence(&good, &x, &y));

        let wrong_symbol = Matching::new(vec![(0, 0)]).unwrap();
        assert!(!verify_common_subsequence(&wrong_symbol, &x, &y));

        let out_of_bounds = Matching::new(vec![(4, 3)]).unwrap();
        assert!(!verify_common_subsequence(&out_of_bounds, &x, &y));
    }

    #[test]
    fn intersect_three_chases_the_documented_chain() {
        let m_ia = Matching::new(vec![(0, 1), (1, 3)]).unwrap();
        let m_ab = Matching::new(vec![(1, 0), (3, 2)]).unwrap();
        let m_bj = Matching::new(vec![(0, 4), (2, 5)]).unwrap();
        let chained = intersect_three(&m_ia, &m_ab, &m_bj).unwrap();
        assert_eq!(chained.pairs(), &[(0, 4), (1, 5)]);
    }

    #[test]
    fn intersect_three_empty_when_chain_misses() {
        let m_ia = Matching::new(vec![(0, 0)]).unwrap();
        let m_ab = Matching::new(vec![(1, 1)]).unwrap();
        let m_bj = Matching::new(vec![(0, 0)]).unwrap();
        let chained = intersect_three(&m_ia, &m_ab, &m_bj).unwrap();
        assert!(chained.is_empty());
    }

    #[test]
    fn normalize_matches_hand_value() {
        // 4 matched symbols between lengths 8 and 16: 4/sqrt(128).
        let s = normalize_lcs(4, 8, 16).unwrap();
        assert!((s - 0.353_553_390_593_273_8).abs() < 1e-12);
        assert!(normalize_lcs(1, 0, 4).is_err());
    }

    #[test]
    fn duality_is_exact() {
        // Identical strings: distance 0. Disjoint alphabets: distance 1.
        assert_eq!(ed_lcs_duality(8, 8).unwrap(), 0.0);
        assert_eq!(ed_lcs_duality(8, 0).unwrap(), 1.0);
        assert_eq!(ed_lcs_duality(8, 4).unwrap(), 0.5);
        assert!(ed_lcs_duality(4, 5).is_err());
    }

    #[test]
    fn unreverse_round_trips() {
        let m = Matching::new(vec![(0, 1), (2, 4)]).unwrap();
        let rev = m.unreverse(5, 6);
        assert_eq!(rev.pairs(), &[(2, 1), (4, 4)]);
        assert_eq!(rev.unreverse(5, 6).pairs(), m.pairs());
    }

    #[test]
    fn offset_and_concat_build_global_certificates() {
        let left = Matching::identity(2);
        let right = Matching::identity(2).offset(4, 7);
        let global = Matching::concat(&[left, right]).unwrap();
        assert_eq!(global.pairs(), &[(0, 0), (1, 1), (4, 7), (5, 8)]);

        let overlapping = Matching::identity(2);
        assert!(Matching::concat(&[overlapping.clone(), overlapping]).is_err());
    }

    #[test]
    fn fresh_symbol_exceeds_content() {
        let s = Sequence::from_values(vec![3, 9, 1]);
        assert_eq!(s.fresh_symbol(), 10);
        assert_eq!(Sequence::from_values(vec![]).fresh_symbol(), 0);
    }
}
