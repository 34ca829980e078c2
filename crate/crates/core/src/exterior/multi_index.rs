//! Strictly increasing multi-indices and their lexicographic enumeration.

use std::fmt;

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A strictly increasing list of coordinate indices, i.e. a basis element
/// `dx^{i_1} ∧ … ∧ dx^{i_k}` of `∧^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// Returns `None` unless `indices` is strictly increasing.
    pub fn new(indices: Vec<usize>) -> Option<Self> {
        if indices.windows(2).all(|w| w[0] < w[1]) {
            Some(Self(indices))
        } else {
            None
        }
    }

    pub fn from_mask(mask: u64) -> Self {
        Self((0..64).filter(|i| mask & (1u64 << i) != 0).collect())
    }

    pub fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| m | (1u64 << i))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// Position of this multi-index in the lexicographic enumeration of all
    /// `k`-subsets of `0..dim`.
    pub fn rank(&self, dim: usize) -> usize {
        lex_rank(self.mask(), dim, self.degree())
    }

    /// All `k`-element multi-indices of `0..dim` in lexicographic order.
    pub fn enumerate(dim: usize, k: usize) -> Vec<MultiIndex> {
        enumerate_masks(dim, k).into_iter().map(MultiIndex::from_mask).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (j, i) in self.0.iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

/// Bitmasks of all `k`-subsets of `0..dim`, lexicographic on the sorted
/// index lists.
pub(crate) fn enumerate_masks(dim: usize, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(binomial(dim, k));
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<u64>) {
        if cur.len() == k {
            out.push(cur.iter().fold(0u64, |m, &i| m | (1u64 << i)));
            return;
        }
        let remaining = k - cur.len();
        for i in start..=(dim - remaining) {
            cur.push(i);
            rec(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    if k <= dim {
        rec(0, dim, k, &mut cur, &mut out);
    }
    out
}

/// Lexicographic rank of a `k`-subset given as a bitmask.
pub(crate) fn lex_rank(mask: u64, dim: usize, k: usize) -> usize {
    let mut rank = 0;
    let mut prev: isize = -1;
    let mut i = 0;
    for idx in 0..dim {
        if mask & (1u64 << idx) == 0 {
            continue;
        }
        for j in (prev + 1) as usize..idx {
            rank += binomial(dim - 1 - j, k - 1 - i);
        }
        prev = idx as isize;
        i += 1;
    }
    rank
}

/// Sign of the permutation sorting the concatenation `a ++ b` of two disjoint
/// sorted index sets.
pub(crate) fn merge_sign(a: u64, b: u64) -> f64 {
    // Count pairs (i in a, j in b) with i > j.
    let mut inversions = 0u32;
    let mut bits = b;
    while bits != 0 {
        let j = bits.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        bits &= bits - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}
