use std::cmp::Ordering;
use std::fmt;

use super::coeff::Q;

/// Largest jet order representable in a [`MultiIndex`].
pub const MAX_JET_ORDER: usize = 12;
/// Largest base dimension representable in a [`MultiIndex`].
pub const MAX_BASE_DIM: usize = 16;

/// Symmetric derivative index `J = (j1 <= j2 <= ... <= jk)`.
///
/// Entries are always kept sorted, so `y_{ij}` and `y_{ji}` are the same
/// coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    len: u8,
    entries: [u8; MAX_JET_ORDER],
}

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex {
        len: 0,
        entries: [0; MAX_JET_ORDER],
    };

    /// Builds a multi-index from arbitrary (unsorted) base indices.
    ///
    /// Panics if more than [`MAX_JET_ORDER`] entries are given or an entry is
    /// not below [`MAX_BASE_DIM`]; callers validate against the chart first.
    pub fn new(indices: &[usize]) -> Self {
        assert!(indices.len() <= MAX_JET_ORDER, "multi-index too long");
        let mut m = Self::EMPTY;
        for (slot, &i) in m.entries.iter_mut().zip(indices) {
            assert!(i < MAX_BASE_DIM, "base index out of range");
            *slot = i as u8;
        }
        m.len = indices.len() as u8;
        m.entries[..indices.len()].sort_unstable();
        m
    }

    pub fn single(i: usize) -> Self {
        Self::new(&[i])
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn entries(&self) -> &[u8] {
        &self.entries[..self.len as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries().iter().map(|&e| e as usize)
    }

    /// `J ∪ {i}`, or `None` when the result would exceed [`MAX_JET_ORDER`].
    pub fn with(&self, i: usize) -> Option<Self> {
        if self.len() >= MAX_JET_ORDER || i >= MAX_BASE_DIM {
            return None;
        }
        let mut m = *self;
        let mut pos = self.len();
        while pos > 0 && m.entries[pos - 1] as usize > i {
            m.entries[pos] = m.entries[pos - 1];
            pos -= 1;
        }
        m.entries[pos] = i as u8;
        m.len += 1;
        Some(m)
    }

    /// `J ∪ K`.
    pub fn union(&self, other: &MultiIndex) -> Option<Self> {
        let mut m = *self;
        for i in other.iter() {
            m = m.with(i)?;
        }
        Some(m)
    }

    /// Removes one occurrence of `i`.
    pub fn without(&self, i: usize) -> Option<Self> {
        let pos = self.entries().iter().position(|&e| e as usize == i)?;
        let mut v: Vec<usize> = self.iter().collect();
        v.remove(pos);
        Some(Self::new(&v))
    }

    /// Multiset difference `self \ other`, if `other` is a sub-multiset.
    pub fn difference(&self, other: &MultiIndex) -> Option<Self> {
        let mut m = *self;
        for i in other.iter() {
            m = m.without(i)?;
        }
        Some(m)
    }

    /// Count of each base index, length `n`.
    pub fn multiplicities(&self, n: usize) -> Vec<u32> {
        let mut counts = vec![0u32; n.max(self.iter().max().map_or(0, |m| m + 1))];
        for i in self.iter() {
            counts[i] += 1;
        }
        counts
    }

    /// Number of distinct index tuples that sort to this multi-index.
    pub fn permutation_count(&self) -> Q {
        let mut acc = Q::factorial(self.len() as u32);
        let mut run = 0u32;
        let mut prev: Option<u8> = None;
        for &e in self.entries() {
            if Some(e) == prev {
                run += 1;
            } else {
                acc = &acc / &Q::factorial(run);
                run = 1;
                prev = Some(e);
            }
        }
        &acc / &Q::factorial(run)
    }

    /// All sorted multi-indices of length `k` over `0..n`.
    pub fn all_of_length(n: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        fn rec(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex::new(cur));
                return;
            }
            for i in start..n {
                cur.push(i);
                rec(n, k, i, cur, out);
                cur.pop();
            }
        }
        rec(n, k, 0, &mut cur, &mut out);
        out
    }

    /// All sorted multi-indices of length at most `k` over `0..n`.
    pub fn all_up_to(n: usize, k: usize) -> Vec<MultiIndex> {
        (0..=k).flat_map(|l| Self::all_of_length(n, l)).collect()
    }

    /// Distinct sub-multisets of this multi-index (including empty and self).
    pub fn sub_multisets(&self) -> Vec<MultiIndex> {
        let mut groups: Vec<(usize, usize)> = Vec::new();
        for i in self.iter() {
            match groups.last_mut() {
                Some((v, c)) if *v == i => *c += 1,
                _ => groups.push((i, 1)),
            }
        }
        let mut out = vec![Vec::new()];
        for (v, c) in groups {
            let mut next = Vec::new();
            for base in &out {
                for take in 0..=c {
                    let mut b: Vec<usize> = base.clone();
                    b.extend(std::iter::repeat(v).take(take));
                    next.push(b);
                }
            }
            out = next;
        }
        out.into_iter().map(|v| MultiIndex::new(&v)).collect()
    }

    /// Distinct values appearing in the multi-index.
    pub fn distinct(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.iter().collect();
        v.dedup();
        v
    }

    pub(crate) fn raw_entries(&self) -> &[u8; MAX_JET_ORDER] {
        &self.entries
    }
}

impl Default for MultiIndex {
    fn default() -> Self {
        Self::EMPTY
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.entries().cmp(other.entries()))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiIndex {
    /// Comma-joined sorted entries, e.g. `0,1,1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}
