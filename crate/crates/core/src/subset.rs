//! Subsets of the alphabet `{1..d}` packed into a machine word.
//!
//! Symbols are stored 0-based; everything rendered for humans is 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest alphabet a [`SymbolSubset`] can hold.
pub const MAX_ALPHABET: usize = 64;

/// A set of symbols, bit `s` set when 0-based symbol `s` is a member.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolSubset(u64);

impl SymbolSubset {
    pub const EMPTY: SymbolSubset = SymbolSubset(0);

    #[inline]
    pub const fn from_bits(bits: u64) -> Self {
        SymbolSubset(bits)
    }

    #[inline]
    pub const fn bits(self) -> u64 {
        self.0
    }

    /// `{0, .., d-1}`.
    #[inline]
    pub fn full(d: usize) -> Self {
        debug_assert!(d <= MAX_ALPHABET);
        if d == MAX_ALPHABET {
            SymbolSubset(u64::MAX)
        } else {
            SymbolSubset((1u64 << d) - 1)
        }
    }

    #[inline]
    pub fn singleton(symbol: usize) -> Self {
        debug_assert!(symbol < MAX_ALPHABET);
        SymbolSubset(1u64 << symbol)
    }

    #[inline]
    pub fn contains(self, symbol: usize) -> bool {
        symbol < MAX_ALPHABET && self.0 >> symbol & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, symbol: usize) {
        self.0 |= 1u64 << symbol;
    }

    #[inline]
    pub fn remove(&mut self, symbol: usize) {
        self.0 &= !(1u64 << symbol);
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn union(self, other: Self) -> Self {
        SymbolSubset(self.0 | other.0)
    }

    #[inline]
    pub fn intersection(self, other: Self) -> Self {
        SymbolSubset(self.0 & other.0)
    }

    #[inline]
    pub fn difference(self, other: Self) -> Self {
        SymbolSubset(self.0 & !other.0)
    }

    #[inline]
    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    #[inline]
    pub fn intersects(self, other: Self) -> bool {
        self.0 & other.0 != 0
    }

    /// Members in increasing order (0-based).
    pub fn iter(self) -> Members {
        Members(self.0)
    }

    /// 0/1 row of length `d`, e.g. `110`.
    pub fn to_row_string(self, d: usize) -> String {
        (0..d)
            .map(|s| if self.contains(s) { '1' } else { '0' })
            .collect()
    }

    /// Brace notation with 1-based members, e.g. `{1,3}`.
    pub fn to_set_string(self) -> String {
        let inner: Vec<String> = self.iter().map(|s| (s + 1).to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }
}

impl FromIterator<usize> for SymbolSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = SymbolSubset::EMPTY;
        for s in iter {
            set.insert(s);
        }
        set
    }
}

impl fmt::Debug for SymbolSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_set_string())
    }
}

/// Iterator over the members of a [`SymbolSubset`].
#[derive(Clone)]
pub struct Members(u64);

impl Iterator for Members {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let s = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(s)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Members {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_set_algebra() {
        let a: SymbolSubset = [0, 1].into_iter().collect();
        let b: SymbolSubset = [1, 2].into_iter().collect();
        assert_eq!(a.intersection(b), SymbolSubset::singleton(1));
        assert_eq!(a.union(b), SymbolSubset::full(3));
        assert_eq!(a.difference(b), SymbolSubset::singleton(0));
        assert!(SymbolSubset::singleton(1).is_subset(a));
        assert!(!b.is_subset(a));
        assert_eq!(a.to_row_string(3), "110");
        assert_eq!(b.to_set_string(), "{2,3}");
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn full_alphabet_edges() {
        assert_eq!(SymbolSubset::full(0), SymbolSubset::EMPTY);
        assert_eq!(SymbolSubset::full(64).len(), 64);
        assert!(!SymbolSubset::full(3).contains(3));
        assert!(!SymbolSubset::full(64).contains(64));
    }
}
