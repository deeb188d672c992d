//! 0/1 transition matrices and their elementary boolean analysis.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::subset::{SymbolSubset, MAX_ALPHABET};

/// A `d × d` 0/1 matrix stored as the successor set of each symbol.
///
/// `rows[i]` is `S(i)`, the symbols allowed to follow `i` (both 0-based).
/// Zero rows are accepted here; analysis entry points reject them through
/// [`TransitionMatrix::ensure_nonempty_rows`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TransitionMatrix {
    d: usize,
    rows: Vec<SymbolSubset>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<SymbolSubset>) -> Result<Self> {
        let d = rows.len();
        if d == 0 {
            return Err(Error::Precondition("alphabet must contain at least one symbol".into()));
        }
        if d > MAX_ALPHABET {
            return Err(Error::capacity("d", MAX_ALPHABET as u64, d as u64));
        }
        let full = SymbolSubset::full(d);
        if let Some(i) = rows.iter().position(|r| !r.is_subset(full)) {
            return Err(Error::Precondition(format!(
                "row {} names a symbol outside 1..{d}",
                i + 1
            )));
        }
        Ok(TransitionMatrix { d, rows })
    }

    /// Parses `110|001|100`. Newlines also separate rows, surrounding
    /// brackets and whitespace are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let body = trimmed
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(trimmed);
        let lines: Vec<&str> = body
            .split(['|', '\n'])
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if lines.is_empty() {
            return Err(Error::parse(0, 0, "empty matrix text"));
        }
        let d = lines[0].chars().count();
        if d > MAX_ALPHABET {
            return Err(Error::capacity("d", MAX_ALPHABET as u64, d as u64));
        }
        let mut rows = Vec::with_capacity(lines.len());
        for (r, line) in lines.iter().enumerate() {
            let mut row = SymbolSubset::EMPTY;
            let mut len = 0;
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => {
                        if c < MAX_ALPHABET {
                            row.insert(c)
                        }
                    }
                    other => {
                        return Err(Error::parse(
                            r + 1,
                            c + 1,
                            format!("illegal character {other:?}, expected '0' or '1'"),
                        ))
                    }
                }
                len += 1;
            }
            if len != d {
                return Err(Error::parse(
                    r + 1,
                    len.min(d) + 1,
                    format!("ragged rows: row {} has length {len}, row 1 has length {d}", r + 1),
                ));
            }
            rows.push(row);
        }
        if rows.len() != d {
            return Err(Error::parse(
                rows.len(),
                0,
                format!("matrix is not square: {} rows of length {d}", rows.len()),
            ));
        }
        TransitionMatrix::from_rows(rows)
    }

    /// Builds the matrix whose row-major bit pattern, read most significant
    /// bit first, is `code`.
    pub fn from_code(d: usize, code: u64) -> Result<Self> {
        if d == 0 || d * d > 64 {
            return Err(Error::capacity("d", 8, d as u64));
        }
        let rows = (0..d)
            .map(|i| {
                (0..d)
                    .filter(|&j| code >> (d * d - 1 - (i * d + j)) & 1 == 1)
                    .collect()
            })
            .collect();
        TransitionMatrix::from_rows(rows)
    }

    /// Inverse of [`TransitionMatrix::from_code`]; `None` when `d² > 64`.
    pub fn code(&self) -> Option<u64> {
        let d = self.d;
        if d * d > 64 {
            return None;
        }
        let mut code = 0u64;
        for (i, row) in self.rows.iter().enumerate() {
            for j in row.iter() {
                code |= 1u64 << (d * d - 1 - (i * d + j));
            }
        }
        Some(code)
    }

    pub fn identity(d: usize) -> Result<Self> {
        TransitionMatrix::from_rows((0..d).map(SymbolSubset::singleton).collect())
    }

    pub fn all_ones(d: usize) -> Result<Self> {
        TransitionMatrix::from_rows(vec![SymbolSubset::full(d); d])
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// `S(i)` for 0-based `i`.
    #[inline]
    pub fn successors(&self, i: usize) -> SymbolSubset {
        self.rows[i]
    }

    pub fn rows(&self) -> &[SymbolSubset] {
        &self.rows
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    /// Column sets: `predecessors()[c] = {s : c ∈ S(s)}`.
    pub fn predecessors(&self) -> Vec<SymbolSubset> {
        let mut cols = vec![SymbolSubset::EMPTY; self.d];
        for (s, row) in self.rows.iter().enumerate() {
            for c in row.iter() {
                cols[c].insert(s);
            }
        }
        cols
    }

    pub fn ensure_nonempty_rows(&self) -> Result<()> {
        match self.rows.iter().position(|r| r.is_empty()) {
            Some(i) => Err(Error::ZeroRow { row: i + 1 }),
            None => Ok(()),
        }
    }

    pub fn has_zero_row(&self) -> bool {
        self.rows.iter().any(|r| r.is_empty())
    }

    pub fn has_zero_column(&self) -> bool {
        self.predecessors().iter().any(|c| c.is_empty())
    }

    /// `s_A`, the largest number of ones in a row.
    pub fn max_row_sum(&self) -> usize {
        self.rows.iter().map(|r| r.len()).max().unwrap_or(0)
    }

    pub fn has_positive_row(&self) -> bool {
        let full = SymbolSubset::full(self.d);
        self.rows.contains(&full)
    }

    /// Support of `A^n` over the boolean semiring; `n = 0` gives the identity.
    pub fn power_support(&self, n: usize) -> SupportMatrix {
        let base = SupportMatrix::from(self);
        let mut result = SupportMatrix::identity(self.d);
        let mut square = base;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&square);
            }
            e >>= 1;
            if e > 0 {
                square = square.mul(&square);
            }
        }
        result
    }

    /// Least `p ≥ 1` with `supp(A^p)` all ones, searched up to the Wielandt
    /// bound `(d-1)² + 1`.
    pub fn primitivity_exponent(&self) -> Option<usize> {
        let cap = (self.d - 1) * (self.d - 1) + 1;
        let base = SupportMatrix::from(self);
        let mut power = base.clone();
        for p in 1..=cap {
            if power.is_all_ones() {
                return Some(p);
            }
            power = power.mul(&base);
        }
        None
    }

    pub fn is_primitive(&self) -> bool {
        self.primitivity_exponent().is_some()
    }

    /// Whether every k-tuple of symbols has a common predecessor, i.e. some
    /// row containing all of its entries.
    ///
    /// Only the set of entries of a tuple matters, and subsets of a covered
    /// set are covered, so it suffices to test every subset of size
    /// `min(k, d)`.
    pub fn all_ktuples_have_common_predecessor(&self, k: usize) -> bool {
        let m = k.min(self.d);
        if m == 0 {
            return true;
        }
        if self.has_positive_row() {
            return true;
        }
        let mut covered = true;
        for_each_subset_of_size(self.d, m, |t| {
            if !self.rows.iter().any(|r| t.is_subset(*r)) {
                covered = false;
                return false;
            }
            true
        });
        covered
    }
}

/// Visits every `m`-element subset of `{0..d}` in increasing numeric order
/// until `visit` returns `false`.
pub(crate) fn for_each_subset_of_size(d: usize, m: usize, mut visit: impl FnMut(SymbolSubset) -> bool) {
    if m > d || d > MAX_ALPHABET {
        return;
    }
    if m == 0 {
        visit(SymbolSubset::EMPTY);
        return;
    }
    // Gosper's hack.
    let mut v: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let limit_bit = d as u32;
    loop {
        if !visit(SymbolSubset::from_bits(v)) {
            return;
        }
        if m == d {
            return;
        }
        let c = v & v.wrapping_neg();
        let r = v.wrapping_add(c);
        if r == 0 {
            return;
        }
        v = (((r ^ v) >> 2) / c) | r;
        if limit_bit < 64 && v >> limit_bit != 0 {
            return;
        }
    }
}

impl fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_row_string(self.d)).collect();
        f.write_str(&rows.join("|"))
    }
}

impl fmt::Debug for TransitionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl FromStr for TransitionMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TransitionMatrix::parse(s)
    }
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TransitionMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        TransitionMatrix::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Positivity pattern of a `d × d` nonnegative matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SupportMatrix {
    d: usize,
    rows: Vec<SymbolSubset>,
}

impl SupportMatrix {
    pub fn identity(d: usize) -> Self {
        SupportMatrix {
            d,
            rows: (0..d).map(SymbolSubset::singleton).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> SymbolSubset {
        self.rows[i]
    }

    pub fn entry(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    /// Boolean (OR/AND) product.
    pub fn mul(&self, other: &SupportMatrix) -> SupportMatrix {
        assert_eq!(self.d, other.d, "dimension mismatch");
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .fold(SymbolSubset::EMPTY, |acc, m| acc.union(other.rows[m]))
            })
            .collect();
        SupportMatrix { d: self.d, rows }
    }

    pub fn is_all_ones(&self) -> bool {
        let full = SymbolSubset::full(self.d);
        self.rows.iter().all(|&r| r == full)
    }
}

impl From<&TransitionMatrix> for SupportMatrix {
    fn from(a: &TransitionMatrix) -> Self {
        SupportMatrix {
            d: a.d,
            rows: a.rows.clone(),
        }
    }
}

impl fmt::Display for SupportMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.rows.iter().map(|r| r.to_row_string(self.d)).collect();
        f.write_str(&rows.join("|"))
    }
}

impl fmt::Debug for SupportMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}
