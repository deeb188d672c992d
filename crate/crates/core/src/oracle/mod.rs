//! Exact follower-set oracle, independent of the relation engine.
//!
//! For a row configuration `ξ` on `L_n`, `Poss(ξ)` is the set of root
//! symbols from which `ξ` is reachable. Children subtrees are independent,
//! so `Poss` of an internal vertex is `{s : S(s) ∩ Poss(child) ≠ ∅ for every
//! child}` and leaves contribute the singleton of their label. The family
//! `Q_n` of all `Poss` values over `D^{L_n}` summarizes every follower-set
//! question at depth `n`: `F_n(i) ⊆ F_n(j)` iff no member of `Q_n` contains
//! `i` but not `j`.

mod config;
mod level;
mod naive;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;
use crate::subset::SymbolSubset;

pub use config::RowConfiguration;
pub use level::{level_matrix_supports, LevelSupports};
pub use naive::enumerate_labelings_naive;

/// Capacity knobs shared by the oracle routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    pub max_d: usize,
    pub max_k: usize,
    /// Largest depth accepted for degree searches and oracle depth requests.
    pub max_depth: u32,
    /// Guard on enumerated leaf configurations (naive and level routes).
    pub leaf_budget: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_d: 8,
            max_k: 4,
            max_depth: 12,
            leaf_budget: 1_000_000,
        }
    }
}

/// Environment variable holding cap overrides, e.g. `d=10,leaves=5000000`.
pub const CAPS_ENV: &str = "TREEFAIR_CAPS";

impl Caps {
    /// Applies `key=value` overrides separated by commas. Keys: `d`, `k`,
    /// `depth`, `leaves`.
    pub fn with_overrides(mut self, text: &str) -> Result<Self> {
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::parse(0, 0, format!("cap override {item:?} is not key=value")))?;
            let bad = || Error::parse(0, 0, format!("cap override {item:?} has a bad value"));
            let value = value.trim();
            match key.trim() {
                "d" => self.max_d = value.parse().map_err(|_| bad())?,
                "k" => self.max_k = value.parse().map_err(|_| bad())?,
                "depth" | "n" => self.max_depth = value.parse().map_err(|_| bad())?,
                "leaves" => self.leaf_budget = value.parse().map_err(|_| bad())?,
                other => {
                    return Err(Error::parse(0, 0, format!("unknown cap {other:?}")));
                }
            }
        }
        if self.max_d > crate::subset::MAX_ALPHABET {
            return Err(Error::capacity(
                "d",
                crate::subset::MAX_ALPHABET as u64,
                self.max_d as u64,
            ));
        }
        Ok(self)
    }

    /// Defaults with the overrides from [`CAPS_ENV`], if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(CAPS_ENV) {
            Ok(text) => Caps::default().with_overrides(&text),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub fn check_family(&self, a: &TransitionMatrix, k: usize) -> Result<()> {
        if k == 0 {
            return Err(Error::Precondition("tree dimension k must be at least 1".into()));
        }
        if a.d() > self.max_d {
            return Err(Error::capacity("d", self.max_d as u64, a.d() as u64));
        }
        if k > self.max_k {
            return Err(Error::capacity("k", self.max_k as u64, k as u64));
        }
        Ok(())
    }

    pub fn check_depth(&self, n: u32) -> Result<()> {
        if n > self.max_depth {
            return Err(Error::capacity("depth", self.max_depth as u64, n as u64));
        }
        Ok(())
    }

    /// `d^(k^n)` if it fits under the leaf budget.
    pub fn check_leaves(&self, d: usize, k: usize, n: u32) -> Result<u64> {
        let over = || Error::capacity("leaves", self.leaf_budget, u64::MAX);
        let width = (k as u64).checked_pow(n).ok_or_else(over)?;
        let width = u32::try_from(width).map_err(|_| over())?;
        let count = (d as u64).checked_pow(width).ok_or_else(over)?;
        if count > self.leaf_budget {
            return Err(Error::capacity("leaves", self.leaf_budget, count));
        }
        Ok(count)
    }
}

impl FromStr for Caps {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Caps::default().with_overrides(s)
    }
}

/// `T(P) = {s : S(s) ∩ P ≠ ∅}`, via the predecessor sets of the columns.
#[inline]
fn touching(pred: &[SymbolSubset], p: SymbolSubset) -> SymbolSubset {
    p.iter().fold(SymbolSubset::EMPTY, |acc, c| acc.union(pred[c]))
}

/// Root symbols from which `ξ` is reachable on `L_n`.
pub fn poss_root(a: &TransitionMatrix, k: usize, n: u32, xi: &RowConfiguration) -> Result<SymbolSubset> {
    if k == 0 {
        return Err(Error::Precondition("tree dimension k must be at least 1".into()));
    }
    let width = (k as u64)
        .checked_pow(n)
        .filter(|&w| w <= usize::MAX as u64)
        .ok_or_else(|| Error::capacity("leaves", usize::MAX as u64, u64::MAX))? as usize;
    if xi.len() != width {
        return Err(Error::Precondition(format!(
            "row configuration has length {}, row {n} of the {k}-tree has {width} sites",
            xi.len()
        )));
    }
    if let Some(&s) = xi.symbols().iter().find(|&&s| s as usize >= a.d()) {
        return Err(Error::Precondition(format!(
            "symbol {} is outside 1..{}",
            s as usize + 1,
            a.d()
        )));
    }
    let pred = a.predecessors();
    let mut level: Vec<SymbolSubset> = xi
        .symbols()
        .iter()
        .map(|&s| SymbolSubset::singleton(s as usize))
        .collect();
    for _ in 0..n {
        level = level
            .chunks(k)
            .map(|children| {
                children
                    .iter()
                    .fold(SymbolSubset::full(a.d()), |acc, &p| acc.intersection(touching(&pred, p)))
            })
            .collect();
    }
    Ok(level[0])
}

/// `Q_n`: every value of [`poss_root`] over all configurations of `L_n`,
/// in increasing bit order.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PossFamily {
    pub d: usize,
    pub n: u32,
    pub sets: Vec<SymbolSubset>,
}

impl PossFamily {
    fn base(d: usize) -> Self {
        PossFamily {
            d,
            n: 0,
            sets: (0..d).map(SymbolSubset::singleton).collect(),
        }
    }

    /// `Q_{n+1}`: all intersections of `k` (not necessarily distinct) sets
    /// `T(P)`, `P ∈ Q_n`.
    fn next(&self, pred: &[SymbolSubset], k: usize) -> Self {
        let touched: BTreeSet<SymbolSubset> = self.sets.iter().map(|&p| touching(pred, p)).collect();
        let mut combos = touched.clone();
        // Intersecting with an element already used leaves a set unchanged,
        // so the g-fold intersections contain the (g-1)-fold ones.
        for _ in 1..k {
            let mut grown = combos.clone();
            for &x in &combos {
                for &t in &touched {
                    grown.insert(x.intersection(t));
                }
            }
            if grown.len() == combos.len() {
                break;
            }
            combos = grown;
        }
        PossFamily {
            d: self.d,
            n: self.n + 1,
            sets: combos.into_iter().collect(),
        }
    }

    pub fn contains(&self, p: SymbolSubset) -> bool {
        self.sets.binary_search(&p).is_ok()
    }

    /// Whether `F_n(i) ⊆ F_n(j)` (0-based symbols).
    pub fn relates(&self, i: usize, j: usize) -> bool {
        !self.sets.iter().any(|p| p.contains(i) && !p.contains(j))
    }

    /// Every member empty or full.
    pub fn is_fair(&self) -> bool {
        let full = SymbolSubset::full(self.d);
        self.sets.iter().all(|&p| p.is_empty() || p == full)
    }

    /// Every member full.
    pub fn is_complete(&self) -> bool {
        let full = SymbolSubset::full(self.d);
        self.sets.iter().all(|&p| p == full)
    }
}

impl fmt::Debug for PossFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sets: Vec<String> = self.sets.iter().map(|s| s.to_set_string()).collect();
        write!(f, "Q_{}={{{}}}", self.n, sets.join(", "))
    }
}

/// Lazily extended sequence `Q_0, Q_1, …` for one matrix and tree dimension.
#[derive(Clone, Debug)]
pub struct FollowerOracle {
    k: usize,
    pred: Vec<SymbolSubset>,
    families: Vec<PossFamily>,
}

impl FollowerOracle {
    pub fn new(a: &TransitionMatrix, k: usize, caps: &Caps) -> Result<Self> {
        caps.check_family(a, k)?;
        Ok(FollowerOracle {
            k,
            pred: a.predecessors(),
            families: vec![PossFamily::base(a.d())],
        })
    }

    pub fn d(&self) -> usize {
        self.pred.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn family(&mut self, n: u32) -> &PossFamily {
        while self.families.len() <= n as usize {
            let next = self.families.last().expect("Q_0 is always present").next(&self.pred, self.k);
            self.families.push(next);
        }
        &self.families[n as usize]
    }

    pub fn relations_at(&mut self, n: u32) -> OracleRelationSet {
        let family = self.family(n);
        let d = family.d;
        let related = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| family.relates(i, j))
            .collect();
        OracleRelationSet {
            d,
            n,
            related,
            degrees: None,
        }
    }

    pub fn membership(&mut self, n: u32) -> Membership {
        let family = self.family(n);
        Membership {
            in_p: family.is_fair(),
            in_p_star: family.is_complete(),
        }
    }

    /// Least `n ≤ n_max` with `F_n(i) ⊆ F_n(j)`.
    pub fn degree(&mut self, i: usize, j: usize, n_max: u32) -> Option<u32> {
        (0..=n_max).find(|&n| self.family(n).relates(i, j))
    }

    /// Relations at `n_max` with the degree of every pair, `None` for pairs
    /// of degree above `n_max`.
    pub fn degree_table(&mut self, n_max: u32) -> OracleRelationSet {
        let d = self.d();
        let mut degrees = vec![None; d * d];
        for n in 0..=n_max {
            let family = self.family(n);
            for (idx, slot) in degrees.iter_mut().enumerate() {
                if slot.is_none() && family.relates(idx / d, idx % d) {
                    *slot = Some(n);
                }
            }
        }
        let mut set = self.relations_at(n_max);
        set.degrees = Some(degrees);
        set
    }
}

/// Pairs `(i, j)` with `F_n(i) ⊆ F_n(j)` at one depth.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleRelationSet {
    pub d: usize,
    pub n: u32,
    related: Vec<bool>,
    /// Degree of each pair (row-major), when computed.
    pub degrees: Option<Vec<Option<u32>>>,
}

impl OracleRelationSet {
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.related[i * self.d + j]
    }

    pub fn degree(&self, i: usize, j: usize) -> Option<u32> {
        self.degrees.as_ref().and_then(|t| t[i * self.d + j])
    }

    /// 0-based pairs in row-major order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (0..self.d)
            .flat_map(|i| (0..self.d).map(move |j| (i, j)))
            .filter(|&(i, j)| self.contains(i, j))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.related.iter().filter(|&&r| r).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_subset_of(&self, other: &OracleRelationSet) -> bool {
        self.related
            .iter()
            .zip(&other.related)
            .all(|(&a, &b)| !a || b)
    }

    pub fn is_transitive(&self) -> bool {
        let d = self.d;
        (0..d).all(|i| {
            (0..d).all(|j| !self.contains(i, j) || (0..d).all(|l| !self.contains(j, l) || self.contains(i, l)))
        })
    }

    /// 0/1 table `[110|011|001]`.
    pub fn render(&self) -> String {
        let rows: Vec<String> = self
            .related
            .chunks(self.d)
            .map(|row| row.iter().map(|&r| if r { '1' } else { '0' }).collect())
            .collect();
        rows.join("|")
    }
}

impl fmt::Debug for OracleRelationSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "relations_{}=[{}]", self.n, self.render())
    }
}

/// `(A ∈ P(k, n), A ∈ P*(k, n))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Membership {
    pub in_p: bool,
    pub in_p_star: bool,
}

pub fn poss_family(a: &TransitionMatrix, k: usize, n: u32, caps: &Caps) -> Result<PossFamily> {
    let mut oracle = FollowerOracle::new(a, k, caps)?;
    Ok(oracle.family(n).clone())
}

pub fn oracle_relations_at(a: &TransitionMatrix, k: usize, n: u32, caps: &Caps) -> Result<OracleRelationSet> {
    Ok(FollowerOracle::new(a, k, caps)?.relations_at(n))
}

pub fn oracle_membership(a: &TransitionMatrix, k: usize, n: u32, caps: &Caps) -> Result<Membership> {
    a.ensure_nonempty_rows()?;
    if n == 0 {
        return Err(Error::Precondition("fairness is defined for n >= 1".into()));
    }
    Ok(FollowerOracle::new(a, k, caps)?.membership(n))
}

/// Degree of `i ⇒ j` (0-based), searched up to `n_max`.
pub fn relation_degree(
    a: &TransitionMatrix,
    k: usize,
    i: usize,
    j: usize,
    n_max: u32,
    caps: &Caps,
) -> Result<Option<u32>> {
    caps.check_depth(n_max)?;
    if i >= a.d() || j >= a.d() {
        return Err(Error::Precondition(format!("symbols must lie in 1..{}", a.d())));
    }
    Ok(FollowerOracle::new(a, k, caps)?.degree(i, j, n_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(text: &str) -> TransitionMatrix {
        TransitionMatrix::parse(text).unwrap()
    }

    fn set(symbols: &[usize]) -> SymbolSubset {
        symbols.iter().map(|s| s - 1).collect()
    }

    fn xi(text: &str) -> RowConfiguration {
        text.parse().unwrap()
    }

    /// Q_n by evaluating `poss_root` on every configuration.
    fn family_by_enumeration(a: &TransitionMatrix, k: usize, n: u32) -> Vec<SymbolSubset> {
        let width = k.pow(n);
        let total = a.d().pow(width as u32);
        let sets: BTreeSet<SymbolSubset> = (0..total as u64)
            .map(|idx| poss_root(a, k, n, &RowConfiguration::from_index(a.d(), width, idx)).unwrap())
            .collect();
        sets.into_iter().collect()
    }

    #[test]
    fn poss_root_examples() {
        let a = m("110|001|100");
        assert_eq!(poss_root(&a, 2, 1, &xi("12")).unwrap(), set(&[1]));
        assert_eq!(poss_root(&a, 2, 1, &xi("33")).unwrap(), set(&[2]));
        for c in 1..=3 {
            let root = RowConfiguration::new(vec![c as u8 - 1]);
            assert_eq!(poss_root(&a, 2, 0, &root).unwrap(), set(&[c]));
        }
        assert!(poss_root(&a, 2, 1, &xi("1")).is_err());
        assert!(poss_root(&a, 2, 1, &xi("14")).is_err());
    }

    #[test]
    fn families_small() {
        assert_eq!(poss_family(&m("11|11"), 2, 1, &Caps::default()).unwrap().sets, vec![set(&[1, 2])]);
        let q2 = poss_family(&m("0111|1011|1101|1110"), 2, 2, &Caps::default()).unwrap();
        assert_eq!(q2.sets, vec![set(&[1, 2, 3, 4])]);
    }

    #[test]
    fn three_symbol_family_depth_one() {
        // Hand enumeration over the 9 configurations of L_1 for k = 2:
        // 11 -> {1,3}; 12,21,22 -> {1}; 13,31,23,32 -> {}; 33 -> {2}.
        let a = m("110|001|100");
        let q1 = poss_family(&a, 2, 1, &Caps::default()).unwrap();
        assert_eq!(q1.sets, {
            let mut v = vec![SymbolSubset::EMPTY, set(&[1]), set(&[2]), set(&[1, 3])];
            v.sort();
            v
        });
        assert_eq!(q1.sets, family_by_enumeration(&a, 2, 1));
    }

    #[test]
    fn families_match_direct_enumeration() {
        for text in ["110|001|100", "011|100|010", "0111|1000|0100|0010", "11|10", "101|010|111"] {
            let a = m(text);
            for k in 1..=3 {
                let max_n = if k == 1 { 4 } else if a.d() == 4 { 1 } else { 2 };
                for n in 0..=max_n {
                    let q = poss_family(&a, k, n, &Caps::default()).unwrap();
                    assert_eq!(q.sets, family_by_enumeration(&a, k, n), "{text} k={k} n={n}");
                }
            }
        }
    }

    #[test]
    fn relation_sets() {
        let caps = Caps::default();
        let a = m("0111|1011|1101|1110");
        assert_eq!(oracle_relations_at(&a, 2, 2, &caps).unwrap().len(), 16);
        let r1 = oracle_relations_at(&a, 2, 1, &caps).unwrap();
        assert_eq!(r1.pairs(), vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(oracle_relations_at(&m("110|001|100"), 2, 4, &caps).unwrap().len(), 9);
    }

    #[test]
    fn memberships() {
        let caps = Caps::default();
        let both = Membership { in_p: true, in_p_star: true };
        let neither = Membership { in_p: false, in_p_star: false };
        assert_eq!(oracle_membership(&m("0111|1011|1101|1110"), 2, 2, &caps).unwrap(), both);
        for n in 1..=6 {
            assert_eq!(oracle_membership(&m("011|100|010"), 2, n, &caps).unwrap(), neither);
        }
        assert_eq!(oracle_membership(&m("11|11"), 2, 1, &caps).unwrap(), both);
        assert!(oracle_membership(&m("11|11"), 2, 0, &caps).is_err());
        assert_eq!(
            oracle_membership(&m("10|00"), 2, 1, &caps),
            Err(Error::ZeroRow { row: 2 })
        );
    }

    #[test]
    fn degrees() {
        let caps = Caps::default();
        let a = m("110|001|100");
        assert_eq!(relation_degree(&a, 2, 0, 1, 6, &caps).unwrap(), Some(4));
        assert_eq!(relation_degree(&a, 2, 2, 0, 6, &caps).unwrap(), Some(1));
        assert_eq!(relation_degree(&a, 2, 1, 1, 0, &caps).unwrap(), Some(0));
        assert_eq!(relation_degree(&a, 2, 0, 1, 3, &caps).unwrap(), None);
        assert!(relation_degree(&a, 2, 0, 1, 13, &caps).is_err());
    }

    #[test]
    fn caps_are_enforced_and_overridable() {
        let big = TransitionMatrix::all_ones(9).unwrap();
        assert!(matches!(
            poss_family(&big, 2, 1, &Caps::default()),
            Err(Error::Capacity { cap: "d", .. })
        ));
        let caps: Caps = "d=9,k=5".parse().unwrap();
        assert_eq!(poss_family(&big, 5, 2, &caps).unwrap().sets, vec![SymbolSubset::full(9)]);
        assert!(matches!(
            poss_family(&m("1"), 5, 1, &Caps::default()),
            Err(Error::Capacity { cap: "k", .. })
        ));
        assert!("d=x".parse::<Caps>().is_err());
        assert!("bogus=1".parse::<Caps>().is_err());
        assert!("d=65".parse::<Caps>().is_err());
    }

    #[test]
    fn degree_table_agrees_with_single_queries() {
        let caps = Caps::default();
        let a = m("1001|1000|0100|0010");
        let mut oracle = FollowerOracle::new(&a, 2, &caps).unwrap();
        let table = oracle.degree_table(8);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(table.degree(i, j), relation_degree(&a, 2, i, j, 8, &caps).unwrap());
            }
        }
    }
}
