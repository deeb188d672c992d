//! Round-based discovery of replacement relations `i ⇒ j`.
//!
//! Round `n+1` marks `i ⇒ j` whenever every follower `a ∈ S(i)` can be
//! matched with some `b ∈ S(j)` already known to satisfy `a ⇒ b` after
//! round `n`. Relations found in a round are only used from the next round
//! on. The discovery is sound for every tree dimension `k` and complete when
//! `k ≥ s_A`, in which case the round at which a relation is found equals the
//! least tree height on which it holds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;
use crate::subset::SymbolSubset;

/// The evolving `R` table: entry `(i, j)` is the round at which `i ⇒ j` was
/// discovered, `0` while unknown. Diagonal entries are stored as `1` even
/// though `i ⇒ i` holds on trees of height 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RelationMatrix {
    d: usize,
    entries: Vec<u32>,
    round: u32,
}

impl RelationMatrix {
    /// `R_0 = I`.
    pub fn initial(d: usize) -> Self {
        let mut entries = vec![0; d * d];
        for i in 0..d {
            entries[i * d + i] = 1;
        }
        RelationMatrix {
            d,
            entries,
            round: 0,
        }
    }

    /// Builds `R` as it stood after round `round`.
    pub fn from_entries(d: usize, entries: Vec<u32>, round: u32) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::Precondition(format!(
                "relation matrix needs {} entries, got {}",
                d * d,
                entries.len()
            )));
        }
        for i in 0..d {
            if entries[i * d + i] != 1 {
                return Err(Error::Precondition(format!(
                    "diagonal entry ({}, {}) must be 1",
                    i + 1,
                    i + 1
                )));
            }
        }
        if let Some(&e) = entries.iter().find(|&&e| e > round.max(1)) {
            return Err(Error::Precondition(format!(
                "entry {e} is later than round {round}"
            )));
        }
        Ok(RelationMatrix { d, entries, round })
    }

    /// Parses `[100|212|101]` (digits) or `[1,10|...]` (comma separated).
    /// The round is taken to be the largest entry.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let body = trimmed
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(trimmed);
        let mut entries = Vec::new();
        let mut d = None;
        for (r, row) in body.split('|').enumerate() {
            let row = row.trim();
            let values: Vec<u32> = if row.contains(',') {
                row.split(',')
                    .enumerate()
                    .map(|(c, v)| {
                        v.trim().parse::<u32>().map_err(|_| {
                            Error::parse(r + 1, c + 1, format!("bad entry {:?}", v.trim()))
                        })
                    })
                    .collect::<Result<_>>()?
            } else {
                row.chars()
                    .enumerate()
                    .map(|(c, ch)| {
                        ch.to_digit(10).ok_or_else(|| {
                            Error::parse(r + 1, c + 1, format!("bad entry {ch:?}"))
                        })
                    })
                    .collect::<Result<_>>()?
            };
            match d {
                None => d = Some(values.len()),
                Some(len) if len != values.len() => {
                    return Err(Error::parse(r + 1, 0, "ragged rows"));
                }
                _ => {}
            }
            entries.extend(values);
        }
        let d = d.unwrap_or(0);
        if d == 0 || entries.len() != d * d {
            return Err(Error::parse(0, 0, "relation matrix must be square and nonempty"));
        }
        let round = entries.iter().copied().max().unwrap_or(0);
        RelationMatrix::from_entries(d, entries, round)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of the last completed round.
    #[inline]
    pub fn round(&self) -> u32 {
        self.round
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.entries[i * self.d + j]
    }

    #[inline]
    pub fn is_known(&self, i: usize, j: usize) -> bool {
        self.get(i, j) > 0
    }

    /// `{b : a ⇒ b known}` for each `a`.
    pub fn known_targets(&self) -> Vec<SymbolSubset> {
        (0..self.d)
            .map(|a| (0..self.d).filter(|&b| self.is_known(a, b)).collect())
            .collect()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn known_count(&self) -> usize {
        self.entries.iter().filter(|&&e| e > 0).count()
    }

    pub fn is_all_positive(&self) -> bool {
        self.entries.iter().all(|&e| e > 0)
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    /// `R_n=[...]` as printed in traces.
    pub fn labelled(&self) -> String {
        format!("R_{}=[{}]", self.round, self)
    }
}

impl fmt::Display for RelationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.entries.iter().any(|&e| e > 9);
        let sep = if wide { "," } else { "" };
        let rows: Vec<String> = self
            .entries
            .chunks(self.d)
            .map(|row| {
                row.iter()
                    .map(u32::to_string)
                    .collect::<Vec<_>>()
                    .join(sep)
            })
            .collect();
        f.write_str(&rows.join("|"))
    }
}

impl fmt::Debug for RelationMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.labelled())
    }
}

/// A move `s_{ab}`: delete `from`, insert `to` (0-based symbols).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub from: usize,
    pub to: usize,
}

/// Applies a set of moves to a row: every source is removed, then every
/// target inserted, so the order of the moves does not matter.
pub fn apply_moves(row: SymbolSubset, moves: &[Move]) -> Result<SymbolSubset> {
    let mut sources = SymbolSubset::EMPTY;
    let mut targets = SymbolSubset::EMPTY;
    for mv in moves {
        if mv.from == mv.to {
            return Err(Error::Precondition(format!(
                "move s_{{{0}{0}}} has equal source and target",
                mv.from + 1
            )));
        }
        if !row.contains(mv.from) {
            return Err(Error::Precondition(format!(
                "move source {} is not in the row {}",
                mv.from + 1,
                row.to_set_string()
            )));
        }
        if sources.contains(mv.from) {
            return Err(Error::Precondition(format!(
                "move source {} appears twice",
                mv.from + 1
            )));
        }
        sources.insert(mv.from);
        targets.insert(mv.to);
    }
    Ok(row.difference(sources).union(targets))
}

/// One relation found in a round, with the matching `a ↦ b(a)` used for
/// every `a ∈ S(i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discovery {
    pub i: usize,
    pub j: usize,
    /// `(a, b)` pairs in increasing `a`; `b` is the smallest symbol of
    /// `S(j)` with `a ⇒ b` known in the previous round.
    pub witnesses: Vec<(usize, usize)>,
}

impl Discovery {
    /// The nontrivial moves of the witness map.
    pub fn moves(&self) -> Vec<Move> {
        self.witnesses
            .iter()
            .filter(|(a, b)| a != b)
            .map(|&(from, to)| Move { from, to })
            .collect()
    }

    /// `s_{13}s_{23}(A_1)=[001]=A_1^* ≤ A_2 ⇒ 1 ⇒ 2`, or `A_3=[100] ≤ A_1 ⇒ 3 ⇒ 1`
    /// when no move is needed.
    pub fn render(&self, a: &TransitionMatrix) -> String {
        let d = a.d();
        let row = a.successors(self.i);
        let moves = self.moves();
        let (i, j) = (self.i + 1, self.j + 1);
        if moves.is_empty() {
            return format!("A_{i}=[{}] ≤ A_{j} ⇒ {i} ⇒ {j}", row.to_row_string(d));
        }
        let wide = d > 9;
        let prefix: String = moves
            .iter()
            .map(|m| {
                if wide {
                    format!("s_{{{},{}}}", m.from + 1, m.to + 1)
                } else {
                    format!("s_{{{}{}}}", m.from + 1, m.to + 1)
                }
            })
            .collect();
        let moved = apply_moves(row, &moves).expect("witness moves are valid by construction");
        format!(
            "{prefix}(A_{i})=[{}]=A_{i}^* ≤ A_{j} ⇒ {i} ⇒ {j}",
            moved.to_row_string(d)
        )
    }
}

/// Everything found in one round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    pub round: u32,
    pub discoveries: Vec<Discovery>,
}

impl RoundTrace {
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.discoveries.iter().map(|x| (x.i, x.j)).collect()
    }
}

/// Matches every `a ∈ S(i)` with the smallest `b ∈ S(j)` such that `a ⇒ b`
/// is known, or `None` if some `a` has no match.
fn match_successors(
    a: &TransitionMatrix,
    known: &[SymbolSubset],
    i: usize,
    j: usize,
) -> Option<Vec<(usize, usize)>> {
    let target = a.successors(j);
    a.successors(i)
        .iter()
        .map(|x| known[x].intersection(target).iter().next().map(|y| (x, y)))
        .collect()
}

/// Runs round `R.round() + 1`, reading only the input `R`.
pub fn round_step(a: &TransitionMatrix, r: &RelationMatrix) -> Result<(RelationMatrix, RoundTrace)> {
    a.ensure_nonempty_rows()?;
    if a.d() != r.d() {
        return Err(Error::Precondition(format!(
            "relation matrix is {0}×{0} but the transition matrix is {1}×{1}",
            r.d(),
            a.d()
        )));
    }
    let d = a.d();
    let round = r.round() + 1;
    let known = r.known_targets();
    let mut next = r.clone();
    next.round = round;
    let mut discoveries = Vec::new();
    for i in 0..d {
        for j in 0..d {
            if r.is_known(i, j) {
                continue;
            }
            if let Some(witnesses) = match_successors(a, &known, i, j) {
                next.entries[i * d + j] = round;
                discoveries.push(Discovery { i, j, witnesses });
            }
        }
    }
    Ok((next, RoundTrace { round, discoveries }))
}

/// Outcome of running rounds until one adds nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgorithmResult {
    pub relations: RelationMatrix,
    /// Rounds that discovered at least one relation, in order.
    pub rounds: Vec<RoundTrace>,
    /// The first round that discovered nothing.
    pub stalled_at: u32,
    pub all_positive: bool,
    /// Largest entry of the final `R` when it is all positive.
    pub max_height: Option<u32>,
}

impl AlgorithmResult {
    pub fn discovery_rounds(&self) -> usize {
        self.rounds.len()
    }

    /// `(i, j, height)` for every off-diagonal discovery, in discovery order.
    pub fn discoveries(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.rounds
            .iter()
            .flat_map(|t| t.discoveries.iter().map(move |x| (x.i, x.j, t.round)))
    }
}

pub fn run_algorithm(a: &TransitionMatrix) -> Result<AlgorithmResult> {
    a.ensure_nonempty_rows()?;
    let mut r = RelationMatrix::initial(a.d());
    let mut rounds = Vec::new();
    loop {
        let (next, trace) = round_step(a, &r)?;
        if trace.discoveries.is_empty() {
            let all_positive = r.is_all_positive();
            let max_height = all_positive.then(|| r.max_entry());
            return Ok(AlgorithmResult {
                relations: r,
                rounds,
                stalled_at: trace.round,
                all_positive,
                max_height,
            });
        }
        rounds.push(trace);
        r = next;
    }
}

/// Paper-style trace: round 0, every discovery round with its moves and the
/// updated `R`, and the stall round.
pub fn render_trace(a: &TransitionMatrix, result: &AlgorithmResult) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Round 0: {}\n",
        RelationMatrix::initial(a.d()).labelled()
    ));
    let mut r = RelationMatrix::initial(a.d());
    for trace in &result.rounds {
        out.push_str(&format!("Round {}:\n", trace.round));
        for x in &trace.discoveries {
            out.push_str("  ");
            out.push_str(&x.render(a));
            out.push('\n');
        }
        let d = a.d();
        for x in &trace.discoveries {
            r.entries[x.i * d + x.j] = trace.round;
        }
        r.round = trace.round;
        out.push_str(&format!("  {}\n", r.labelled()));
    }
    out.push_str(&format!(
        "Round {}: no new relations; final {}\n",
        result.stalled_at,
        result.relations.labelled()
    ));
    out
}

/// Answer to "is `A ∈ P(k, n)` for some `n`?".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// `A ∈ P(k, n)` for every `n ≥ n_min`.
    Fair { n_min: u32 },
    /// `A ∉ P(k, n)` for every `n`.
    NotFair,
    Inconclusive,
}

impl Verdict {
    /// CLI exit code: 0 fair, 1 not fair, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Fair { .. } => 0,
            Verdict::NotFair => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Fair { .. } => "FAIR",
            Verdict::NotFair => "NOT_FAIR",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Fair { n_min } => write!(f, "FAIR (n_min = {n_min})"),
            other => f.write_str(other.label()),
        }
    }
}

/// Which argument a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// Discovery is complete when `k ≥ s_A`: heights equal degrees and a
    /// stall with unknown pairs rules out every `n`.
    Completeness,
    /// Every discovered relation holds on trees of its height, for any `k`.
    DiscoverySoundness,
    /// Exact follower-set computation.
    OracleDirect,
}

impl Basis {
    pub fn describe(self) -> &'static str {
        match self {
            Basis::Completeness => "completeness of discovery for k >= s_A",
            Basis::DiscoverySoundness => "soundness of discovered relations",
            Basis::OracleDirect => "exact follower-set oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub basis: Basis,
    /// `true` when `n_min` is known to be the least fair height.
    pub n_min_exact: bool,
    pub result: AlgorithmResult,
}

/// Classifies `A` for tree dimension `k` from the final relation matrix.
pub fn classify_fairness(a: &TransitionMatrix, k: usize) -> Result<Classification> {
    if k == 0 {
        return Err(Error::Precondition("tree dimension k must be at least 1".into()));
    }
    let result = run_algorithm(a)?;
    let complete = k >= a.max_row_sum();
    let (verdict, basis, n_min_exact) = match (result.max_height, complete) {
        (Some(n_min), true) => (Verdict::Fair { n_min }, Basis::Completeness, true),
        (Some(n_min), false) => (Verdict::Fair { n_min }, Basis::DiscoverySoundness, false),
        (None, true) => (Verdict::NotFair, Basis::Completeness, false),
        (None, false) => (Verdict::Inconclusive, Basis::DiscoverySoundness, false),
    };
    Ok(Classification {
        verdict,
        basis,
        n_min_exact,
        result,
    })
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

    fn mv(from: usize, to: usize) -> Move {
        Move {
            from: from - 1,
            to: to - 1,
        }
    }

    fn pairs(trace: &RoundTrace) -> Vec<(usize, usize)> {
        trace.pairs().into_iter().map(|(i, j)| (i + 1, j + 1)).collect()
    }

    #[test]
    fn moves_on_rows() {
        assert_eq!(apply_moves(set(&[3]), &[mv(3, 1)]).unwrap(), set(&[1]));
        assert_eq!(
            apply_moves(set(&[1, 2]), &[mv(2, 3), mv(1, 3)]).unwrap(),
            set(&[3])
        );
        assert_eq!(apply_moves(set(&[1, 2]), &[]).unwrap(), set(&[1, 2]));
    }

    #[test]
    fn moves_reject_bad_preconditions() {
        assert!(apply_moves(set(&[1]), &[mv(2, 1)]).is_err());
        assert!(apply_moves(set(&[1]), &[mv(1, 1)]).is_err());
        assert!(apply_moves(set(&[1, 2]), &[mv(1, 2), mv(1, 3)]).is_err());
    }

    #[test]
    fn first_round_from_identity() {
        let a = m("110|001|100");
        let (r1, trace) = round_step(&a, &RelationMatrix::initial(3)).unwrap();
        assert_eq!(pairs(&trace), vec![(3, 1)]);
        assert_eq!(r1.to_string(), "100|010|101");
        assert_eq!(trace.round, 1);
    }

    #[test]
    fn second_round_from_given_matrix() {
        let a = m("110|001|100");
        let r1 = RelationMatrix::parse("[100|010|101]").unwrap();
        let (r2, trace) = round_step(&a, &r1).unwrap();
        assert_eq!(pairs(&trace), vec![(2, 1), (2, 3)]);
        assert_eq!(r2.labelled(), "R_2=[100|212|101]");
        assert_eq!(trace.discoveries[0].render(&a), "s_{31}(A_2)=[100]=A_2^* ≤ A_1 ⇒ 2 ⇒ 1");
    }

    #[test]
    fn rotation_matrix_finds_nothing_new() {
        // S(1)={2,3}, S(2)={1}, S(3)={2}. With only 3 ⇒ 1 known, every
        // unknown pair needs a relation out of 1 or 2, and none is known.
        let a = m("011|100|010");
        let r1 = RelationMatrix::parse("[100|010|101]").unwrap();
        let (_, trace) = round_step(&a, &r1).unwrap();
        assert!(trace.discoveries.is_empty());
    }

    #[test]
    fn full_run_three_symbols() {
        let a = m("110|001|100");
        let result = run_algorithm(&a).unwrap();
        assert_eq!(result.relations.to_string(), "143|212|141");
        assert_eq!(result.stalled_at, 5);
        assert!(result.all_positive);
        assert_eq!(result.max_height, Some(4));
        let render = render_trace(&a, &result);
        assert!(render.contains("s_{13}s_{23}(A_1)=[001]=A_1^* ≤ A_2 ⇒ 1 ⇒ 2"));
        assert!(render.contains("s_{13}(A_3)=[001]=A_3^* ≤ A_2 ⇒ 3 ⇒ 2"));
        assert!(render.contains("R_3=[103|212|101]"));
    }

    #[test]
    fn full_run_four_symbols() {
        let result = run_algorithm(&m("1001|1000|0100|0010")).unwrap();
        assert_eq!(result.relations.to_string(), "1456|1156|2216|3331");
        assert_eq!(result.max_height, Some(6));
        assert_eq!(result.stalled_at, 7);
    }

    #[test]
    fn full_run_stalls_without_full_relations() {
        let result = run_algorithm(&m("0111|1000|0100|0010")).unwrap();
        assert_eq!(result.relations.to_string(), "1000|0100|1010|1201");
        assert!(!result.all_positive);
        assert_eq!(result.max_height, None);
        assert_eq!(result.stalled_at, 3);
    }

    #[test]
    fn zero_rows_are_rejected() {
        let a = m("10|00");
        assert_eq!(run_algorithm(&a), Err(Error::ZeroRow { row: 2 }));
        assert!(round_step(&a, &RelationMatrix::initial(2)).is_err());
        assert!(classify_fairness(&a, 2).is_err());
    }

    #[test]
    fn classifications() {
        let c = classify_fairness(&m("110|001|100"), 2).unwrap();
        assert_eq!(c.verdict, Verdict::Fair { n_min: 4 });
        assert_eq!(c.basis, Basis::Completeness);

        let c = classify_fairness(&m("0111|1000|0100|0010"), 3).unwrap();
        assert_eq!(c.verdict, Verdict::NotFair);

        let c = classify_fairness(&m("0111|1011|1101|1110"), 2).unwrap();
        assert_eq!(c.verdict, Verdict::Inconclusive);
        assert_eq!(c.result.rounds.len(), 0);

        // Below s_A an all-positive R is still a sound certificate.
        let c = classify_fairness(&m("110|001|100"), 1).unwrap();
        assert_eq!(c.verdict, Verdict::Fair { n_min: 4 });
        assert_eq!(c.basis, Basis::DiscoverySoundness);

        assert!(classify_fairness(&m("1"), 0).is_err());
    }

    #[test]
    fn relation_matrix_text_round_trip() {
        let r = RelationMatrix::parse("[1456|1156|2216|3331]").unwrap();
        assert_eq!(r.round(), 6);
        assert_eq!(r.to_string(), "1456|1156|2216|3331");
        let wide = RelationMatrix::parse("1,10|0,1").unwrap();
        assert_eq!(wide.to_string(), "1,10|0,1");
        assert!(RelationMatrix::parse("[10|11|]").is_err());
        assert!(RelationMatrix::parse("[20|01]").is_err());
    }
}
