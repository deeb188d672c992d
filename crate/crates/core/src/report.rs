//! Analysis reports combining the relation engine, the matrix facts and an
//! optional oracle section.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::TransitionMatrix;
use crate::oracle::{Caps, FollowerOracle};
use crate::relation::{classify_fairness, render_trace, Basis, Verdict};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub round: u32,
    /// 1-based `(i, j)` pairs discovered in this round.
    pub discoveries: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmSection {
    /// Final relation matrix; diagonal entries are stored as 1 although
    /// `i ⇒ i` has height 0.
    pub final_r: String,
    pub rounds: Vec<RoundSummary>,
    pub stalled_at: u32,
    pub all_positive: bool,
    pub max_height: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLevel {
    pub n: u32,
    /// 0/1 table of `F_n(i) ⊆ F_n(j)`.
    pub relations: String,
    pub in_p: bool,
    pub in_p_star: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleSection {
    pub depth: u32,
    pub levels: Vec<OracleLevel>,
    /// Degree of each relation (row-major), `null` above `depth`.
    pub degrees: Vec<Vec<Option<u32>>>,
    pub common_predecessors: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub matrix: TransitionMatrix,
    pub k: usize,
    pub max_row_sum: usize,
    pub primitivity_exponent: Option<usize>,
    pub has_positive_row: bool,
    pub algorithm: AlgorithmSection,
    /// Verdict of the relation engine alone.
    pub algorithm_verdict: Verdict,
    pub verdict: Verdict,
    pub basis: Basis,
    /// Whether `n_min` of a fair verdict is known to be least.
    pub n_min_exact: bool,
    pub oracle: Option<OracleSection>,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AnalyzeOptions {
    pub oracle_depth: Option<u32>,
    pub caps: Caps,
}

/// Runs the relation engine and, if requested, the oracle up to
/// `oracle_depth`.
///
/// An inconclusive algorithm verdict is resolved when the oracle finds a
/// fair depth within `oracle_depth`; monotonicity in `n` makes the first
/// such depth the least one.
pub fn analyze(a: &TransitionMatrix, k: usize, options: &AnalyzeOptions) -> Result<AnalysisReport> {
    let classification = classify_fairness(a, k)?;
    let result = &classification.result;
    let exponent = a.primitivity_exponent();

    let oracle = match options.oracle_depth {
        Some(depth) => {
            if depth == 0 {
                return Err(Error::Precondition("oracle depth must be at least 1".into()));
            }
            options.caps.check_depth(depth)?;
            let mut oracle = FollowerOracle::new(a, k, &options.caps)?;
            let levels = (1..=depth)
                .map(|n| {
                    let membership = oracle.membership(n);
                    OracleLevel {
                        n,
                        relations: oracle.relations_at(n).render(),
                        in_p: membership.in_p,
                        in_p_star: membership.in_p_star,
                    }
                })
                .collect();
            let table = oracle.degree_table(depth);
            let d = a.d();
            let degrees = (0..d)
                .map(|i| (0..d).map(|j| table.degree(i, j)).collect())
                .collect();
            Some(OracleSection {
                depth,
                levels,
                degrees,
                common_predecessors: a.all_ktuples_have_common_predecessor(k),
            })
        }
        None => None,
    };

    let mut verdict = classification.verdict;
    let mut basis = classification.basis;
    let mut n_min_exact = classification.n_min_exact;
    if verdict == Verdict::Inconclusive {
        if let Some(level) = oracle.as_ref().and_then(|o| o.levels.iter().find(|l| l.in_p)) {
            verdict = Verdict::Fair { n_min: level.n };
            basis = Basis::OracleDirect;
            n_min_exact = true;
        }
    }

    Ok(AnalysisReport {
        matrix: a.clone(),
        k,
        max_row_sum: a.max_row_sum(),
        primitivity_exponent: exponent,
        has_positive_row: a.has_positive_row(),
        algorithm: AlgorithmSection {
            final_r: result.relations.to_string(),
            rounds: result
                .rounds
                .iter()
                .map(|t| RoundSummary {
                    round: t.round,
                    discoveries: t.pairs().into_iter().map(|(i, j)| [i + 1, j + 1]).collect(),
                })
                .collect(),
            stalled_at: result.stalled_at,
            all_positive: result.all_positive,
            max_height: result.max_height,
        },
        algorithm_verdict: classification.verdict,
        verdict,
        basis,
        n_min_exact,
        oracle,
    })
}

impl AnalysisReport {
    /// Machine format: pretty JSON with fields in declaration order and a
    /// trailing newline.
    pub fn to_machine(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_machine(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))
    }

    /// Human format; `trace` adds the round-by-round derivation.
    pub fn to_text(&self, trace: bool) -> String {
        let mut out = String::new();
        let exponent = self
            .primitivity_exponent
            .map_or_else(|| "none (not primitive)".to_string(), |p| p.to_string());
        out.push_str(&format!("matrix: [{}]\n", self.matrix));
        out.push_str(&format!("k: {}\n", self.k));
        out.push_str(&format!("s_A: {}\n", self.max_row_sum));
        out.push_str(&format!("primitivity exponent: {exponent}\n"));
        out.push_str(&format!(
            "positive row: {}\n",
            if self.has_positive_row { "yes" } else { "no" }
        ));
        if trace {
            let result = classify_fairness(&self.matrix, self.k)
                .expect("report matrix was analyzable")
                .result;
            out.push_str(&render_trace(&self.matrix, &result));
        } else {
            out.push_str(&format!(
                "final R: [{}] (stalled at round {})\n",
                self.algorithm.final_r, self.algorithm.stalled_at
            ));
        }
        out.push_str("note: diagonal entries of R are stored as 1; the relations i ⇒ i have height 0\n");
        if let Some(oracle) = &self.oracle {
            for level in &oracle.levels {
                out.push_str(&format!(
                    "oracle n={}: relations [{}], P({},{}) {}, P*({},{}) {}\n",
                    level.n,
                    level.relations,
                    self.k,
                    level.n,
                    level.in_p,
                    self.k,
                    level.n,
                    level.in_p_star
                ));
            }
            let degrees: Vec<String> = oracle
                .degrees
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|d| d.map_or_else(|| "-".to_string(), |d| d.to_string()))
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect();
            out.push_str(&format!("oracle degrees (≤ {}): [{}]\n", oracle.depth, degrees.join("|")));
            out.push_str(&format!(
                "every {}-tuple has a common predecessor: {}\n",
                self.k, oracle.common_predecessors
            ));
        }
        if self.algorithm_verdict != self.verdict {
            out.push_str(&format!("algorithm verdict: {}\n", self.algorithm_verdict));
        }
        let exact = match self.verdict {
            Verdict::Fair { .. } if !self.n_min_exact => ", n_min is an upper bound",
            _ => "",
        };
        out.push_str(&format!(
            "verdict: {} [{}{exact}]\n",
            self.verdict,
            self.basis.describe()
        ));
        out
    }
}
