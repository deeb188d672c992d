//! Exhaustive and sampled sweeps that compare the relation engine with the
//! follower-set oracle and check the structural facts about `P(k, n)`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::matrix::TransitionMatrix;
use crate::oracle::{Caps, FollowerOracle};
use crate::relation::{classify_fairness, Verdict};

/// Largest alphabet enumerated exhaustively (`2^16` matrices).
pub const MAX_EXHAUSTIVE_D: usize = 4;

/// Largest alphabet accepted for sampling (`d² ≤ 64` bits of encoding).
pub const MAX_SAMPLED_D: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowSumFilter {
    Any,
    /// `s_A ≤ k`, evaluated per job.
    AtMostK,
    AtMost(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFilter {
    pub nonempty_rows: bool,
    pub primitive_only: bool,
    pub row_sum: RowSumFilter,
}

impl Default for MatrixFilter {
    fn default() -> Self {
        MatrixFilter {
            nonempty_rows: true,
            primitive_only: false,
            row_sum: RowSumFilter::Any,
        }
    }
}

impl MatrixFilter {
    fn accepts(&self, a: &TransitionMatrix, k_bound: usize) -> bool {
        if self.nonempty_rows && a.has_zero_row() {
            return false;
        }
        let row_sum_ok = match self.row_sum {
            RowSumFilter::Any => true,
            RowSumFilter::AtMostK => a.max_row_sum() <= k_bound,
            RowSumFilter::AtMost(s) => a.max_row_sum() <= s,
        };
        row_sum_ok && (!self.primitive_only || a.is_primitive())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub count: usize,
    pub seed: u64,
}

/// Which matrices, dimensions and depths a sweep covers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub d_min: usize,
    pub d_max: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub n_max: u32,
    pub filter: MatrixFilter,
    /// Draw this many distinct matrices per alphabet size instead of
    /// enumerating all of them.
    pub sample: Option<Sampling>,
    pub caps: Caps,
}

impl SweepSpec {
    pub fn new(d: usize, k: usize, n_max: u32) -> Self {
        SweepSpec {
            d_min: d,
            d_max: d,
            k_min: k,
            k_max: k,
            n_max,
            filter: MatrixFilter::default(),
            sample: None,
            caps: Caps::default(),
        }
    }

    pub fn with_d_range(mut self, d_min: usize, d_max: usize) -> Self {
        self.d_min = d_min;
        self.d_max = d_max;
        self
    }

    pub fn with_k_range(mut self, k_min: usize, k_max: usize) -> Self {
        self.k_min = k_min;
        self.k_max = k_max;
        self
    }

    pub fn with_filter(mut self, filter: MatrixFilter) -> Self {
        self.filter = filter;
        self
    }

    pub fn with_row_sum(mut self, row_sum: RowSumFilter) -> Self {
        self.filter.row_sum = row_sum;
        self
    }

    pub fn with_sample(mut self, count: usize, seed: u64) -> Self {
        self.sample = Some(Sampling { count, seed });
        self
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_min == 0 || self.d_min > self.d_max {
            return Err(Error::Precondition(format!(
                "alphabet range {}..={} is empty",
                self.d_min, self.d_max
            )));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::Precondition(format!(
                "tree dimension range {}..={} is empty",
                self.k_min, self.k_max
            )));
        }
        if self.n_max == 0 {
            return Err(Error::Precondition("n_max must be at least 1".into()));
        }
        self.caps.check_depth(self.n_max)?;
        if self.k_max > self.caps.max_k {
            return Err(Error::capacity("k", self.caps.max_k as u64, self.k_max as u64));
        }
        if self.d_max > self.caps.max_d {
            return Err(Error::capacity("d", self.caps.max_d as u64, self.d_max as u64));
        }
        Ok(())
    }

    fn k_values(&self) -> std::ops::RangeInclusive<usize> {
        self.k_min..=self.k_max
    }
}

/// All matrices of the sweep in deterministic order: by `d`, then by the
/// row-major bit pattern read as a binary number.
pub fn enumerate_matrices(spec: &SweepSpec) -> Result<Vec<TransitionMatrix>> {
    spec.validate()?;
    let mut out = Vec::new();
    for d in spec.d_min..=spec.d_max {
        let bits = (d * d) as u32;
        match spec.sample {
            None => {
                if d > MAX_EXHAUSTIVE_D {
                    return Err(Error::capacity("exhaustive d", MAX_EXHAUSTIVE_D as u64, d as u64));
                }
                for code in 0..(1u64 << bits) {
                    let a = TransitionMatrix::from_code(d, code)?;
                    if spec.filter.accepts(&a, spec.k_max) {
                        out.push(a);
                    }
                }
            }
            Some(sampling) => {
                if d > MAX_SAMPLED_D {
                    return Err(Error::capacity("sampled d", MAX_SAMPLED_D as u64, d as u64));
                }
                out.extend(sample_matrices(d, sampling, &spec.filter, spec.k_max)?);
            }
        }
    }
    Ok(out)
}

fn sample_matrices(
    d: usize,
    sampling: Sampling,
    filter: &MatrixFilter,
    k_bound: usize,
) -> Result<Vec<TransitionMatrix>> {
    let bits = (d * d) as u32;
    let mut rng = ChaCha8Rng::seed_from_u64(sampling.seed ^ (d as u64).rotate_left(32));
    let mut codes = BTreeSet::new();
    let max_attempts = sampling.count.saturating_mul(1000).max(10_000);
    for _ in 0..max_attempts {
        if codes.len() == sampling.count {
            break;
        }
        let code = if bits == 64 {
            rng.gen::<u64>()
        } else {
            rng.gen_range(0..(1u64 << bits))
        };
        if codes.contains(&code) {
            continue;
        }
        let a = TransitionMatrix::from_code(d, code)?;
        if filter.accepts(&a, k_bound) {
            codes.insert(code);
        }
    }
    codes
        .into_iter()
        .map(|code| TransitionMatrix::from_code(d, code))
        .collect()
}

/// Which rule a [`DiscrepancyKind::PropositionViolation`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// `P*(k, n) ⊆ P(k, n)`.
    CompleteImpliesFair,
    /// `A ∈ P(k, n)` forces `A^n > 0` (for matrices without zero columns).
    FairImpliesPositivePower,
    /// `P(k+1, n) ⊆ P(k, n)`.
    MonotoneInK,
    /// `P(k, n) ⊆ P(k, n+1)`.
    MonotoneInN,
    /// `A^n > 0` with a positive row gives `A ∈ P(k, n+1)`.
    PositiveRowSufficient,
    /// For `d = k + 1` primitive: `A ∈ P*(k)` iff `A` has a positive row.
    PositiveRowCharacterization,
    /// `P*(k, n) = P(k, n) ∩ {every k-tuple has a common predecessor}`.
    CommonPredecessor,
    /// `[011|100|010]` is in no `P(2, n)`.
    RotationNeverFair,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiscrepancyKind {
    /// A relation of degree `≤ n_max` that was never discovered.
    MissingRelation,
    /// A relation discovered after its degree.
    WrongHeight,
    /// A discovery that does not hold on trees of its height.
    UnsoundDiscovery,
    VerdictMismatch,
    PropositionViolation,
    /// More discovery rounds than `d²`.
    TerminationBound,
}

/// How a discrepancy was produced; enough to rerun the check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum Check {
    CrossValidation { n_max: u32 },
    Observations { n_max: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub matrix: TransitionMatrix,
    pub k: usize,
    #[serde(flatten)]
    pub check: Check,
    pub kind: DiscrepancyKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rule: Option<Rule>,
    /// 1-based `(i, j)` when the discrepancy concerns one relation.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pair: Option<[usize; 2]>,
    /// `false` for completeness findings on jobs with `k < s_A`, where
    /// discovery is not expected to be complete.
    pub asserted: bool,
    pub details: String,
}

impl Discrepancy {
    /// Reruns the originating check and reports whether this discrepancy is
    /// produced again.
    pub fn replay(&self, caps: &Caps) -> Result<bool> {
        let again = match self.check {
            Check::CrossValidation { n_max } => cross_validate(&self.matrix, self.k, n_max, caps)?,
            Check::Observations { n_max } => observations_for(&self.matrix, self.k, n_max, caps)?,
        };
        Ok(again.contains(self))
    }
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] k={} {:?}", self.matrix, self.k, self.kind)?;
        if let Some(rule) = self.rule {
            write!(f, " {rule:?}")?;
        }
        if let Some([i, j]) = self.pair {
            write!(f, " {i} ⇒ {j}")?;
        }
        if !self.asserted {
            f.write_str(" (not asserted)")?;
        }
        write!(f, ": {}", self.details)
    }
}

/// Result of comparing the algorithm with the oracle for one `(A, k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub verdict: Verdict,
    pub discovery_rounds: usize,
    pub stalled_at: u32,
    /// Undiscovered pairs whose degree exceeds `n_max` (or is infinite).
    pub unchecked: usize,
    /// Least `n ≤ n_max` with `A ∈ P(k, n)` according to the oracle.
    pub oracle_fair_at: Option<u32>,
    pub discrepancies: Vec<Discrepancy>,
}

/// Soundness (every `k`) and, when `k ≥ s_A`, completeness and exact
/// heights of the discovered relations, checked against the oracle up to
/// depth `n_max`.
pub fn cross_validate(a: &TransitionMatrix, k: usize, n_max: u32, caps: &Caps) -> Result<Vec<Discrepancy>> {
    Ok(cross_validate_detailed(a, k, n_max, caps)?.discrepancies)
}

pub fn cross_validate_detailed(
    a: &TransitionMatrix,
    k: usize,
    n_max: u32,
    caps: &Caps,
) -> Result<CrossValidation> {
    let classification = classify_fairness(a, k)?;
    let result = &classification.result;
    let d = a.d();
    let complete = k >= a.max_row_sum();
    let mut oracle = FollowerOracle::new(a, k, caps)?;
    let check = Check::CrossValidation { n_max };
    let mut found = Vec::new();
    let mut report = |kind, pair: Option<(usize, usize)>, asserted, details: String| {
        found.push(Discrepancy {
            matrix: a.clone(),
            k,
            check,
            kind,
            rule: None,
            pair: pair.map(|(i, j)| [i + 1, j + 1]),
            asserted,
            details,
        })
    };

    if result.discovery_rounds() > d * d || result.stalled_at as usize > d * d + 1 {
        report(
            DiscrepancyKind::TerminationBound,
            None,
            true,
            format!(
                "{} discovery rounds, stalled at round {}, bound d² = {}",
                result.discovery_rounds(),
                result.stalled_at,
                d * d
            ),
        );
    }

    for (i, j, height) in result.discoveries() {
        if !oracle.family(height).relates(i, j) {
            report(
                DiscrepancyKind::UnsoundDiscovery,
                Some((i, j)),
                true,
                format!("discovered at round {height} but F_{height}({}) ⊄ F_{height}({})", i + 1, j + 1),
            );
        }
    }

    let table = oracle.degree_table(n_max);
    let mut unchecked = 0;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let height = result.relations.get(i, j);
            match (table.degree(i, j), height) {
                (Some(degree), 0) => report(
                    DiscrepancyKind::MissingRelation,
                    Some((i, j)),
                    complete,
                    format!("relation of degree {degree} never discovered"),
                ),
                (Some(degree), h) if h > degree => report(
                    DiscrepancyKind::WrongHeight,
                    Some((i, j)),
                    complete,
                    format!("height {h} but degree {degree}"),
                ),
                (None, 0) => unchecked += 1,
                _ => {}
            }
        }
    }

    let oracle_fair_at = (1..=n_max).find(|&n| oracle.membership(n).in_p);
    match classification.verdict {
        Verdict::Fair { n_min } => {
            if !oracle.membership(n_min).in_p {
                report(
                    DiscrepancyKind::VerdictMismatch,
                    None,
                    true,
                    format!("verdict FAIR from n = {n_min} but the oracle finds A ∉ P({k}, {n_min})"),
                );
            }
            if classification.n_min_exact && n_min >= 2 && oracle.membership(n_min - 1).in_p {
                report(
                    DiscrepancyKind::VerdictMismatch,
                    None,
                    true,
                    format!("n_min = {n_min} is not minimal: the oracle finds A ∈ P({k}, {})", n_min - 1),
                );
            }
        }
        Verdict::NotFair => {
            if let Some(n) = oracle_fair_at {
                report(
                    DiscrepancyKind::VerdictMismatch,
                    None,
                    true,
                    format!("verdict NOT_FAIR but the oracle finds A ∈ P({k}, {n})"),
                );
            }
        }
        Verdict::Inconclusive => {}
    }

    Ok(CrossValidation {
        verdict: classification.verdict,
        discovery_rounds: result.discovery_rounds(),
        stalled_at: result.stalled_at,
        unchecked,
        oracle_fair_at,
        discrepancies: found,
    })
}

/// The matrix that is never fair on the binary tree.
pub fn rotation_matrix() -> TransitionMatrix {
    TransitionMatrix::parse("011|100|010").expect("literal matrix")
}

/// Checks the structural rules about `P(k, n)` and `P*(k, n)` for one matrix,
/// `1 ≤ n ≤ n_max`.
pub fn observations_for(a: &TransitionMatrix, k: usize, n_max: u32, caps: &Caps) -> Result<Vec<Discrepancy>> {
    a.ensure_nonempty_rows()?;
    let check = Check::Observations { n_max };
    let mut found = Vec::new();
    let mut violation = |rule: Rule, details: String| {
        found.push(Discrepancy {
            matrix: a.clone(),
            k,
            check,
            kind: DiscrepancyKind::PropositionViolation,
            rule: Some(rule),
            pair: None,
            asserted: true,
            details,
        })
    };

    let mut oracle = FollowerOracle::new(a, k, caps)?;
    // k + 1 may be above the cap; the rule is then skipped.
    let mut wider = FollowerOracle::new(a, k + 1, caps).ok();
    let no_zero_column = !a.has_zero_column();
    let positive_row = a.has_positive_row();
    let covered = a.all_ktuples_have_common_predecessor(k);

    for n in 1..=n_max {
        let here = oracle.membership(n);
        let next = oracle.membership(n + 1);
        let power_full = a.power_support(n as usize).is_all_ones();
        if here.in_p_star && !here.in_p {
            violation(Rule::CompleteImpliesFair, format!("A ∈ P*({k}, {n}) but A ∉ P({k}, {n})"));
        }
        if here.in_p && no_zero_column && !power_full {
            violation(
                Rule::FairImpliesPositivePower,
                format!("A ∈ P({k}, {n}) but A^{n} is not positive"),
            );
        }
        if let Some(wider) = wider.as_mut() {
            if wider.membership(n).in_p && !here.in_p {
                violation(Rule::MonotoneInK, format!("A ∈ P({}, {n}) but A ∉ P({k}, {n})", k + 1));
            }
        }
        if here.in_p && !next.in_p {
            violation(Rule::MonotoneInN, format!("A ∈ P({k}, {n}) but A ∉ P({k}, {})", n + 1));
        }
        if power_full && positive_row && !next.in_p {
            violation(
                Rule::PositiveRowSufficient,
                format!("A^{n} > 0 with a positive row but A ∉ P({k}, {})", n + 1),
            );
        }
        if here.in_p_star != (here.in_p && covered) {
            violation(
                Rule::CommonPredecessor,
                format!(
                    "P*({k}, {n}) = {} but P({k}, {n}) = {} and common predecessors = {covered}",
                    here.in_p_star, here.in_p
                ),
            );
        }
    }

    if a.d() == k + 1 {
        if let Some(p) = a.primitivity_exponent() {
            let limit = p as u32 + 2;
            let complete_at = (1..=limit).find(|&n| oracle.membership(n).in_p_star);
            if complete_at.is_some() != positive_row {
                violation(
                    Rule::PositiveRowCharacterization,
                    format!(
                        "d = k + 1, exponent {p}: positive row = {positive_row}, P*({k}, n) for some n ≤ {limit} = {}",
                        complete_at.is_some()
                    ),
                );
            }
            if positive_row && !oracle.membership(p as u32 + 1).in_p_star {
                violation(
                    Rule::PositiveRowCharacterization,
                    format!("positive row and exponent {p} but A ∉ P*({k}, {})", p + 1),
                );
            }
        }
    }

    if k == 2 && *a == rotation_matrix() {
        let verdict = classify_fairness(a, k)?.verdict;
        if verdict != Verdict::NotFair {
            violation(Rule::RotationNeverFair, format!("algorithm verdict is {verdict}"));
        }
        if let Some(n) = (1..=n_max.max(6)).find(|&n| oracle.membership(n).in_p) {
            violation(Rule::RotationNeverFair, format!("oracle finds A ∈ P(2, {n})"));
        }
    }

    Ok(found)
}

/// Runs [`observations_for`] over every matrix and dimension of the sweep.
pub fn verify_observations(spec: &SweepSpec) -> Result<Vec<Discrepancy>> {
    let report = run_sweep(spec, SweepMode::Observations, Execution::default())?;
    Ok(report
        .entries
        .into_iter()
        .flat_map(|e| e.discrepancies)
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    CrossValidate,
    Observations,
    Both,
}

/// One `(A, k)` job of a sweep.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub matrix: TransitionMatrix,
    pub k: usize,
    pub verdict: Verdict,
    pub discovery_rounds: usize,
    pub stalled_at: u32,
    pub unchecked: usize,
    pub oracle_fair_at: Option<u32>,
    pub discrepancies: Vec<Discrepancy>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub matrices: usize,
    pub jobs: usize,
    pub fair: usize,
    pub not_fair: usize,
    pub inconclusive: usize,
    /// Inconclusive jobs the oracle finds fair at some `n ≤ n_max`.
    pub inconclusive_but_oracle_fair: usize,
    pub discrepancies: usize,
    pub unasserted: usize,
    pub unchecked_relations: usize,
    pub max_discovery_rounds: usize,
    /// Jobs whose discovery rounds exceed `d²`.
    pub termination_violations: usize,
}

impl SweepSummary {
    pub fn line(&self) -> String {
        format!(
            "summary: {} matrices, {} jobs, {} fair, {} not fair, {} inconclusive ({} oracle-fair), \
             {} discrepancies, {} not asserted, {} unchecked relations, max {} discovery rounds",
            self.matrices,
            self.jobs,
            self.fair,
            self.not_fair,
            self.inconclusive,
            self.inconclusive_but_oracle_fair,
            self.discrepancies,
            self.unasserted,
            self.unchecked_relations,
            self.max_discovery_rounds
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub spec: SweepSpec,
    pub mode: SweepMode,
    pub entries: Vec<SweepEntry>,
    pub summary: SweepSummary,
}

impl SweepReport {
    /// Asserted discrepancies across all entries.
    pub fn failures(&self) -> impl Iterator<Item = &Discrepancy> {
        self.entries
            .iter()
            .flat_map(|e| e.discrepancies.iter())
            .filter(|x| x.asserted)
    }

    pub fn is_clean(&self) -> bool {
        self.summary.discrepancies == 0
    }
}

fn run_job(a: &TransitionMatrix, k: usize, spec: &SweepSpec, mode: SweepMode) -> Result<SweepEntry> {
    let cv = cross_validate_detailed(a, k, spec.n_max, &spec.caps)?;
    let mut discrepancies = Vec::new();
    if mode != SweepMode::Observations {
        discrepancies.extend(cv.discrepancies);
    }
    if mode != SweepMode::CrossValidate {
        discrepancies.extend(observations_for(a, k, spec.n_max, &spec.caps)?);
    }
    Ok(SweepEntry {
        matrix: a.clone(),
        k,
        verdict: cv.verdict,
        discovery_rounds: cv.discovery_rounds,
        stalled_at: cv.stalled_at,
        unchecked: cv.unchecked,
        oracle_fair_at: cv.oracle_fair_at,
        discrepancies,
    })
}

/// Runs every `(A, k)` job of the sweep. Jobs are independent; results are
/// returned in enumeration order whatever the execution mode.
pub fn run_sweep(spec: &SweepSpec, mode: SweepMode, execution: Execution) -> Result<SweepReport> {
    let matrices = enumerate_matrices(spec)?;
    let jobs: Vec<(&TransitionMatrix, usize)> = matrices
        .iter()
        .filter(|a| !a.has_zero_row())
        .flat_map(|a| spec.k_values().map(move |k| (a, k)))
        .filter(|(a, k)| spec.filter.row_sum != RowSumFilter::AtMostK || a.max_row_sum() <= *k)
        .collect();
    let entries = execution
        .map(jobs, |(a, k)| run_job(a, k, spec, mode))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut summary = SweepSummary {
        matrices: matrices.len(),
        jobs: entries.len(),
        ..SweepSummary::default()
    };
    for e in &entries {
        match e.verdict {
            Verdict::Fair { .. } => summary.fair += 1,
            Verdict::NotFair => summary.not_fair += 1,
            Verdict::Inconclusive => {
                summary.inconclusive += 1;
                if e.oracle_fair_at.is_some() {
                    summary.inconclusive_but_oracle_fair += 1;
                }
            }
        }
        summary.discrepancies += e.discrepancies.iter().filter(|x| x.asserted).count();
        summary.unasserted += e.discrepancies.iter().filter(|x| !x.asserted).count();
        summary.unchecked_relations += e.unchecked;
        summary.max_discovery_rounds = summary.max_discovery_rounds.max(e.discovery_rounds);
        let d = e.matrix.d();
        if e.discovery_rounds > d * d {
            summary.termination_violations += 1;
        }
    }
    Ok(SweepReport {
        spec: spec.clone(),
        mode,
        entries,
        summary,
    })
}
