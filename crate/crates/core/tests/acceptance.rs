//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use treefair::exec::Execution;
use treefair::harness::{
    enumerate_matrices, run_sweep, DiscrepancyKind, RowSumFilter, SweepMode, SweepReport, SweepSpec,
};
use treefair::oracle::{
    enumerate_labelings_naive, level_matrix_supports, oracle_membership, oracle_relations_at, poss_family, poss_root,
};
use treefair::{classify_fairness, run_algorithm, Caps, FollowerOracle, RowConfiguration, TransitionMatrix, Verdict};

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn m(text: &str) -> TransitionMatrix {
    TransitionMatrix::parse(text).unwrap()
}

fn pairs(rounds: &[(usize, usize)]) -> String {
    rounds
        .iter()
        .map(|(i, j)| format!("({},{})", i + 1, j + 1))
        .collect::<Vec<_>>()
        .join(",")
}

/// Termination-bound violations seen across every sweep in the suite.
#[derive(Default)]
struct Ledger {
    runs: usize,
    violations: usize,
    max_rounds: usize,
}

impl Ledger {
    fn record(&mut self, report: &SweepReport) {
        self.runs += report.entries.len();
        self.violations += report.summary.termination_violations;
        self.max_rounds = self.max_rounds.max(report.summary.max_discovery_rounds);
    }
}

fn golden_three_symbol() -> Outcome {
    let a = m("110|001|100");
    let result = run_algorithm(&a).unwrap();
    let got: Vec<String> = result.rounds.iter().map(|t| pairs(&t.pairs())).collect();
    let want = ["(3,1)", "(2,1),(2,3)", "(1,3)", "(1,2),(3,2)"];
    if got != want {
        return check(false, format!("rounds {got:?}"));
    }
    if result.stalled_at != 5 || result.relations.to_string() != "143|212|141" {
        return check(false, format!("R=[{}] stall={}", result.relations, result.stalled_at));
    }
    for k in 2..=4 {
        let c = classify_fairness(&a, k).unwrap();
        if c.verdict != (Verdict::Fair { n_min: 4 }) || !c.n_min_exact {
            return check(false, format!("k={k}: {}", c.verdict));
        }
    }
    pass("R=[143|212|141], stall 5, FAIR n_min=4 for k=2..4")
}

fn golden_four_symbol() -> Outcome {
    let a = m("1001|1000|0100|0010");
    let c = classify_fairness(&a, 2).unwrap();
    check(
        c.result.relations.to_string() == "1456|1156|2216|3331" && c.verdict == (Verdict::Fair { n_min: 6 }) && c.n_min_exact,
        format!("R=[{}] {}", c.result.relations, c.verdict),
    )
}

fn golden_stall() -> Outcome {
    let a = m("0111|1000|0100|0010");
    let c = classify_fairness(&a, 3).unwrap();
    let seventh = a.power_support(7).is_all_ones();
    let stalled = !c.result.all_positive;
    check(
        c.result.relations.to_string() == "1000|0100|1010|1201" && stalled && c.verdict == Verdict::NotFair && seventh,
        format!(
            "R=[{}] stall={} {} A^7 positive={seventh}",
            c.result.relations, c.result.stalled_at, c.verdict
        ),
    )
}

fn counterexample(caps: &Caps) -> Outcome {
    let a = m("0111|1011|1101|1110");
    let result = run_algorithm(&a).unwrap();
    let discovered = result.relations.known_count() - a.d();
    let n1 = oracle_relations_at(&a, 2, 1, caps).unwrap();
    let n2 = oracle_relations_at(&a, 2, 2, caps).unwrap();
    let diagonal_only = n1.pairs().iter().all(|(i, j)| i == j) && n1.len() == 4;
    let membership = oracle_membership(&a, 2, 2, caps).unwrap();
    let verdict = classify_fairness(&a, 2).unwrap().verdict;
    check(
        discovered == 0
            && diagonal_only
            && n2.len() == 16
            && membership.in_p
            && membership.in_p_star
            && verdict == Verdict::Inconclusive,
        format!(
            "discovered {discovered}, n=1 {} pairs, n=2 {} pairs, P*(2,2)={}, algorithm {verdict}",
            n1.len(),
            n2.len(),
            membership.in_p_star
        ),
    )
}

fn rotation(caps: &Caps) -> Outcome {
    let a = m("011|100|010");
    let c = classify_fairness(&a, 2).unwrap();
    let found: Vec<(usize, usize, u32)> = c.result.discoveries().collect();
    let mut oracle = FollowerOracle::new(&a, 2, caps).unwrap();
    let fair_at: Vec<u32> = (1..=6).filter(|&n| oracle.membership(n).in_p).collect();
    check(
        found == [(2, 0, 1)] && c.verdict == Verdict::NotFair && fair_at.is_empty(),
        format!("discoveries {found:?}, {}, oracle fair at {fair_at:?}", c.verdict),
    )
}

/// Direct comparison of discovered heights against oracle degrees, written
/// without the harness.
fn completeness(caps: &Caps, ledger: &mut Ledger) -> Outcome {
    let n_max = 6;
    let spec = SweepSpec::new(3, 2, n_max).with_row_sum(RowSumFilter::AtMost(2)).with_caps(*caps);
    let matrices = enumerate_matrices(&spec).unwrap();
    let mut mismatches = Vec::new();
    for a in &matrices {
        let result = run_algorithm(a).unwrap();
        let degrees = FollowerOracle::new(a, 2, caps).unwrap().degree_table(n_max);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                let height = result.relations.get(i, j);
                let degree = degrees.degree(i, j);
                let agree = match degree {
                    Some(g) => height == g,
                    None => height == 0 || height > n_max,
                };
                if !agree {
                    mismatches.push(format!("[{a}] {}⇒{}: height {height}, degree {degree:?}", i + 1, j + 1));
                }
            }
        }
    }
    let report = run_sweep(&spec, SweepMode::CrossValidate, Execution::Parallel).unwrap();
    ledger.record(&report);
    check(
        mismatches.is_empty() && report.is_clean() && report.summary.discrepancies == 0,
        format!(
            "{} matrices, {} direct mismatches, harness: {}",
            matrices.len(),
            mismatches.len(),
            report.summary.line()
        ),
    )
}

fn soundness(caps: &Caps, ledger: &mut Ledger) -> Outcome {
    let spec = SweepSpec::new(3, 1, 4).with_k_range(1, 3).with_caps(*caps);
    let report = run_sweep(&spec, SweepMode::CrossValidate, Execution::Parallel).unwrap();
    ledger.record(&report);
    let unsound = report
        .entries
        .iter()
        .flat_map(|e| &e.discrepancies)
        .filter(|x| x.kind == DiscrepancyKind::UnsoundDiscovery)
        .count();
    let checked: usize = report
        .entries
        .iter()
        .map(|e| e.discovery_rounds)
        .sum();
    check(
        unsound == 0 && report.is_clean(),
        format!("{} jobs, {checked} discovery rounds, {unsound} unsound; {}", report.entries.len(), report.summary.line()),
    )
}

fn propositions(caps: &Caps, ledger: &mut Ledger) -> Outcome {
    let spec = SweepSpec::new(1, 1, 3)
        .with_d_range(1, 3)
        .with_k_range(1, 2)
        .with_row_sum(RowSumFilter::Any)
        .with_caps(*caps);
    let report = run_sweep(&spec, SweepMode::Observations, Execution::Parallel).unwrap();
    ledger.record(&report);

    // Taken literally, fairness forcing a positive power fails on matrices
    // with a zero column; every such counterexample must have one.
    let matrices = enumerate_matrices(&spec).unwrap();
    let mut literal = 0;
    let mut unexplained = 0;
    for a in &matrices {
        for k in 1..=2 {
            for n in 1..=3 {
                let fair = oracle_membership(a, k, n, caps).unwrap().in_p;
                if fair && !a.power_support(n as usize).is_all_ones() {
                    literal += 1;
                    if !a.has_zero_column() {
                        unexplained += 1;
                    }
                }
            }
        }
    }
    check(
        report.is_clean() && unexplained == 0,
        format!(
            "{}; positive-power exceptions {literal}, all with a zero column: {}",
            report.summary.line(),
            unexplained == 0
        ),
    )
}

fn configurations(d: usize, k: usize, n: u32) -> impl Iterator<Item = RowConfiguration> {
    let width = k.pow(n);
    let count = (d as u64).pow(width as u32);
    (0..count).map(move |idx| RowConfiguration::from_index(d, width, idx))
}

fn self_consistency(caps: &Caps) -> Outcome {
    let k = 2;
    let mut matrices = enumerate_matrices(&SweepSpec::new(2, k, 3)).unwrap();
    matrices.extend(enumerate_matrices(&SweepSpec::new(3, k, 3).with_sample(200, 0x5eed)).unwrap());
    let jobs: Vec<TransitionMatrix> = matrices.clone();
    let results = Execution::Parallel.map(jobs, |a| {
        let mut mismatches = 0usize;
        let mut cells = 0usize;
        for n in 1..=3u32 {
            let supports = level_matrix_supports(&a, k, n, caps).unwrap();
            let naive: Vec<BTreeSet<RowConfiguration>> = (0..a.d())
                .map(|i| enumerate_labelings_naive(&a, k, n, i, caps).unwrap())
                .collect();
            let mut seen = BTreeSet::new();
            for (column, xi) in configurations(a.d(), k, n).enumerate() {
                let poss = poss_root(&a, k, n, &xi).unwrap();
                seen.insert(poss);
                for (i, reached) in naive.iter().enumerate() {
                    cells += 1;
                    let by_poss = poss.contains(i);
                    if by_poss != reached.contains(&xi) || by_poss != supports.entry(i, column) {
                        mismatches += 1;
                    }
                }
            }
            let family = poss_family(&a, k, n, caps).unwrap();
            let listed: BTreeSet<_> = family.sets.iter().copied().collect();
            if listed != seen {
                mismatches += 1;
            }
            let fair = naive.windows(2).all(|w| w[0] == w[1]);
            let total = (a.d() as u64).pow(k.pow(n) as u32) as usize;
            let complete = fair && naive[0].len() == total;
            let nonempty = a.rows().iter().all(|r| !r.is_empty());
            if nonempty {
                let membership = oracle_membership(&a, k, n, caps).unwrap();
                if membership.in_p != fair || membership.in_p_star != complete {
                    mismatches += 1;
                }
            }
        }
        (cells, mismatches)
    });
    let cells: usize = results.iter().map(|r| r.0).sum();
    let mismatches: usize = results.iter().map(|r| r.1).sum();
    check(
        mismatches == 0,
        format!("{} matrices, {cells} cells, {mismatches} mismatches", matrices.len()),
    )
}

fn termination(ledger: &mut Ledger) -> Outcome {
    // Algorithm alone over every 4×4 matrix with nonempty rows.
    let spec = SweepSpec::new(4, 1, 1);
    let matrices = enumerate_matrices(&spec).unwrap();
    let rounds = Execution::Parallel.map(matrices, |a| run_algorithm(&a).unwrap().discovery_rounds());
    let over = rounds.iter().filter(|&&r| r > 16).count();
    let max = rounds.iter().copied().max().unwrap_or(0);
    check(
        ledger.violations == 0 && over == 0,
        format!(
            "{} sweep jobs (max {} rounds), {} violations; {} 4×4 runs (max {max} rounds), {over} over d²",
            ledger.runs,
            ledger.max_rounds,
            ledger.violations,
            rounds.len()
        ),
    )
}

fn main() -> ExitCode {
    let caps = Caps::default();
    let mut ledger = Ledger::default();
    let mut failed = 0;

    let mut run = |n: usize, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let ok = outcome.ok && elapsed <= limit;
        if !ok {
            failed += 1;
        }
        println!(
            "criterion {n:>2} {} {name} ({:.2?}, limit {:?}): {}",
            if ok { "PASS" } else { "FAIL" },
            elapsed,
            limit,
            outcome.detail
        );
    };

    let s = Duration::from_secs;
    run(1, "three-symbol golden trace", s(1), &mut golden_three_symbol);
    run(2, "four-symbol golden trace", s(1), &mut golden_four_symbol);
    run(3, "four-symbol stall", s(1), &mut golden_stall);
    run(4, "dimension below row sum", s(1), &mut || counterexample(&caps));
    run(5, "rotation never fair", s(5), &mut || rotation(&caps));
    run(6, "completeness sweep", s(120), &mut || completeness(&caps, &mut ledger));
    run(7, "soundness sweep", s(300), &mut || soundness(&caps, &mut ledger));
    run(8, "structural propositions", s(300), &mut || propositions(&caps, &mut ledger));
    run(9, "oracle self-consistency", s(120), &mut || self_consistency(&caps));
    run(10, "termination bound", s(300), &mut || termination(&mut ledger));

    if failed == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criteria failed");
        ExitCode::FAILURE
    }
}
