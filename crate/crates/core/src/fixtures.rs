//! Built-in regression fixtures with their expected values.

use crate::matrix::TransitionMatrix;
use crate::oracle::{level_matrix_supports, Caps, FollowerOracle};
use crate::relation::{classify_fairness, run_algorithm};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureOutcome {
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

fn matrix(text: &str) -> TransitionMatrix {
    TransitionMatrix::parse(text).expect("fixture matrices are literals")
}

fn outcome(name: &'static str, expected: impl Into<String>, actual: impl Into<String>) -> FixtureOutcome {
    FixtureOutcome {
        name,
        expected: expected.into(),
        actual: actual.into(),
    }
}

fn describe_run(text: &str, k: usize) -> String {
    let a = matrix(text);
    match classify_fairness(&a, k) {
        Ok(c) => format!(
            "R=[{}] stall={} {}",
            c.result.relations, c.result.stalled_at, c.verdict
        ),
        Err(e) => format!("error: {e}"),
    }
}

fn rounds(text: &str) -> String {
    match run_algorithm(&matrix(text)) {
        Ok(result) => result
            .rounds
            .iter()
            .map(|t| {
                let pairs: Vec<String> = t
                    .pairs()
                    .iter()
                    .map(|(i, j)| format!("{}⇒{}", i + 1, j + 1))
                    .collect();
                format!("{}:{{{}}}", t.round, pairs.join(","))
            })
            .collect::<Vec<_>>()
            .join(" "),
        Err(e) => format!("error: {e}"),
    }
}

fn oracle_summary(text: &str, k: usize, depths: &[u32]) -> String {
    let a = matrix(text);
    let mut oracle = match FollowerOracle::new(&a, k, &Caps::default()) {
        Ok(o) => o,
        Err(e) => return format!("error: {e}"),
    };
    depths
        .iter()
        .map(|&n| {
            let m = oracle.membership(n);
            format!(
                "n={n}: {} relations, P={} P*={}",
                oracle.relations_at(n).len(),
                m.in_p,
                m.in_p_star
            )
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Runs every fixture.
pub fn run_fixtures() -> Vec<FixtureOutcome> {
    let mut out = Vec::new();

    out.push(outcome(
        "three-symbol discovery rounds",
        "1:{3⇒1} 2:{2⇒1,2⇒3} 3:{1⇒3} 4:{1⇒2,3⇒2}",
        rounds("110|001|100"),
    ));
    out.push(outcome(
        "three-symbol final R, k=2",
        "R=[143|212|141] stall=5 FAIR (n_min = 4)",
        describe_run("110|001|100", 2),
    ));
    out.push(outcome(
        "four-symbol final R, k=2",
        "R=[1456|1156|2216|3331] stall=7 FAIR (n_min = 6)",
        describe_run("1001|1000|0100|0010", 2),
    ));
    out.push(outcome(
        "four-symbol stall, k=3",
        "R=[1000|0100|1010|1201] stall=3 NOT_FAIR",
        describe_run("0111|1000|0100|0010", 3),
    ));
    out.push(outcome(
        "four-symbol stall, seventh power positive",
        "true",
        matrix("0111|1000|0100|0010")
            .power_support(7)
            .is_all_ones()
            .to_string(),
    ));
    out.push(outcome(
        "dimension below row sum, k=2",
        "R=[1000|0100|0010|0001] stall=1 INCONCLUSIVE",
        describe_run("0111|1011|1101|1110", 2),
    ));
    out.push(outcome(
        "dimension below row sum, oracle k=2",
        "n=1: 4 relations, P=false P*=false; n=2: 16 relations, P=true P*=true",
        oracle_summary("0111|1011|1101|1110", 2, &[1, 2]),
    ));
    out.push(outcome(
        "rotation never fair on the binary tree",
        "R=[100|010|101] stall=2 NOT_FAIR",
        describe_run("011|100|010", 2),
    ));
    out.push(outcome(
        "rotation oracle, n=1..6",
        (1..=6)
            .map(|n| format!("n={n}: P=false"))
            .collect::<Vec<_>>()
            .join("; "),
        {
            let a = matrix("011|100|010");
            let mut oracle = FollowerOracle::new(&a, 2, &Caps::default()).expect("small matrix");
            (1..=6)
                .map(|n| format!("n={n}: P={}", oracle.membership(n).in_p))
                .collect::<Vec<_>>()
                .join("; ")
        },
    ));
    out.push(outcome(
        "two-symbol level product, n=1",
        "1111|1000",
        match level_matrix_supports(&matrix("11|10"), 2, 1, &Caps::default()) {
            Ok(level) => format!("{}|{}", level.row_string(0), level.row_string(1)),
            Err(e) => format!("error: {e}"),
        },
    ));
    out
}

/// `true` when every fixture passed.
pub fn all_pass(outcomes: &[FixtureOutcome]) -> bool {
    outcomes.iter().all(FixtureOutcome::passed)
}
