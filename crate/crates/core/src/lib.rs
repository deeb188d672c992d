//! Root-independent information transmission on regular trees.
//!
//! Given a 0/1 transition matrix `A` over the alphabet `{1..d}` and a tree
//! dimension `k`, labelings of the `k`-tree are constrained so that every
//! child label follows its parent's label according to `A`. The crate
//! decides whether the configurations reachable on row `n` are the same for
//! every root symbol (`A ∈ P(k, n)`), and whether they are all of `D^{L_n}`
//! (`A ∈ P*(k, n)`).
//!
//! * [`matrix`]: parsing and boolean analysis of `A` (powers, primitivity,
//!   positive rows, common predecessors).
//! * [`relation`]: round-based discovery of relations `i ⇒ j` and the
//!   resulting verdict.
//! * [`oracle`]: exact follower-set computations used as ground truth.
//! * [`harness`]: exhaustive sweeps comparing the two.
//! * [`report`]: analysis reports; [`fixtures`]: the built-in regression suite.

pub mod error;
pub mod exec;
pub mod fixtures;
pub mod harness;
pub mod matrix;
pub mod oracle;
pub mod relation;
pub mod report;
pub mod subset;

pub use error::{Error, Result};
pub use matrix::{SupportMatrix, TransitionMatrix};
pub use oracle::{Caps, FollowerOracle, Membership, OracleRelationSet, PossFamily, RowConfiguration};
pub use relation::{
    apply_moves, classify_fairness, round_step, run_algorithm, AlgorithmResult, Basis, Classification,
    Discovery, Move, RelationMatrix, RoundTrace, Verdict,
};
pub use subset::SymbolSubset;
