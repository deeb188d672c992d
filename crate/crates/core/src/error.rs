use thiserror::Error;

/// Errors produced by parsing and by the analysis entry points.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        /// 1-based row, 0 when the error is not tied to a row.
        row: usize,
        /// 1-based column, 0 when the error is not tied to a column.
        column: usize,
        message: String,
    },

    /// A symbol without followers; every labeling question over `Δ_n`, n ≥ 1,
    /// degenerates for such matrices.
    #[error("row {row} of the transition matrix is empty (symbol {row} has no allowed follower)")]
    ZeroRow { row: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("capacity exceeded: {cap} = {requested} is above the configured limit {limit}")]
    Capacity {
        cap: &'static str,
        limit: u64,
        requested: u64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(row: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            row,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn capacity(cap: &'static str, limit: u64, requested: u64) -> Self {
        Error::Capacity {
            cap,
            limit,
            requested,
        }
    }
}
