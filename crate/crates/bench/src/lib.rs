//! Seeded experiment runner for the pacgreedy maximizers.
//!
//! `run` executes a config and emits long-format CSV rows, `compare` adds
//! paired statistics against the first listed maximizer, and `verify` runs
//! the library's property suites.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, MaximizerKind, OracleKind, Resolved, Scenario};
pub use experiment::{compare_rows, run_cells, run_rows, Cell, TrialOutcome};
pub use output::{write_csv, Row, HEADER};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Bad arguments or configuration; exit code 2.
    #[error("config error: {0}")]
    Config(String),
    /// Failure while running; exit code 1.
    #[error("{0}")]
    Runtime(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Runtime(_) => 1,
        }
    }
}

impl From<pacgreedy::Error> for BenchError {
    fn from(e: pacgreedy::Error) -> Self {
        BenchError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for BenchError {
    fn from(e: std::io::Error) -> Self {
        BenchError::Runtime(e.to_string())
    }
}
