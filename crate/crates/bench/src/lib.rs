//! Benchmarking for the optikit solvers: a corpus of classic nonlinear test
//! problems, a timing runner with a solution-quality gate, and Dolan–Moré
//! performance profiles.
//!
//! The pieces compose in a straight line: [`corpus::builtin_corpus`] supplies
//! [`corpus::TestProblem`]s, [`runner::run_benchmark`] times solvers on them
//! and emits one [`runner::BenchRecord`] per (solver, problem) pair, and
//! [`profile::performance_profile`] turns a table of records into fraction-
//! solved-within-factor-τ curves. [`io`] reads and writes the CSV formats the
//! `bench` binary speaks.

pub mod corpus;
pub mod io;
pub mod profile;
pub mod runner;

use profile::ProfileError;

/// Everything that can go wrong outside an individual solve. Individual
/// solver failures are data (they become non-converged records), not errors.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("unknown solver `{0}`; known solvers: bfgs, ncg, gn, lm, lm1, lm2, hybrid")]
    UnknownSolver(String),
    #[error("unknown problem `{0}`; use `all` or names from the builtin corpus")]
    UnknownProblem(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] optikit::ConfigError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}
