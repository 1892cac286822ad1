//! Core library for coordinated sliding-motion planning (CSMP) on undirected
//! graphs.
//!
//! An instance places `k` robots on distinct vertices of a simple graph. Some
//! robots (*destination robots*) have to reach a prescribed target vertex, the
//! others (*free robots*, also called *blockers*) merely stand in the way. One
//! robot moves per time step, sliding along an arbitrarily long path that must
//! be free of every other robot; the makespan of a schedule is its number of
//! moves and must stay within a budget.
//!
//! The crate provides:
//!
//! * exact optimal solvers over canonical configurations ([`solver`]) plus an
//!   independent labeled-state reference search ([`oracle`]),
//! * schedule validation and schedule-structure analysis ([`schedule`]),
//! * safe reduction rules: path shortening, component pruning at bounded
//!   treedepth, and haven-based rerouting machinery ([`reductions`],
//!   [`havens`]),
//! * representations of schedules as rooted topological minors and a solver
//!   that enumerates candidate representations ([`representation`]),
//! * a kernelization pipeline for planar single-destination instances built
//!   on clean paths, roadmaps and host testing ([`planar`]),
//! * instance generators and independent oracles for them ([`generators`]),
//! * text-format parsing and serialization ([`instance`]).

pub mod generators;
pub mod graph;
pub mod havens;
pub mod instance;
pub mod oracle;
pub mod planar;
pub mod reductions;
pub mod representation;
pub mod schedule;
pub mod solver;

/// Crate-wide error type. Search-style operations report "no result within
/// the cap" through their own result enums; `Error` covers malformed input,
/// violated preconditions and exhausted work budgets.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// Text-format parse failure, pointing at the offending line (1-based).
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Structurally invalid argument (bad vertex id, duplicate start, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An explicit work or state cap was hit before the operation finished.
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    /// A documented precondition of the operation does not hold.
    #[error("premise unmet: {0}")]
    PremiseUnmet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
