use thiserror::Error;

/// Errors raised by the checkers, solvers and builders in this crate.
///
/// Negative mathematical verdicts (an infeasible condition, a divergent
/// iteration) are not errors; they are reported through the result types of
/// the individual operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("invalid weight on arc {arc}: {value} (weights must be >= 1)")]
    InvalidWeight { arc: String, value: f64 },
    #[error("weight assignment has {got} entries, expected {expected}")]
    WeightArity { expected: usize, got: usize },
    #[error("vertex set is not out-closed: arc {tail} -> {head} leaves it")]
    NotOutClosed { tail: String, head: String },
    #[error("family is not downward-closed")]
    NotDownwardClosed,
    #[error("enumeration needs {outcomes} outcomes, cap is {cap}")]
    EnumerationCap { outcomes: u128, cap: u64 },
    #[error("invalid probability space: {0}")]
    InvalidSpace(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("missing witness for element {element}, event {event}")]
    MissingWitness { element: String, event: String },
    #[error("exact space and cut model are not attached to this instance")]
    MissingModel,
    #[error("cap of {cap} exhausted")]
    CapExhausted { cap: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
