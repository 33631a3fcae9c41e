use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown operator `{0}`")]
    UnknownOp(String),
    #[error("ill-typed term: {0}")]
    IllTyped(String),
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("invalid equation: {0}")]
    Equation(String),
    #[error("sort violation: {0}")]
    SortViolation(String),
    #[error("invalid position {0:?}")]
    InvalidPosition(Vec<usize>),
    #[error("unsupported axioms: {0}")]
    UnsupportedAxioms(String),
    #[error("solver limit exceeded: {0}")]
    SolverLimit(String),
    #[error("non-orientable equation: {0}")]
    NonOrientable(String),
    #[error("normalization did not terminate within {0} steps")]
    NonTermination(u64),
    #[error("specialization did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("term is not closed: {0}")]
    NotClosed(String),
    #[error("invalid specialization call: {0}")]
    BadCall(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
}

pub type Result<T> = std::result::Result<T, Error>;
