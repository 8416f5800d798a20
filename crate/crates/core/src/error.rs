use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("operation on an empty noise box")]
    EmptyBox,
    #[error("noise symbol interval {0} is not inside [-1, 1]")]
    SymbolOutOfRange(String),
    #[error("malformed range [{lo}, {hi}]")]
    MalformedRange { lo: String, hi: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("variable sets differ: {0}")]
    VariableMismatch(String),
    #[error("{count} noise symbols exceed the cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("loop at {at} did not stabilize after {iterations} iterations")]
    Diverged { at: String, iterations: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
