use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus too large: {0} does not fit below 2^31")]
    ModulusTooLarge(f64),

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("degree constraint infeasible: n={n}, dv={dv}, dc={dc}")]
    DegreeInfeasible { n: usize, dv: usize, dc: usize },

    #[error("resample budget exhausted after {0} rejected multigraphs")]
    ResampleExhausted(usize),

    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("argument outside (0,1): {name} = {value}")]
    EntropyDomain { name: &'static str, value: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("exponent non-negative: {0}")]
    ExponentNonNegative(f64),

    #[error("budget exceeded: need {needed}, budget {budget}")]
    BudgetExceeded { needed: f64, budget: u64 },

    #[error("singular basis")]
    SingularBasis,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for the budget guard on exponential enumerations.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
