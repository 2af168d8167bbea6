use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse {text:?} as a rational: {reason}")]
    ParseRational { text: String, reason: String },

    #[error("row {row} is not a probability vector (sum {sum})")]
    NotStochastic { row: usize, sum: String },

    #[error("matrix dimensions do not match: {0}")]
    SizeMismatch(String),

    #[error("chain is reducible; no unique stationary distribution")]
    Reducible,

    #[error("chain is periodic with period {period}")]
    Periodic { period: usize },

    #[error("linear system is singular")]
    Singular,

    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Closed-form expressions are unavailable at this parameter point.
    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("bound search did not terminate within {cap} steps")]
    SearchCapExceeded { cap: u64 },

    #[error("no Parrondo window: mu(0) = {mu0} is not positive")]
    NoParrondoWindow { mu0: String },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}
