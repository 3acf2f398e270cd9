use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = 2 is not supported; the residue characteristic must be odd")]
    EvenPrime,
    #[error("{u} is a square modulo {p}; an unramified extension needs a non-residue")]
    SquareParameter { p: u64, u: u64 },
    #[error("invalid precision: {0}")]
    BadPrecision(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("operation needs an element of a quadratic extension ring")]
    NotExtension,
    #[error("no solution found: {0}")]
    NoSolution(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("pair is not generic: {0}")]
    NonGenericPair(String),
    #[error("gamma factor is not a monomial (an L-factor is present): {0}")]
    LFactorPresent(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("outside the closed-form regime: {0}")]
    OutOfRegime(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
