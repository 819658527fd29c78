use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("dimension {0} is not prime")]
    NotPrime(u32),
    #[error("dimension 2 is not supported; the construction needs an odd prime")]
    IsTwo,
    #[error("dimension {0} is outside the supported range 3..=97")]
    OutOfRange(u32),
    #[error("division by zero in Z_d")]
    ZeroDivision,
    #[error("moduli differ: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("scales d^-{left}/2 and d^-{right}/2 cannot be aligned in Z[w_d] for d = {d}")]
    ScaleParity { d: u32, left: i32, right: i32 },
    #[error("value is not a rational number of the form n/d^k")]
    NotRational,
    #[error("coefficient overflow in cyclotomic arithmetic")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operation is undefined for the computational basis label")]
    ComputationalBasis,
    #[error("points ({0}) lie in the same column and share no line")]
    SameColumn(String),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(String),
    #[error("state cannot be renormalized exactly: {0}")]
    Renormalize(String),
    #[error("deduction rule {rule} needs a line-state preparation")]
    IncompatibleRule { rule: &'static str },
    #[error("at least one trial is required")]
    NoTrials,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}
