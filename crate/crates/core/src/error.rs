use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid not increasing at index {index}")]
    GridNotIncreasing { index: usize },

    #[error("grid point {value} at index {index} lies outside [0, 1]")]
    GridOutOfRange { index: usize, value: f64 },

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("need at least {required} {what}, got {found}")]
    TooFew {
        what: &'static str,
        required: usize,
        found: usize,
    },

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("basis Gram matrix is singular (condition number {condition:e})")]
    SingularBasis { condition: f64 },

    #[error("N not multiple of d (N = {n_obs}, d = {period})")]
    NotMultiple { n_obs: usize, period: usize },

    #[error("invalid period {0}: must be at least 2")]
    InvalidPeriod(usize),

    #[error("frequency {theta} is not a fundamental frequency 2*pi*j/{n_obs}")]
    NotFundamental { theta: f64, n_obs: usize },

    #[error("lag {lag} out of range for a series of length {n_obs}")]
    LagOutOfRange { lag: i64, n_obs: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },

    #[error("matrix is zero or singular: {0}")]
    Singular(String),

    #[error("all rates are zero")]
    ZeroRates,

    #[error("level alpha = {0} outside (0, 1]")]
    InvalidAlpha(f64),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
