use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid chirp profile: {0}")]
    InvalidProfile(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("time {t} outside the solution window [{start}, {end}]")]
    OutOfWindow { t: f64, start: f64, end: f64 },

    #[error("outside the asymptotic regime: {0}")]
    Regime(String),

    #[error("quadrature did not converge (achieved error estimate {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error(
        "truncation leakage {leakage:e} exceeds {limit:e} with {truncation} levels; \
         rerun with a larger basis (try {suggested})"
    )]
    TruncationLeakage {
        leakage: f64,
        limit: f64,
        truncation: usize,
        suggested: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
