use thiserror::Error;

/// Errors raised by the numerical routines.
///
/// Numeric payloads are stored as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("times must be strictly increasing: entry {index} ({time}) does not exceed its predecessor")]
    NotIncreasing { index: usize, time: f64 },

    #[error("record {index} has zero precision; drop zero-precision records before building the signal covariance")]
    ZeroPrecision { index: usize },

    #[error("record {index} has no realized signal value")]
    MissingSignalValue { index: usize },

    #[error("index {index} out of range for {len} records")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("signal covariance is singular or ill-conditioned (condition estimate {condition:e}) at times {times:?}")]
    Singular { times: Vec<f64>, condition: f64 },

    #[error("OU mean reversion {alpha} is not the stationary choice sigma^2/(2 sigma0^2) = {stationary}")]
    NonStationary { alpha: f64, stationary: f64 },

    #[error("the {0} process is not Gauss-Markov")]
    NotMarkov(&'static str),

    #[error("time grid is not uniformly spaced (step {index} is {step}, expected {expected})")]
    NonUniformGrid { index: usize, step: f64, expected: f64 },

    #[error("{0} is only defined for Brownian states")]
    RequiresBrownian(&'static str),

    #[error("value iteration diverged after {iterations} sweeps (last sup-norm change {last_delta:e})")]
    Divergence { iterations: usize, last_delta: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
