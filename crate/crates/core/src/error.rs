use thiserror::Error;

use crate::scaled::SignCase;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NehariError {
    /// The state is (numerically) zero, so no projection or quotient exists.
    #[error("state is numerically zero (I_s = {value:e})")]
    ZeroState { value: f64 },

    #[error("state is not on the sphere I_s = 1 (I_s = {value})")]
    NotOnSphere { value: f64 },

    #[error("sign case mismatch: {0}")]
    CaseMismatch(String),

    #[error("energy c = {c} is outside the open admissible interval {interval} of case {case}")]
    EnergyOutsideInterval {
        c: f64,
        case: SignCase,
        interval: &'static str,
    },

    #[error("state is not on the Nehari set (scale-relative residual {residual:e})")]
    NotOnNehari { residual: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("states live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("asymptotic fit needs at least {needed} usable tail points, got {got}")]
    InsufficientTail { needed: usize, got: usize },

    #[error("asymptotic fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, NehariError>;
