use thiserror::Error;

/// Errors raised by the expansion and scattering routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("order {order} is not supported (maximum {max})")]
    UnsupportedOrder { order: i32, max: i32 },

    #[error("sign words longer than 4 are not supported (got {0})")]
    WordTooLong(usize),

    #[error("transmission amplitude vanishes (resonance pole) at k = {re} + {im}i")]
    ResonancePole { re: f64, im: f64 },

    #[error("singular combination 1 - xi R_r = 0")]
    SingularCombination,

    #[error("pole encountered at k = {re} + {im}i: {what}")]
    Pole { re: f64, im: f64, what: String },

    #[error("no band bottom found: {0}")]
    NoBandBottom(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("zero-energy solution is not positive at x = {x} (value {value})")]
    PositivityViolation { x: f64, value: f64 },

    #[error("exceptional case detected (relative Wronskian {relative_wronskian:e}); use the symmetric pipeline")]
    ExceptionalCase { relative_wronskian: f64 },

    #[error("ill-conditioned Laurent fit (condition {condition:e}); try k_scale <= {suggested_k_scale}")]
    IllConditioned { condition: f64, suggested_k_scale: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
