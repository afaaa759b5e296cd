//! Error type shared by all solver modules.

use thiserror::Error;

/// Errors surfaced by the linear-algebra kernels, the problem oracles, and
/// the solver loops.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A Cholesky pivot was non-positive: the matrix left the SPD cone.
    #[error("matrix is not positive definite (pivot {pivot:e} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    /// A rank-one downdate `X + alpha*v*v'` with `alpha < 0` would destroy
    /// positive definiteness; `margin = 1 + alpha*|B^-1 v|^2`.
    #[error("rank-one downdate breaks positive definiteness (margin {margin:e})")]
    DowndateBreaksPD { margin: f64 },

    /// A Sherman-Morrison denominator fell below tolerance.
    #[error("rank-one inverse update is numerically singular (denominator {denom:e})")]
    SingularUpdate { denom: f64 },

    #[error("step size alpha = {alpha} is outside the admissible range")]
    InadmissibleStep { alpha: f64 },

    /// `I + G*X` is numerically singular (DARE shift).
    #[error("I + G*X is numerically singular")]
    SingularShift,

    #[error("matrix is numerically singular")]
    Singular,

    #[error("line-search objective has a pole at alpha = {pole} that leaves no admissible interval")]
    PoleInObjective { pole: f64 },

    /// The transformed gradient maps the power-method iterate to zero;
    /// the current point is (numerically) stationary.
    #[error("gradient operator maps the power-method iterate to zero")]
    ZeroOperator,

    /// The power method returned a Rayleigh quotient too small to define a
    /// usable descent direction.
    #[error("degenerate descent direction (rayleigh quotient {lambda:e})")]
    DegenerateDirection { lambda: f64 },

    #[error("line search found no decrease along the current direction")]
    NoDecrease,

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("cost-scaling fit is degenerate: {0}")]
    DegenerateFit(String),

    #[error("invalid matrix file: {0}")]
    Parse(String),

    #[error("{0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
