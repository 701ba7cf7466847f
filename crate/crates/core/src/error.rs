use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("field has {got} nodal values, grid expects {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("field violates the Dirichlet condition: u(R) = {0:e}")]
    BoundaryValue(f64),

    #[error("non-finite value at node {0}")]
    NonFinite(usize),

    #[error("fields are defined on different grids")]
    GridMismatch,

    #[error("unsupported exponent p = {0}; only 2, 5 and 6 are used")]
    UnsupportedExponent(u32),

    #[error("field vanishes identically")]
    ZeroField,

    /// `‖∇u‖² − λ‖u‖² ≤ 0`: the fibering map `t ↦ I(tu)` has no positive
    /// maximum. Along the principal eigenfunction this is exactly `λ ≥ λ₁`.
    #[error("no fibering maximum: ‖∇u‖² − λ‖u‖² = {alpha:e} ≤ 0 (λ at or above λ₁ along this direction)")]
    NoFiberMax { alpha: f64 },

    #[error("eps = {eps:e} is below the resolvable limit {eps_min:e} of this grid")]
    UnresolvedEps { eps: f64, eps_min: f64 },

    #[error("eps schedule needs at least {needed} points, got {got}")]
    ScheduleTooShort { needed: usize, got: usize },

    #[error("eps schedule must be positive and strictly decreasing")]
    BadSchedule,

    #[error("refinement schedule is empty")]
    EmptySchedule,

    #[error("inverse iteration did not converge in {iterations} steps (last estimate {last:e})")]
    EigenNotConverged {
        iterations: usize,
        last: f64,
        last_iterate: Vec<f64>,
    },

    #[error("fibering radicand {0:e} is not positive")]
    NonPositiveRadicand(f64),

    #[error("fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
