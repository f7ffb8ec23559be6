use crate::mesh::GridFunction;

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor received parameters that violate a documented constraint.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A run configuration is internally inconsistent (grids, commensurability, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// An operation was called on inputs outside its domain.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A descent loop hit its iteration cap before reaching tolerance.
    /// Carries the last iterate so callers can inspect or restart.
    #[error("solver did not converge: gradient norm {grad_norm:.3e} after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        grad_norm: f64,
        last: Box<GridFunction>,
    },

    /// Multiplier extraction on a function with vanishing constraint gradient.
    #[error("degenerate constraint: gradient of the constraint functional is zero")]
    DegenerateConstraint,
}

pub type Result<T> = std::result::Result<T, Error>;
