use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ToolkitError {
    /// The conjugate supremum is `+inf`: the function lacks curvature in the
    /// queried direction over an unbounded effective domain.
    #[error("conjugate supremum is unbounded on the effective domain")]
    Unbounded,
    #[error("function is not strongly convex (modulus {0})")]
    NonStronglyConvex(f64),
    #[error("inner prox loop stopped after {iterations} iterations with gradient norm {residual:e}")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), ToolkitError> {
    if expected == got {
        Ok(())
    } else {
        Err(ToolkitError::DimensionMismatch { expected, got })
    }
}
