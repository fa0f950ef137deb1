//! Coupled multi-agent problems: agents with composite local costs, their
//! constraint blocks, the communication graph and the structured dual
//! operators `C_i`, `F_i`, `E_i`.

mod agent;
mod instance;
pub mod io;
mod lipschitz;
mod topology;
mod validate;

use thiserror::Error;

use crate::toolkit::ToolkitError;

pub use agent::{AgentSpec, ConstraintBlock, LocalConjugate};
pub use instance::{DualLayout, ProblemInstance};
pub use io::{instance_hash, load_instance, save_instance, InstanceDoc};
pub use lipschitz::{lipschitz_constant, LipschitzConstant, DENSE_SVD_MAX_COLS, POWER_ITERATION_TOL};
pub use topology::Topology;
pub use validate::{validate_instance, Check, CheckStatus, ValidationReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Toolkit(#[from] ToolkitError),
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("instance failed validation: {0}")]
    Invalid(String),
    #[error("agent {agent} has strong convexity {sigma}, the Lipschitz constant is undefined")]
    SingularScale { agent: usize, sigma: f64 },
    #[error("malformed instance document: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<serde_json::Error> for ProblemError {
    fn from(e: serde_json::Error) -> Self {
        ProblemError::Format(e.to_string())
    }
}
