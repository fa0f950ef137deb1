//! Builders for concrete instances: the electricity market, consensus over
//! a graph, and per-agent linear interpretations of a global constraint.

mod consensus;
mod market;
mod transform;

use thiserror::Error;

use crate::problem::ProblemError;
use crate::toolkit::ToolkitError;

pub use consensus::{build_consensus, ConsensusDoc, ConsensusLocal, LocalDoc};
pub use market::{build_market, MarketParams};
pub use transform::{apply_transform, TransformSpec, TransformedBlock};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("transform of agent {agent} does not have full row rank")]
    RankDeficient { agent: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

impl From<ToolkitError> for ScenarioError {
    fn from(e: ToolkitError) -> Self {
        ScenarioError::Problem(e.into())
    }
}
