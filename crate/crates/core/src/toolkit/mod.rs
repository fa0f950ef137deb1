//! Convex building blocks: proximal mappings, Fenchel conjugates and
//! conjugate gradients (argmax oracles) for the function catalog used by
//! agents.
//!
//! Every routine here is a pure function of its arguments.

mod boxset;
mod error;
mod inner;
mod prox;
mod quadratic;
mod smooth;
mod utility;

pub use boxset::{BoxSet, Domain};
pub use error::ToolkitError;
pub use inner::{prox_via_inner_descent, InnerProx, InnerProxOptions};
pub use prox::{project_box, prox_conjugate_via_moreau, prox_l1, soft_threshold, ProxFriendly};
pub use quadratic::QuadraticFunction;
pub use smooth::{SmoothBase, SmoothConjugable};
pub use utility::PiecewiseQuadraticUtility;

/// Objective values closer than this are treated as ties when a maximizer
/// is selected from a finite candidate set; the smaller point wins.
pub const CANDIDATE_TIE_TOL: f64 = 1e-12;
