//! Dual proximal gradient methods, synchronous and with bounded delays,
//! for agents with private composite objectives coupled by affine
//! constraints.
//!
//! Every routine is generic over the scalar type ([`scalar::Scalar`], i.e.
//! `f32` or `f64`); the aliases below fix the common choices.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod repro;
pub mod scalar;
pub mod scenarios;
pub mod toolkit;

pub type Instance = problem::ProblemInstance<f64>;
pub type Instance32 = problem::ProblemInstance<f32>;
pub type Trace = engine::IterationTrace<f64>;
pub type Trace32 = engine::IterationTrace<f32>;
pub type Config = engine::RunConfig<f64>;
pub type Config32 = engine::RunConfig<f32>;
pub type State = engine::DualState<f64>;
pub type State32 = engine::DualState<f32>;
