//! DPG and Asyn-DPG iterations with delay scheduling, dual objective
//! evaluation, primal recovery, traces and rate-bound checks.

mod objective;
mod run;
mod schedule;
mod state;
mod step;
mod trace;
mod verify;

use thiserror::Error;

use crate::problem::ProblemError;
use crate::toolkit::ToolkitError;

pub use objective::{dual_objective, primal_objective, recover_primal, DualValue, PrimalRecovery};
pub use run::{run, RunConfig, DEFAULT_TOL};
pub use schedule::{DelaySchedule, ScheduleKind, SCHEDULE_PRNG};
pub use state::{
    check_step_condition, step_size_async, step_size_sync, DualState, StepSizes,
    STEP_CONDITION_RTOL,
};
pub use step::{
    asyn_dpg_step, dpg_step, grad_p_block, local_maximizer, GradientMessage, History, Round,
    StepCheck, StepOptions,
};
pub use trace::{
    fmt_num, meta_path_for, read_trace, IterationTrace, Mode, RecordLevel, StopReason, TraceMeta,
};
pub use verify::{verify_rate_bounds, BoundSelection, BoundSeries, RateBoundReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Toolkit(#[from] ToolkitError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("instance failed validation: {0}")]
    InvalidInstance(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("agent {receiver} got a message from snapshot {got}, expected {expected}")]
    StaleMix {
        receiver: usize,
        expected: usize,
        got: usize,
    },
    #[error("agent {receiver} has no message from neighbor {sender}")]
    MissingNeighbor { receiver: usize, sender: usize },
    #[error("state {tau} needed at k = {k} is no longer in the history")]
    HistoryUnderflow { k: usize, tau: usize },
    #[error("agent {agent}: 1/c = {inv_c} is below h (D+1)^2 = {required}")]
    StepSizeViolation {
        agent: usize,
        inv_c: f64,
        required: f64,
    },
    #[error("the dual objective is +inf at the initial point")]
    NonFiniteInitial,
    #[error("iterates became non-finite at k = {k}")]
    Diverged { k: usize },
    #[error("trace has {have} records, at least {need} are needed")]
    InsufficientTrace { need: usize, have: usize },
    #[error("malformed trace: {0}")]
    MalformedTrace(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// Checks the bounds that apply to a trace's own mode, measured against
/// its final point and the reference `Psi*` recorded with it.
pub fn verify_trace<T: crate::scalar::Scalar>(
    trace: &IterationTrace<T>,
) -> Result<RateBoundReport, EngineError> {
    let n = trace.layout.n;
    let steps = StepSizes::PerAgent(trace.meta.step_sizes.iter().map(|&c| T::lit(c)).collect());
    let (d, select) = match trace.meta.mode {
        Mode::Sync => (
            0,
            BoundSelection {
                sync_rate: true,
                delayed_rate: false,
            },
        ),
        Mode::Async => (
            trace.meta.schedule.bound,
            BoundSelection {
                sync_rate: false,
                delayed_rate: true,
            },
        ),
    };
    debug_assert_eq!(trace.meta.step_sizes.len(), n);
    verify_rate_bounds(
        trace,
        &trace.lambda_final,
        trace.psi_star(),
        T::lit(trace.meta.h),
        &steps,
        d,
        select,
    )
}
