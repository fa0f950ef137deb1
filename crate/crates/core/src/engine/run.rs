use crate::linalg::dist_inf;
use crate::problem::{instance_hash, ProblemInstance};
use crate::scalar::{ExtReal, Scalar};

use super::objective::dual_objective;
use super::schedule::{DelaySchedule, ScheduleKind, SCHEDULE_PRNG};
use super::state::{DualState, StepSizes};
use super::step::{asyn_dpg_step, dpg_step, History, StepCheck, StepOptions};
use super::trace::{IterationTrace, Mode, RecordLevel, StopReason, TraceMeta};
use super::EngineError;

/// Default stopping tolerance on `|lambda(k+1) - lambda(k)|_inf`.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig<T> {
    pub mode: Mode,
    pub schedule: DelaySchedule,
    pub steps: StepSizes<T>,
    /// Lipschitz constant of `grad P`, used by the delayed step-size
    /// condition and recorded in the metadata.
    pub h: T,
    pub max_iters: usize,
    /// `None` runs exactly `max_iters` rounds.
    pub tol: Option<T>,
    /// Reference for `epsilon`; the smallest observed `Psi` when absent.
    pub psi_star: Option<T>,
    pub lambda0: Option<Vec<T>>,
    pub record: RecordLevel,
    pub allow_step_violation: bool,
    pub options: StepOptions<T>,
}

impl<T: Scalar> RunConfig<T> {
    pub fn sync(h: T, max_iters: usize) -> Self {
        RunConfig {
            mode: Mode::Sync,
            schedule: DelaySchedule::zero(0),
            steps: StepSizes::Uniform(T::one() / h),
            h,
            max_iters,
            tol: Some(T::lit(DEFAULT_TOL)),
            psi_star: None,
            lambda0: None,
            record: RecordLevel::Full,
            allow_step_violation: false,
            options: StepOptions::default(),
        }
    }

    pub fn asynchronous(h: T, schedule: DelaySchedule, steps: StepSizes<T>, max_iters: usize) -> Self {
        RunConfig {
            mode: Mode::Async,
            schedule,
            steps,
            ..Self::sync(h, max_iters)
        }
    }
}

/// Runs DPG or Asyn-DPG from `lambda(0)` (zero unless configured).
pub fn run<T: Scalar>(
    inst: &ProblemInstance<T>,
    cfg: &RunConfig<T>,
) -> Result<IterationTrace<T>, EngineError> {
    let report = inst.validate();
    if !report.passed() {
        return Err(EngineError::InvalidInstance(report.failures()));
    }
    let n = inst.n_agents();
    let layout = inst.layout();
    cfg.steps.validate(n)?;
    let uniform_c = match (cfg.mode, &cfg.steps) {
        (Mode::Sync, StepSizes::Uniform(c)) => Some(*c),
        (Mode::Sync, StepSizes::PerAgent(_)) => {
            return Err(EngineError::InvalidConfig(
                "synchronous runs use one uniform step size".into(),
            ))
        }
        (Mode::Async, _) => None,
    };
    let initial = match &cfg.lambda0 {
        Some(v) => DualState::from_vec(layout, v.clone(), 0)?,
        None => DualState::zeros(layout),
    };
    let psi0 = dual_objective(inst, initial.as_slice())?.psi;
    if !psi0.is_finite() {
        return Err(EngineError::NonFiniteInitial);
    }
    let check = if cfg.allow_step_violation {
        StepCheck::Override
    } else {
        StepCheck::Enforce { h: cfg.h }
    };
    if cfg.mode == Mode::Async {
        if let StepCheck::Enforce { h } = check {
            super::state::check_step_condition(&cfg.steps, n, h, cfg.schedule.bound)?;
        }
    }

    let cap = cfg.max_iters.saturating_add(1).min(1 << 20);
    let full = cfg.record == RecordLevel::Full;
    let mut psi = Vec::with_capacity(cap);
    let mut step_norm_inf = Vec::with_capacity(cap);
    let mut agent_step_sq = Vec::with_capacity(cap * n);
    let mut tau = Vec::with_capacity(cap);
    let mut messages = Vec::with_capacity(cap);
    let mut lambdas = if full { Some(Vec::with_capacity(cap * layout.len())) } else { None };

    psi.push(psi0);
    step_norm_inf.push(T::zero());
    agent_step_sq.extend(std::iter::repeat_n(T::zero(), n));
    tau.push(0);
    messages.push(0);
    if let Some(l) = lambdas.as_mut() {
        l.extend_from_slice(initial.as_slice());
    }

    let lambda0 = initial.as_slice().to_vec();
    let bound = if cfg.mode == Mode::Sync { 0 } else { cfg.schedule.bound };
    let mut history = History::new(initial, bound);
    let mut stop = StopReason::MaxIters;
    let mut messages_total = 0;
    for _ in 0..cfg.max_iters {
        let round = match uniform_c {
            Some(c) => dpg_step(inst, history.latest(), c, &cfg.options)?,
            None => asyn_dpg_step(
                inst,
                &history,
                &cfg.schedule,
                &cfg.steps,
                StepCheck::Override,
                &cfg.options,
            )?,
        };
        let prev = history.latest().as_slice();
        let next = round.next;
        let dinf = dist_inf(next.as_slice(), prev);
        for i in 0..n {
            agent_step_sq.push(next.agent_dist_sq(prev, i));
        }
        step_norm_inf.push(dinf);
        tau.push(round.snapshot);
        messages.push(round.messages);
        messages_total += round.messages;
        psi.push(dual_objective(inst, next.as_slice())?.psi);
        if let Some(l) = lambdas.as_mut() {
            l.extend_from_slice(next.as_slice());
        }
        history.push(next);
        if !dinf.is_finite() {
            return Err(EngineError::Diverged { k: history.latest().k });
        }
        if let Some(tol) = cfg.tol {
            if dinf <= tol {
                stop = StopReason::Tolerance;
                break;
            }
        }
    }

    let (psi_star, source) = match cfg.psi_star {
        Some(p) => (p, "configured"),
        None => (
            psi.iter()
                .filter_map(ExtReal::finite)
                .fold(T::infinity(), |a, b| a.min(b)),
            "best observed",
        ),
    };
    let iterations = psi.len() - 1;
    let meta = TraceMeta {
        instance_hash: instance_hash(inst),
        mode: cfg.mode,
        schedule: if cfg.mode == Mode::Sync {
            DelaySchedule::zero(0)
        } else {
            cfg.schedule
        },
        prng: match cfg.schedule.kind {
            ScheduleKind::Random { .. } if cfg.mode == Mode::Async => Some(SCHEDULE_PRNG.into()),
            _ => None,
        },
        n_agents: n,
        m: layout.m,
        b: layout.b,
        h: cfg.h.as_f64(),
        step_sizes: cfg.steps.expand(n).into_iter().map(Scalar::as_f64).collect(),
        tol: cfg.tol.map(Scalar::as_f64),
        max_iters: cfg.max_iters,
        iterations,
        stop_reason: stop,
        messages_total,
        psi_star: psi_star.as_f64(),
        psi_star_source: source.into(),
        step_condition_overridden: cfg.allow_step_violation,
    };
    Ok(IterationTrace {
        layout,
        psi,
        step_norm_inf,
        agent_step_sq,
        tau,
        messages,
        lambdas,
        lambda0,
        lambda_final: history.latest().as_slice().to_vec(),
        meta,
    })
}
