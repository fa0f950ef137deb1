use std::collections::VecDeque;

use rayon::prelude::*;

use crate::problem::ProblemInstance;
use crate::scalar::Scalar;
use crate::toolkit::InnerProxOptions;

use super::schedule::DelaySchedule;
use super::state::{check_step_condition, DualState, StepSizes};
use super::EngineError;

/// `x_hat_i = grad f_i^*(C_i lambda)`, the only quantity agent `i` exports.
pub fn local_maximizer<T: Scalar>(
    inst: &ProblemInstance<T>,
    i: usize,
    lambda: &[T],
) -> Result<Vec<T>, EngineError> {
    Ok(inst.agent(i).f.conjugate_argmax(&inst.apply_c(i, lambda))?)
}

/// Agent `sender`'s maximizer as seen by `receiver`, computed from the
/// snapshot `lambda(snapshot)`. The receiver forms `-A_sender^(receiver)
/// x_hat` itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientMessage<'a, T> {
    pub sender: usize,
    pub receiver: usize,
    pub x_hat: &'a [T],
    pub snapshot: usize,
}

/// `(grad_theta_i P, grad_mu_i P) = (b^(i) - sum_l A_l^(i) x_hat_l, -x_hat_i)`.
///
/// `messages` must come from the snapshot of `own_x` and cover every
/// other agent that appears in agent `i`'s constraint block. Terms are
/// summed in ascending agent order.
pub fn grad_p_block<T: Scalar>(
    inst: &ProblemInstance<T>,
    i: usize,
    own_x: &[T],
    snapshot: usize,
    messages: &[GradientMessage<'_, T>],
) -> Result<(Vec<T>, Vec<T>), EngineError> {
    for msg in messages {
        if msg.receiver != i {
            return Err(EngineError::InvalidConfig(format!(
                "message from {} addressed to {} delivered to {i}",
                msg.sender, msg.receiver
            )));
        }
        if msg.snapshot != snapshot {
            return Err(EngineError::StaleMix {
                receiver: i,
                expected: snapshot,
                got: msg.snapshot,
            });
        }
    }
    let block = &inst.agent(i).constraint;
    let mut g_theta = block.rhs.clone();
    for (&l, a) in &block.blocks {
        let x = if l == i {
            own_x
        } else {
            messages
                .iter()
                .find(|m| m.sender == l)
                .map(|m| m.x_hat)
                .ok_or(EngineError::MissingNeighbor { receiver: i, sender: l })?
        };
        a.matvec_acc(-T::one(), x, &mut g_theta);
    }
    let g_mu = own_x.iter().map(|&v| -v).collect();
    Ok((g_theta, g_mu))
}

/// Knobs shared by every update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOptions<T> {
    pub inner: InnerProxOptions<T>,
    /// Update agents of one round on the rayon pool. The output is
    /// identical to the sequential path.
    pub parallel: bool,
}

impl<T: Scalar> Default for StepOptions<T> {
    fn default() -> Self {
        StepOptions {
            inner: InnerProxOptions::default(),
            parallel: false,
        }
    }
}

/// Result of one round.
#[derive(Clone, Debug, PartialEq)]
pub struct Round<T> {
    pub next: DualState<T>,
    pub snapshot: usize,
    pub messages: usize,
}

fn map_agents<R, F>(n: usize, parallel: bool, f: F) -> Result<Vec<R>, EngineError>
where
    R: Send,
    F: Fn(usize) -> Result<R, EngineError> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// One round: gradients from `snapshot`, proximal anchor `current`.
fn round<T: Scalar>(
    inst: &ProblemInstance<T>,
    current: &DualState<T>,
    snapshot: &DualState<T>,
    steps: &StepSizes<T>,
    opts: &StepOptions<T>,
) -> Result<Round<T>, EngineError> {
    let n = inst.n_agents();
    let lam = snapshot.as_slice();
    let x_hat = map_agents(n, opts.parallel, |l| local_maximizer(inst, l, lam))?;
    let updates = map_agents(n, opts.parallel, |i| {
        let messages: Vec<GradientMessage<'_, T>> = inst
            .agent(i)
            .constraint
            .blocks
            .keys()
            .filter(|&&l| l != i)
            .map(|&l| GradientMessage {
                sender: l,
                receiver: i,
                x_hat: &x_hat[l],
                snapshot: snapshot.k,
            })
            .collect();
        let (g_theta, g_mu) = grad_p_block(inst, i, &x_hat[i], snapshot.k, &messages)?;
        let c = steps.c(i);
        let theta: Vec<T> = current
            .theta(i)
            .iter()
            .zip(&g_theta)
            .map(|(&t, &g)| t - c * g)
            .collect();
        let rho: Vec<T> = current
            .mu(i)
            .iter()
            .zip(&g_mu)
            .map(|(&m, &g)| m - c * g)
            .collect();
        let mu = inst.agent(i).local_conjugate().prox(&rho, c, &opts.inner)?;
        Ok((theta, mu, messages.len()))
    })?;
    let mut next = current.clone();
    next.k = current.k + 1;
    let mut messages = 0;
    for (i, (theta, mu, count)) in updates.into_iter().enumerate() {
        next.theta_mut(i).copy_from_slice(&theta);
        next.mu_mut(i).copy_from_slice(&mu);
        messages += count;
    }
    Ok(Round {
        next,
        snapshot: snapshot.k,
        messages,
    })
}

/// Synchronous update with uniform step `c`.
pub fn dpg_step<T: Scalar>(
    inst: &ProblemInstance<T>,
    state: &DualState<T>,
    c: T,
    opts: &StepOptions<T>,
) -> Result<Round<T>, EngineError> {
    round(inst, state, state, &StepSizes::Uniform(c), opts)
}

/// The last `D + 1` dual states, newest at the back.
#[derive(Clone, Debug, PartialEq)]
pub struct History<T> {
    states: VecDeque<DualState<T>>,
    capacity: usize,
}

impl<T: Scalar> History<T> {
    pub fn new(initial: DualState<T>, bound: usize) -> Self {
        let mut states = VecDeque::with_capacity(bound + 1);
        states.push_back(initial);
        History {
            states,
            capacity: bound + 1,
        }
    }

    pub fn latest(&self) -> &DualState<T> {
        self.states.back().expect("history is never empty")
    }

    pub fn get(&self, k: usize) -> Option<&DualState<T>> {
        let oldest = self.states.front()?.k;
        if k < oldest {
            return None;
        }
        self.states.get(k - oldest).filter(|s| s.k == k)
    }

    pub fn push(&mut self, s: DualState<T>) {
        if self.states.len() == self.capacity {
            self.states.pop_front();
        }
        self.states.push_back(s);
    }
}

/// Whether the delayed step-size condition is enforced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepCheck<T> {
    Enforce { h: T },
    Override,
}

/// Delayed update: gradients at `lambda(tau(k))`, anchor at the newest
/// state.
pub fn asyn_dpg_step<T: Scalar>(
    inst: &ProblemInstance<T>,
    history: &History<T>,
    schedule: &DelaySchedule,
    steps: &StepSizes<T>,
    check: StepCheck<T>,
    opts: &StepOptions<T>,
) -> Result<Round<T>, EngineError> {
    if let StepCheck::Enforce { h } = check {
        check_step_condition(steps, inst.n_agents(), h, schedule.bound)?;
    }
    let current = history.latest();
    let tau = schedule.tau(current.k);
    let snapshot = history
        .get(tau)
        .ok_or(EngineError::HistoryUnderflow { k: current.k, tau })?;
    round(inst, current, snapshot, steps, opts)
}
