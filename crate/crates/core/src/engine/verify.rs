use serde::Serialize;

use crate::linalg::dist_sq;
use crate::scalar::{ExtReal, Scalar};

use super::state::StepSizes;
use super::trace::IterationTrace;
use super::EngineError;

/// Slack `bound - measured` of one inequality at each admissible `K`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSeries {
    /// `K` of the first entry.
    pub first_k: usize,
    pub slack: Vec<f64>,
    pub min_slack: f64,
    pub argmin_k: usize,
}

impl BoundSeries {
    fn new(first_k: usize, slack: Vec<f64>) -> Self {
        let (mut min_slack, mut argmin_k) = (f64::INFINITY, first_k);
        for (j, &s) in slack.iter().enumerate() {
            // NaN and -inf count as violations
            if !(s >= min_slack) {
                min_slack = if s.is_nan() { f64::NEG_INFINITY } else { s };
                argmin_k = first_k + j;
            }
        }
        BoundSeries {
            first_k,
            slack,
            min_slack,
            argmin_k,
        }
    }

    /// Every slack is at least `-tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.min_slack >= -tol
    }

    pub fn is_empty(&self) -> bool {
        self.slack.is_empty()
    }
}

/// Results of the convergence-rate checks on one trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBoundReport {
    pub h: f64,
    pub delay_bound: usize,
    pub psi_star: f64,
    /// `|lambda(0) - lambda*|^2`.
    pub initial_distance_sq: f64,
    /// `Psi(K) - Psi* <= h |lambda(0) - lambda*|^2 / (2K)`, `K >= 1`;
    /// only for traces without delay.
    pub sync_rate: Option<BoundSeries>,
    /// Per-step descent certificate
    /// `Psi(k+1) <= Psi(k) + h/2 |d|^2 - sum_i |d_i|^2 / c_i`;
    /// only for traces without delay.
    pub descent: Option<BoundSeries>,
    /// `Lambda(c_1, .., c_N, D)`; only for delayed traces.
    pub lambda_constant: Option<f64>,
    /// `Psi(K+1) - Psi* <= Lambda / (K+1)`, `K >= ceil(D/2)`.
    pub delayed_rate: Option<BoundSeries>,
    /// `sum_k sum_{m=tau(k)}^{k} s(m) <= (D+1) sum_k s(k)`.
    pub window_sum: BoundSeries,
    /// `sum_k k sum_{m=tau(k)}^{k} s(m) <= sum_k (2k+D)(D+1)/2 s(k)`.
    pub weighted_window_sum: BoundSeries,
    pub window_sum_sides: (f64, f64),
    pub weighted_window_sum_sides: (f64, f64),
    pub note: String,
}

impl RateBoundReport {
    /// Every computed slack is at least `-tol`.
    pub fn all_hold(&self, tol: f64) -> bool {
        [&self.sync_rate, &self.descent, &self.delayed_rate]
            .into_iter()
            .flatten()
            .chain([&self.window_sum, &self.weighted_window_sum])
            .all(|s| s.holds(tol))
    }
}

/// Which rate bounds apply to a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundSelection {
    pub sync_rate: bool,
    pub delayed_rate: bool,
}

fn ext_f64<T: Scalar>(v: ExtReal<T>) -> f64 {
    match v {
        ExtReal::Finite(x) => x.as_f64(),
        ExtReal::PosInf => f64::INFINITY,
    }
}

/// Checks the rate bounds on a recorded trajectory.
///
/// `lambda_star` and `psi_star` are the optimal point and value the bounds
/// are measured against, usually the converged end of the same run.
/// Record `k` of the trace carries `lambda(k) - lambda(k-1)` and the read
/// instant `tau(k-1)`, so the window sums run over `k <= K - 1`.
pub fn verify_rate_bounds<T: Scalar>(
    trace: &IterationTrace<T>,
    lambda_star: &[T],
    psi_star: T,
    h: T,
    steps: &StepSizes<T>,
    d: usize,
    select: BoundSelection,
) -> Result<RateBoundReport, EngineError> {
    let n = trace.layout.n;
    let rows = trace.len();
    if rows < 2 {
        return Err(EngineError::InsufficientTrace { need: 2, have: rows });
    }
    if lambda_star.len() != trace.layout.len() {
        return Err(EngineError::InvalidConfig(format!(
            "lambda* has {} entries, trace layout has {}",
            lambda_star.len(),
            trace.layout.len()
        )));
    }
    let h64 = h.as_f64();
    let ps = psi_star.as_f64();
    let c: Vec<f64> = steps.expand(n).into_iter().map(Scalar::as_f64).collect();
    let dist0 = dist_sq(&trace.lambda0, lambda_star).as_f64();
    let lay = trace.layout;
    let agent_dist0: Vec<f64> = (0..n)
        .map(|i| {
            (dist_sq(&trace.lambda0[lay.theta(i)], &lambda_star[lay.theta(i)])
                + dist_sq(&trace.lambda0[lay.mu(i)], &lambda_star[lay.mu(i)]))
            .as_f64()
        })
        .collect();
    let psi: Vec<f64> = trace.psi.iter().map(|&p| ext_f64(p)).collect();
    // s(m) = |lambda(m+1) - lambda(m)|^2 lives in record m + 1
    let s: Vec<f64> = (1..rows).map(|k| trace.step_sq(k).as_f64()).collect();
    let s_agent = |m: usize, i: usize| trace.agent_step_sq(m + 1, i).as_f64();

    let sync_rate = select.sync_rate.then(|| {
        let slack = (1..rows)
            .map(|k| h64 * dist0 / (2.0 * k as f64) - (psi[k] - ps))
            .collect();
        BoundSeries::new(1, slack)
    });
    let descent = select.sync_rate.then(|| {
        let slack = (0..rows - 1)
            .map(|k| {
                let pen: f64 = (0..n).map(|i| s_agent(k, i) / c[i]).sum();
                psi[k] + h64 / 2.0 * s[k] - pen - psi[k + 1]
            })
            .collect();
        BoundSeries::new(0, slack)
    });

    let (lambda_constant, delayed_rate) = if select.delayed_rate {
        let first = d.div_ceil(2);
        // need lambda(K+1) for K = ceil(D/2) and steps up to floor(D/2)
        let need = (first + 2).max(d / 2 + 2);
        if rows < need {
            return Err(EngineError::InsufficientTrace { need, have: rows });
        }
        let dd = (d + 1) as f64;
        let mut lam = 0.0;
        for k in 0..=d / 2 {
            for (i, &ci) in c.iter().enumerate() {
                let coef = h64 * (2 * k + d) as f64 * dd * dd / 4.0 - k as f64 / ci;
                lam += coef * s_agent(k, i);
            }
        }
        for i in 0..n {
            lam += agent_dist0[i] / (2.0 * c[i]);
        }
        let slack = (first..rows - 1)
            .map(|k| lam / (k + 1) as f64 - (psi[k + 1] - ps))
            .collect();
        (Some(lam), Some(BoundSeries::new(first, slack)))
    } else {
        (None, None)
    };

    let dd = (d + 1) as f64;
    let (mut l_window, mut r_window, mut l_weighted, mut r_weighted) = (0.0, 0.0, 0.0, 0.0);
    let mut slack_window = Vec::with_capacity(rows - 1);
    let mut slack_weighted = Vec::with_capacity(rows - 1);
    for k in 0..rows - 1 {
        let t = trace.tau[k + 1];
        if t > k || k - t > d {
            return Err(EngineError::InvalidConfig(format!(
                "read instant {t} at k = {k} violates the delay bound {d}"
            )));
        }
        let mut inner = 0.0;
        for m in (t..=k).rev() {
            inner += s[m];
        }
        l_window += inner;
        r_window += dd * s[k];
        l_weighted += k as f64 * inner;
        r_weighted += (2 * k + d) as f64 * dd / 2.0 * s[k];
        slack_window.push(r_window - l_window);
        slack_weighted.push(r_weighted - l_weighted);
    }

    Ok(RateBoundReport {
        h: h64,
        delay_bound: d,
        psi_star: ps,
        initial_distance_sq: dist0,
        sync_rate,
        descent,
        lambda_constant,
        delayed_rate,
        window_sum: BoundSeries::new(0, slack_window),
        weighted_window_sum: BoundSeries::new(0, slack_weighted),
        window_sum_sides: (l_window, r_window),
        weighted_window_sum_sides: (l_weighted, r_weighted),
        note: "lambda* and Psi* are taken from the trajectory being checked, so the \
               bounds are verified against an approximate optimum"
            .into(),
    })
}
