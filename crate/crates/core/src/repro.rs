//! Reproduction suite: the market runs (synchronous and delayed), rate
//! bound checks, conjugate property checks and the small reference
//! problems, each reported as a pass/fail criterion.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{
    dual_objective, recover_primal, run, step_size_async, verify_rate_bounds, BoundSelection,
    BoundSeries, DelaySchedule, EngineError, IterationTrace, RecordLevel, RunConfig, StepSizes,
};
use crate::linalg::{dist_inf, Mat};
use crate::oracle;
use crate::problem::{lipschitz_constant, AgentSpec, ConstraintBlock, ProblemInstance, Topology};
use crate::scenarios::{build_market, ConsensusDoc, MarketParams};
use crate::toolkit::{
    BoxSet, Domain, PiecewiseQuadraticUtility, ProxFriendly, QuadraticFunction, SmoothConjugable,
};

/// Target optimum of the market problem.
pub const MARKET_X_TARGET: [f64; 5] = [0.0, 150.0, 48.5, 50.2, 51.3];
pub const MARKET_X_TOL: f64 = 0.1;
/// Target limit of `Psi` on the market problem.
pub const MARKET_PSI_TARGET: f64 = 756.53;
pub const MARKET_PSI_TOL: f64 = 0.5;
pub const DELAYS: [usize; 5] = [0, 3, 5, 10, 15];
pub const BOUND_TOL: f64 = 1e-9;
pub const EQUALITY_TOL: f64 = 1e-12;
pub const REDUCTION_TOL: f64 = 1e-12;
/// Delayed runs must end with `|epsilon| <= ASYNC_EPS_TOL`.
pub const ASYNC_EPS_TOL: f64 = 1e-6;
pub const MOREAU_CASES: usize = 1000;
pub const MOREAU_TOL: f64 = 1e-9;
pub const FD_POINTS: usize = 200;
pub const FD_STEP: f64 = 1e-5;
pub const FD_RTOL: f64 = 1e-5;
pub const LIPSCHITZ_PAIRS: usize = 1000;
pub const GRID_TOL: f64 = 1e-3;
pub const KKT_TOL: f64 = 1e-4;
pub const CONSENSUS_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct ReproConfig {
    /// Multiplies every step size of the market runs; values above 1
    /// break the step-size rule on purpose.
    pub step_scale: f64,
    pub seed: u64,
    /// Delayed runs take `budget_factor (D+1)^2 K_6` rounds, where `K_6`
    /// is the first synchronous round with `epsilon <= 1e-6`.
    pub budget_factor: f64,
    pub sync_max_iters: usize,
}

impl Default for ReproConfig {
    fn default() -> Self {
        ReproConfig {
            step_scale: 1.0,
            seed: 2024,
            budget_factor: 2.0,
            sync_max_iters: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub detail: String,
    pub metrics: BTreeMap<String, f64>,
}

impl CriterionResult {
    fn new(id: &str, title: &str, passed: bool, detail: String) -> Self {
        CriterionResult {
            id: id.into(),
            title: title.into(),
            passed,
            detail,
            metrics: BTreeMap::new(),
        }
    }

    fn metric(mut self, k: &str, v: f64) -> Self {
        self.metrics.insert(k.into(), v);
        self
    }

    fn failed(id: &str, title: &str, err: &str) -> Self {
        Self::new(id, title, false, format!("error: {err}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproSummary {
    pub step_scale: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
    pub criteria: Vec<CriterionResult>,
}

impl ReproSummary {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

/// Slack statistics without the per-`K` series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSummary {
    pub first_k: usize,
    pub count: usize,
    pub min_slack: f64,
    pub argmin_k: usize,
}

impl From<&BoundSeries> for BoundSummary {
    fn from(s: &BoundSeries) -> Self {
        BoundSummary {
            first_k: s.first_k,
            count: s.slack.len(),
            min_slack: s.min_slack,
            argmin_k: s.argmin_k,
        }
    }
}

/// Outcome of one market run, measured against the synchronous optimum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub delay: usize,
    pub iterations: usize,
    pub eps_checkpoint: Option<f64>,
    pub eps_final: f64,
    pub first_below_1e6: Option<usize>,
    pub sync_rate: Option<BoundSummary>,
    pub delayed_rate: Option<BoundSummary>,
    pub lambda_constant: Option<f64>,
    pub window_sum: BoundSummary,
    pub weighted_window_sum: BoundSummary,
    pub window_sum_sides: (f64, f64),
    pub weighted_window_sum_sides: (f64, f64),
    pub seconds: f64,
}

/// The market runs shared by criteria 1 to 6.
#[derive(Clone, Debug)]
pub struct MarketRuns {
    pub h: f64,
    pub step_scale: f64,
    pub sync_trace: IterationTrace<f64>,
    pub lambda_star: Vec<f64>,
    pub psi_star: f64,
    pub p_star: f64,
    pub q_star: f64,
    pub x_hat: Vec<f64>,
    pub mismatch: f64,
    pub max_residual: f64,
    /// Synchronous convergence round, the checkpoint for the delay ordering.
    pub checkpoint: usize,
    pub sync: RunSummary,
    pub delayed: Vec<RunSummary>,
    pub random: Vec<RunSummary>,
    /// Largest coordinate gap between the synchronous trace and the
    /// zero-delay delayed run with the same step.
    pub reduction_gap: f64,
    pub warnings: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn summarize(
    label: String,
    trace: &IterationTrace<f64>,
    lambda_star: &[f64],
    psi_star: f64,
    h: f64,
    steps: &StepSizes<f64>,
    d: usize,
    checkpoint: usize,
    seconds: f64,
    synchronous: bool,
) -> Result<RunSummary, EngineError> {
    let select = BoundSelection {
        sync_rate: synchronous,
        delayed_rate: !synchronous,
    };
    let rep = verify_rate_bounds(trace, lambda_star, psi_star, h, steps, d, select)?;
    let eps = |k: usize| trace.psi[k].to_scalar() - psi_star;
    Ok(RunSummary {
        label,
        delay: d,
        iterations: trace.iterations(),
        eps_checkpoint: (checkpoint < trace.len()).then(|| eps(checkpoint)),
        eps_final: eps(trace.len() - 1),
        first_below_1e6: (0..trace.len()).find(|&k| eps(k) <= 1e-6),
        sync_rate: rep.sync_rate.as_ref().map(BoundSummary::from),
        delayed_rate: rep.delayed_rate.as_ref().map(BoundSummary::from),
        lambda_constant: rep.lambda_constant,
        window_sum: (&rep.window_sum).into(),
        weighted_window_sum: (&rep.weighted_window_sum).into(),
        window_sum_sides: rep.window_sum_sides,
        weighted_window_sum_sides: rep.weighted_window_sum_sides,
        seconds,
    })
}

impl MarketRuns {
    pub fn compute(cfg: &ReproConfig) -> Result<Self, String> {
        let err = |e: &dyn std::fmt::Display| e.to_string();
        let inst = build_market::<f64>(&MarketParams::default()).map_err(|e| err(&e))?;
        let h = lipschitz_constant(&inst).map_err(|e| err(&e))?.h;
        let s = cfg.step_scale;
        let mut warnings = Vec::new();
        if s > 1.0 {
            warnings.push(format!(
                "synchronous step c = {s}/h exceeds 1/h; the descent guarantee does not apply"
            ));
        }

        let t = Instant::now();
        let mut sc = RunConfig::sync(h, cfg.sync_max_iters);
        sc.steps = StepSizes::Uniform(s / h);
        let sync = run(&inst, &sc).map_err(|e| err(&e))?;
        let sync_secs = t.elapsed().as_secs_f64();
        let lambda_star = sync.lambda_final.clone();
        let dv = dual_objective(&inst, &lambda_star).map_err(|e| err(&e))?;
        let psi_star = dv.psi.to_scalar();
        if !psi_star.is_finite() {
            return Err("synchronous run ended at a non-finite dual value".into());
        }
        let rec = recover_primal(&inst, &lambda_star).map_err(|e| err(&e))?;
        let checkpoint = sync.iterations();
        let sync_sum = summarize(
            "sync".into(),
            &sync,
            &lambda_star,
            psi_star,
            h,
            &sc.steps,
            0,
            checkpoint,
            sync_secs,
            true,
        )
        .map_err(|e| err(&e))?;
        let k6 = sync_sum.first_below_1e6.unwrap_or(checkpoint).max(1);

        // zero delay with the synchronous step, over the synchronous horizon
        let mut rc = RunConfig::asynchronous(
            h,
            DelaySchedule::worst_case(0),
            StepSizes::PerAgent(vec![s / h; inst.n_agents()]),
            checkpoint,
        );
        rc.tol = None;
        rc.allow_step_violation = true;
        let red = run(&inst, &rc).map_err(|e| err(&e))?;
        let mut reduction_gap = 0.0_f64;
        for k in 0..sync.len() {
            match (sync.lambda(k), red.lambda(k)) {
                (Some(a), Some(b)) => reduction_gap = reduction_gap.max(dist_inf(a, b)),
                _ => reduction_gap = f64::INFINITY,
            }
        }

        let delayed_run = |schedule: DelaySchedule, label: String, warnings: &mut Vec<String>| {
            let d = schedule.bound;
            let steps = step_size_async(h, d, &vec![1.0; inst.n_agents()])
                .map_err(|e| err(&e))?
                .scaled(s);
            let budget = (cfg.budget_factor * ((d + 1) * (d + 1) * k6) as f64).ceil() as usize;
            let mut ac = RunConfig::asynchronous(h, schedule, steps.clone(), budget);
            ac.tol = None;
            ac.record = RecordLevel::Scalars;
            if s > 1.0 {
                warnings.push(format!(
                    "{label}: step sizes violate 1/c_i >= h (D+1)^2; running anyway"
                ));
                ac.allow_step_violation = true;
            }
            let t = Instant::now();
            let tr = run(&inst, &ac).map_err(|e| err(&e))?;
            summarize(
                label,
                &tr,
                &lambda_star,
                psi_star,
                h,
                &steps,
                d,
                checkpoint,
                t.elapsed().as_secs_f64(),
                false,
            )
            .map_err(|e| err(&e))
        };
        let mut delayed = Vec::new();
        for d in DELAYS {
            delayed.push(delayed_run(
                DelaySchedule::worst_case(d),
                format!("worst D={d}"),
                &mut warnings,
            )?);
        }
        let mut random = Vec::new();
        for d in [3, 5] {
            random.push(delayed_run(
                DelaySchedule::random(d, cfg.seed),
                format!("random:{} D={d}", cfg.seed),
                &mut warnings,
            )?);
        }
        Ok(MarketRuns {
            h,
            step_scale: s,
            sync_trace: sync,
            lambda_star,
            psi_star,
            p_star: dv.p.to_scalar(),
            q_star: dv.q.to_scalar(),
            x_hat: rec.flat_x(),
            mismatch: rec.mismatch,
            max_residual: rec.max_residual(),
            checkpoint,
            sync: sync_sum,
            delayed,
            random,
            reduction_gap,
            warnings,
        })
    }

    fn all_runs(&self) -> impl Iterator<Item = &RunSummary> {
        std::iter::once(&self.sync)
            .chain(&self.delayed)
            .chain(&self.random)
    }
}

pub fn criterion_1a(m: &MarketRuns) -> CriterionResult {
    let gap = m
        .x_hat
        .iter()
        .zip(MARKET_X_TARGET)
        .fold(0.0_f64, |a, (x, t)| a.max((x - t).abs()));
    let x: Vec<String> = m.x_hat.iter().map(|v| format!("{v:.4}")).collect();
    CriterionResult::new(
        "1a",
        "market sync: recovered x",
        gap <= MARKET_X_TOL,
        format!(
            "x = [{}] after {} rounds, max gap {gap:.2e} (tol {MARKET_X_TOL}), mismatch {:.1e}, residual {:.1e}",
            x.join(", "),
            m.checkpoint,
            m.mismatch,
            m.max_residual
        ),
    )
    .metric("max_gap", gap)
    .metric("iterations", m.checkpoint as f64)
}

pub fn criterion_1b(m: &MarketRuns) -> CriterionResult {
    let gap = (m.psi_star - MARKET_PSI_TARGET).abs();
    CriterionResult::new(
        "1b",
        "market sync: dual value",
        gap <= MARKET_PSI_TOL,
        format!(
            "Psi = {:.6}, target {MARKET_PSI_TARGET} +/- {MARKET_PSI_TOL}; parts P = {:.6}, Q = {:.6}",
            m.psi_star, m.p_star, m.q_star
        ),
    )
    .metric("psi", m.psi_star)
    .metric("p", m.p_star)
    .metric("q", m.q_star)
}

pub fn criterion_2(m: &MarketRuns) -> CriterionResult {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut res = CriterionResult::new("2", "market async: convergence and delay ordering", true, String::new());
    for r in &m.delayed {
        let at = r.eps_checkpoint.unwrap_or(f64::NAN);
        let conv = r.eps_final.abs() <= ASYNC_EPS_TOL;
        let ordered = at >= prev - BOUND_TOL;
        ok &= conv && ordered;
        prev = at;
        parts.push(format!(
            "D={}: eps({})={at:.3e} final {:.1e} after {}",
            r.delay, m.checkpoint, r.eps_final, r.iterations
        ));
        res = res
            .metric(&format!("eps_checkpoint_d{}", r.delay), at)
            .metric(&format!("eps_final_d{}", r.delay), r.eps_final);
    }
    res.passed = ok;
    res.detail = parts.join("; ");
    res
}

pub fn criterion_3(m: &MarketRuns) -> CriterionResult {
    match &m.sync.sync_rate {
        Some(b) => CriterionResult::new(
            "3",
            "O(1/K) rate bound on the sync trace",
            b.min_slack >= -BOUND_TOL,
            format!("{} values of K, min slack {:.3e} at K = {}", b.count, b.min_slack, b.argmin_k),
        )
        .metric("min_slack", b.min_slack),
        None => CriterionResult::failed("3", "O(1/K) rate bound on the sync trace", "not evaluated"),
    }
}

pub fn criterion_4(m: &MarketRuns) -> CriterionResult {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut worst = f64::INFINITY;
    for r in m.delayed.iter().chain(&m.random) {
        match &r.delayed_rate {
            Some(b) => {
                ok &= b.min_slack >= -BOUND_TOL && b.first_k == r.delay.div_ceil(2);
                worst = worst.min(b.min_slack);
                parts.push(format!(
                    "{}: K >= {}, min slack {:.2e} at K = {}",
                    r.label, b.first_k, b.min_slack, b.argmin_k
                ));
            }
            None => ok = false,
        }
    }
    CriterionResult::new("4", "delayed rate bound on the async traces", ok, parts.join("; "))
        .metric("min_slack", worst)
}

pub fn criterion_5(m: &MarketRuns) -> CriterionResult {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut eq_gap = 0.0_f64;
    let mut parts = Vec::new();
    for r in m.all_runs() {
        ok &= r.window_sum.min_slack >= -BOUND_TOL && r.weighted_window_sum.min_slack >= -BOUND_TOL;
        worst = worst.min(r.window_sum.min_slack).min(r.weighted_window_sum.min_slack);
        if r.delay == 0 {
            let (l, rr) = r.window_sum_sides;
            let gap = (l - rr).abs() / rr.abs().max(1.0);
            eq_gap = eq_gap.max(gap);
            ok &= gap <= EQUALITY_TOL;
        }
        parts.push(format!(
            "{}: window {:.3e} <= {:.3e}, weighted {:.3e} <= {:.3e}",
            r.label, r.window_sum_sides.0, r.window_sum_sides.1, r.weighted_window_sum_sides.0, r.weighted_window_sum_sides.1
        ));
    }
    parts.push(format!("D=0 relative gap in the window sums {eq_gap:.1e}"));
    CriterionResult::new("5", "delay window sum inequalities", ok, parts.join("; "))
        .metric("min_slack", worst)
        .metric("d0_equality_gap", eq_gap)
}

pub fn criterion_6(m: &MarketRuns) -> CriterionResult {
    CriterionResult::new(
        "6",
        "D = 0 async reproduces sync",
        m.reduction_gap <= REDUCTION_TOL,
        format!(
            "max coordinate gap {:.1e} over {} rounds (tol {REDUCTION_TOL:.0e})",
            m.reduction_gap, m.checkpoint
        ),
    )
    .metric("max_gap", m.reduction_gap)
}

/// A random member of the nonsmooth catalog of dimension `dim`.
pub fn random_catalog_member(rng: &mut ChaCha8Rng, dim: usize) -> ProxFriendly<f64> {
    let random_box = |rng: &mut ChaCha8Rng| {
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for _ in 0..dim {
            let a: f64 = rng.gen_range(-5.0..5.0);
            let w: f64 = rng.gen_range(0.0..5.0);
            let r: f64 = rng.gen();
            lo.push(if r < 0.15 { f64::NEG_INFINITY } else { a });
            hi.push(if r > 0.85 { f64::INFINITY } else { a + w });
        }
        BoxSet::new(lo, hi).expect("ordered bounds")
    };
    match rng.gen_range(0..6) {
        0 => ProxFriendly::Zero,
        1 => ProxFriendly::L1 {
            weight: rng.gen_range(0.01..5.0),
        },
        2 => ProxFriendly::IndicatorBox(random_box(rng)),
        3 => ProxFriendly::L1PlusBox {
            weight: rng.gen_range(0.01..5.0),
            bounds: random_box(rng),
        },
        4 => {
            let d = (0..dim)
                .map(|_| if rng.gen::<f64>() < 0.1 { 0.0 } else { rng.gen_range(0.1..5.0) })
                .collect();
            let q = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            ProxFriendly::Quadratic(QuadraticFunction::diagonal(d, q, 0.0).expect("diagonal"))
        }
        _ => {
            // B B^T + 0.1 I
            let b: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut qm = Mat::scaled_identity(dim, 0.1);
            for i in 0..dim {
                for j in 0..dim {
                    for k in 0..dim {
                        qm[(i, j)] += b[i * dim + k] * b[j * dim + k];
                    }
                }
            }
            for i in 0..dim {
                for j in 0..i {
                    qm[(i, j)] = qm[(j, i)];
                }
            }
            let q = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            ProxFriendly::Quadratic(QuadraticFunction::new(qm, q, 0.0).expect("symmetric"))
        }
    }
}

pub fn criterion_7(seed: u64) -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut failures = 0;
    for _ in 0..MOREAU_CASES {
        let dim = rng.gen_range(1..=4);
        let g = random_catalog_member(&mut rng, dim);
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let alpha: f64 = rng.gen_range(0.05..10.0);
        let v: Vec<f64> = u.iter().map(|x| x / alpha).collect();
        let conj = oracle::direct_conjugate_prox(&g, &v, 1.0 / alpha);
        let Ok(p) = g.prox(&u, alpha) else {
            failures += 1;
            continue;
        };
        let err = (0..dim)
            .map(|m| (alpha * conj[m] + p[m] - u[m]).abs())
            .fold(0.0_f64, f64::max);
        worst = worst.max(err);
    }
    CriterionResult::new(
        "7",
        "Moreau identity on the catalog",
        failures == 0 && worst <= MOREAU_TOL,
        format!("{MOREAU_CASES} cases, max error {worst:.2e} (tol {MOREAU_TOL:.0e}), {failures} prox errors"),
    )
    .metric("max_error", worst)
}

/// Smooth parts used by the gradient checks: the five market functions, a
/// boxed quadratic and a coupled two-dimensional quadratic.
pub fn smooth_test_functions() -> Vec<(String, SmoothConjugable<f64>)> {
    let mut out = Vec::new();
    let p = MarketParams::default();
    for (j, (&k, &t)) in p.uc_kappa.iter().zip(&p.uc_theta).enumerate() {
        let q = QuadraticFunction::scalar(k, t, 0.0).expect("scalar");
        out.push((format!("uc{}", j + 1), SmoothConjugable::quadratic(q, Domain::Whole).expect("whole")));
    }
    for (j, ((&pi, &s), &xm)) in p.user_pi.iter().zip(&p.user_varsigma).zip(&p.user_xmax).enumerate() {
        let u = PiecewiseQuadraticUtility::new(pi, s).expect("utility");
        let dom = Domain::Box(BoxSet::interval(0.0, xm).expect("interval"));
        out.push((format!("user{}", j + 1), SmoothConjugable::utility(u, dom).expect("utility")));
    }
    let q = QuadraticFunction::scalar(0.7, -1.0, 0.5).expect("scalar");
    let dom = Domain::Box(BoxSet::interval(-2.0, 3.0).expect("interval"));
    out.push(("boxed quadratic".into(), SmoothConjugable::quadratic(q, dom).expect("box")));
    let qm = Mat::from_rows(&[vec![2.0, 0.6], vec![0.6, 1.0]]).expect("rows");
    let q = QuadraticFunction::new(qm, vec![0.3, -0.2], 0.0).expect("quadratic");
    out.push(("coupled quadratic".into(), SmoothConjugable::quadratic(q, Domain::Whole).expect("whole")));
    out
}

fn conj(f: &SmoothConjugable<f64>, u: &[f64]) -> f64 {
    f.conjugate_value(u).map(|v| v.to_scalar()).unwrap_or(f64::NAN)
}

/// The conjugate argmax is piecewise affine for every test function, so a
/// point is in the smooth region when the second difference of the argmax
/// around it vanishes in every direction.
fn in_smooth_region(f: &SmoothConjugable<f64>, u: &[f64], delta: f64) -> bool {
    let z0 = f.conjugate_argmax(u).expect("argmax");
    (0..u.len()).all(|j| {
        let mut a = u.to_vec();
        let mut b = u.to_vec();
        a[j] -= delta;
        b[j] += delta;
        let za = f.conjugate_argmax(&a).expect("argmax");
        let zb = f.conjugate_argmax(&b).expect("argmax");
        (0..z0.len()).all(|m| (za[m] - 2.0 * z0[m] + zb[m]).abs() <= 1e-9 * (1.0 + z0[m].abs()))
    })
}

pub fn criterion_8(seed: u64) -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x8);
    let fns = smooth_test_functions();
    let mut worst_fd = 0.0_f64;
    let mut accepted = 0;
    let mut draws = 0;
    while accepted < FD_POINTS && draws < 100 * FD_POINTS {
        draws += 1;
        let (_, f) = &fns[rng.gen_range(0..fns.len())];
        let u: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-30.0..30.0)).collect();
        if !in_smooth_region(f, &u, 1e-3) {
            continue;
        }
        accepted += 1;
        let z = f.conjugate_argmax(&u).expect("argmax");
        let fd = oracle::central_difference(|v| conj(f, v), &u, FD_STEP);
        for (a, b) in z.iter().zip(&fd) {
            worst_fd = worst_fd.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    let mut worst_lip = f64::NEG_INFINITY;
    for _ in 0..LIPSCHITZ_PAIRS {
        let (_, f) = &fns[rng.gen_range(0..fns.len())];
        let u: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-30.0..30.0)).collect();
        let v: Vec<f64> = (0..f.dim()).map(|_| rng.gen_range(-30.0..30.0)).collect();
        let zu = f.conjugate_argmax(&u).expect("argmax");
        let zv = f.conjugate_argmax(&v).expect("argmax");
        let lhs = crate::linalg::dist_sq(&zu, &zv).sqrt();
        let rhs = crate::linalg::dist_sq(&u, &v).sqrt() / f.strong_convexity();
        worst_lip = worst_lip.max(lhs - rhs * (1.0 + 1e-12));
    }
    let ok = accepted == FD_POINTS && worst_fd <= FD_RTOL && worst_lip <= 1e-12;
    CriterionResult::new(
        "8",
        "conjugate gradient and Lipschitz checks",
        ok,
        format!(
            "{accepted} smooth points, max relative FD gap {worst_fd:.2e} (tol {FD_RTOL:.0e}); \
             {LIPSCHITZ_PAIRS} pairs, max |dz| - |du|/sigma = {worst_lip:.2e}"
        ),
    )
    .metric("max_fd_gap", worst_fd)
    .metric("max_lipschitz_excess", worst_lip)
}

/// Two scalar agents with `(x1 - 3)^2` and `2 (x2 - 1)^2` on `[-10, 10]`
/// sharing `x1 + x2 = 2`; the second agent reads the row scaled by 2.
pub fn two_agent_instance() -> ProblemInstance<f64> {
    let fs = [(1.0, -6.0, 9.0), (2.0, -4.0, 2.0)];
    let agents = fs
        .iter()
        .enumerate()
        .map(|(i, &(k, l, o))| {
            let t = (i + 1) as f64;
            let blocks = [(0, Mat::scalar(t)), (1, Mat::scalar(t))].into_iter().collect();
            let f = SmoothConjugable::quadratic(
                QuadraticFunction::scalar(k, l, o).expect("scalar"),
                Domain::Whole,
            )
            .expect("whole");
            let omega = Domain::Box(BoxSet::interval(-10.0, 10.0).expect("interval"));
            AgentSpec::new(i, f, ProxFriendly::Zero, omega, ConstraintBlock::new(i, blocks, vec![2.0 * t]))
                .expect("agent")
        })
        .collect();
    ProblemInstance::new(Topology::complete(2), agents, 1, 1).expect("valid instance")
}

pub fn criterion_9() -> CriterionResult {
    let title = "brute-force oracle on a two-agent problem";
    let inst = two_agent_instance();
    let h = match lipschitz_constant(&inst) {
        Ok(l) => l.h,
        Err(e) => return CriterionResult::failed("9", title, &e.to_string()),
    };
    let mut cfg = RunConfig::sync(h, 1_000_000);
    cfg.tol = Some(1e-12);
    let tr = match run(&inst, &cfg) {
        Ok(t) => t,
        Err(e) => return CriterionResult::failed("9", title, &e.to_string()),
    };
    let psi = tr.final_psi().to_scalar();
    let (_, grid) = oracle::grid_minimize(
        |l| oracle::dense_psi(&inst, l),
        &[-20.0; 4],
        &[20.0; 4],
        9,
        80,
        0.6,
    );
    let x = recover_primal(&inst, &tr.lambda_final).map(|r| r.flat_x()).unwrap_or_default();
    let a = Mat::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).expect("rows");
    let kkt = oracle::equality_qp(&Mat::from_diagonal(&[2.0, 4.0]), &[-6.0, -4.0], &a, &[2.0, 4.0]);
    let x_gap = if x.len() == 2 { dist_inf(&x, &kkt) } else { f64::INFINITY };
    let psi_gap = (psi - grid).abs();
    CriterionResult::new(
        "9",
        title,
        psi_gap <= GRID_TOL && x_gap <= KKT_TOL,
        format!(
            "Psi engine {psi:.8} vs grid {grid:.8} (gap {psi_gap:.1e}); x = [{:.6}, {:.6}] vs KKT [{:.6}, {:.6}] (gap {x_gap:.1e}); {} rounds",
            x.first().copied().unwrap_or(f64::NAN),
            x.get(1).copied().unwrap_or(f64::NAN),
            kkt[0],
            kkt[1],
            tr.iterations()
        ),
    )
    .metric("psi_gap", psi_gap)
    .metric("x_gap", x_gap)
}

pub fn criterion_10() -> CriterionResult {
    let title = "consensus on a 3-agent path";
    let doc = ConsensusDoc::default();
    let a: Vec<f64> = doc
        .locals
        .iter()
        .map(|l| match &l.f.base {
            crate::problem::io::SmoothDoc::Quadratic(q) => -q.linear[0] / q.curvature[0][0],
            _ => f64::NAN,
        })
        .collect();
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let res = doc
        .build::<f64>()
        .map_err(|e| e.to_string())
        .and_then(|inst| {
            let h = lipschitz_constant(&inst).map_err(|e| e.to_string())?.h;
            let mut cfg = RunConfig::sync(h, 1_000_000);
            cfg.tol = Some(1e-12);
            let tr = run(&inst, &cfg).map_err(|e| e.to_string())?;
            let x = recover_primal(&inst, &tr.lambda_final).map_err(|e| e.to_string())?.flat_x();
            Ok((x, tr.iterations()))
        });
    let (x, iters) = match res {
        Ok(v) => v,
        Err(e) => return CriterionResult::failed("10", title, &e),
    };
    let mut pair = 0.0_f64;
    for i in 0..x.len() {
        for j in 0..i {
            pair = pair.max((x[i] - x[j]).abs());
        }
    }
    let to_mean = x.iter().fold(0.0_f64, |m, v| m.max((v - mean).abs()));
    CriterionResult::new(
        "10",
        title,
        pair <= CONSENSUS_TOL && to_mean <= CONSENSUS_TOL,
        format!("x = {x:?} after {iters} rounds, mean {mean}; pairwise gap {pair:.1e}, gap to mean {to_mean:.1e}"),
    )
    .metric("pairwise_gap", pair)
    .metric("mean_gap", to_mean)
}

/// Runs every criterion.
pub fn run_all(cfg: &ReproConfig) -> ReproSummary {
    let mut criteria = Vec::new();
    let mut warnings = Vec::new();
    match MarketRuns::compute(cfg) {
        Ok(m) => {
            warnings.extend(m.warnings.iter().cloned());
            criteria.extend([
                criterion_1a(&m),
                criterion_1b(&m),
                criterion_2(&m),
                criterion_3(&m),
                criterion_4(&m),
                criterion_5(&m),
                criterion_6(&m),
            ]);
        }
        Err(e) => {
            for (id, t) in [
                ("1a", "market sync: recovered x"),
                ("1b", "market sync: dual value"),
                ("2", "market async: convergence and delay ordering"),
                ("3", "O(1/K) rate bound on the sync trace"),
                ("4", "delayed rate bound on the async traces"),
                ("5", "delay window sum inequalities"),
                ("6", "D = 0 async reproduces sync"),
            ] {
                criteria.push(CriterionResult::failed(id, t, &e));
            }
        }
    }
    criteria.push(criterion_7(cfg.seed));
    criteria.push(criterion_8(cfg.seed));
    criteria.push(criterion_9());
    criteria.push(criterion_10());
    ReproSummary {
        step_scale: cfg.step_scale,
        seed: cfg.seed,
        warnings,
        criteria,
    }
}
