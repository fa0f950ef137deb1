use std::collections::BTreeMap;

use dualprox::engine::*;
use dualprox::linalg::Mat;
use dualprox::oracle::dense_dpg_reference;
use dualprox::problem::{lipschitz_constant, AgentSpec, ConstraintBlock, ProblemInstance, Topology};
use dualprox::scalar::ExtReal;
use dualprox::scenarios::{build_market, MarketParams};
use dualprox::toolkit::{Domain, ProxFriendly, QuadraticFunction, SmoothConjugable};

fn quad(kappa: f64, lin: f64) -> SmoothConjugable<f64> {
    SmoothConjugable::quadratic(QuadraticFunction::scalar(kappa, lin, 0.0).unwrap(), Domain::Whole)
        .unwrap()
}

fn block(owner: usize, entries: &[(usize, f64)], rhs: f64) -> ConstraintBlock<f64> {
    let blocks: BTreeMap<usize, Mat<f64>> =
        entries.iter().map(|&(l, a)| (l, Mat::scalar(a))).collect();
    ConstraintBlock::new(owner, blocks, vec![rhs])
}

/// Two scalar agents, each requiring `x_1 - x_2 = 0`.
fn pair(g: ProxFriendly<f64>) -> ProblemInstance<f64> {
    let agents = (0..2)
        .map(|i| {
            AgentSpec::new(
                i,
                quad(0.5, 0.0),
                g.clone(),
                Domain::Whole,
                block(i, &[(0, 1.0), (1, -1.0)], 0.0),
            )
            .unwrap()
        })
        .collect();
    ProblemInstance::new(Topology::complete(2), agents, 1, 1).unwrap()
}

fn market() -> (ProblemInstance<f64>, f64) {
    let inst = build_market::<f64>(&MarketParams::default()).unwrap();
    let h = lipschitz_constant(&inst).unwrap().h;
    (inst, h)
}

#[test]
fn local_maximizer_examples() {
    let inst = pair(ProxFriendly::Zero);
    assert_eq!(local_maximizer(&inst, 0, &[0.0; 4]).unwrap(), vec![0.0]);

    // f = x^2 + x, A = [1], theta = -3: C lambda = 3, argmax (3 - 1) / 2
    let a = AgentSpec::new(0, quad(1.0, 1.0), ProxFriendly::Zero, Domain::Whole, block(0, &[(0, 1.0)], 0.0))
        .unwrap();
    let single = ProblemInstance::new(Topology::new(1, &[]).unwrap(), vec![a], 1, 1).unwrap();
    assert_eq!(local_maximizer(&single, 0, &[-3.0, 0.0]).unwrap(), vec![1.0]);
}

#[test]
fn grad_p_block_examples_and_errors() {
    let inst = pair(ProxFriendly::Zero);
    let zero = [0.0];
    let msg = |x: &'static [f64], snap| GradientMessage {
        sender: 1,
        receiver: 0,
        x_hat: x,
        snapshot: snap,
    };
    let (gt, gm) = grad_p_block(&inst, 0, &zero, 4, &[msg(&[0.0], 4)]).unwrap();
    assert_eq!((gt, gm), (vec![0.0], vec![-0.0]));

    let (gt, gm) = grad_p_block(&inst, 0, &[3.0], 4, &[msg(&[1.0], 4)]).unwrap();
    assert_eq!(gt, vec![-2.0]);
    assert_eq!(gm, vec![-3.0]);

    assert_eq!(
        grad_p_block(&inst, 0, &[3.0], 4, &[msg(&[1.0], 3)]),
        Err(EngineError::StaleMix {
            receiver: 0,
            expected: 4,
            got: 3
        })
    );
    assert_eq!(
        grad_p_block(&inst, 0, &[3.0], 4, &[]),
        Err(EngineError::MissingNeighbor { receiver: 0, sender: 1 })
    );
}

#[test]
fn market_gradient_vanishes_at_optimum() {
    let (inst, h) = market();
    let tr = run(&inst, &RunConfig::sync(h, 50_000)).unwrap();
    let lam = &tr.lambda_final;
    let x: Vec<Vec<f64>> = (0..5).map(|i| local_maximizer(&inst, i, lam).unwrap()).collect();
    assert!((x[1][0] - 150.0).abs() < 1e-3);
    for i in 0..5 {
        let msgs: Vec<_> = (0..5)
            .filter(|&l| l != i)
            .map(|l| GradientMessage {
                sender: l,
                receiver: i,
                x_hat: &x[l],
                snapshot: 0,
            })
            .collect();
        let (gt, _) = grad_p_block(&inst, i, &x[i], 0, &msgs).unwrap();
        assert!(gt[0].abs() < 1e-4, "agent {i}: {}", gt[0]);
    }
}

#[test]
fn dpg_step_fixed_point_and_identity_prox() {
    let inst = pair(ProxFriendly::Zero);
    let s = DualState::zeros(inst.layout());
    let r = dpg_step(&inst, &s, 0.5, &StepOptions::default()).unwrap();
    assert!(r.next.as_slice().iter().all(|&v| v == 0.0));
    assert_eq!(r.next.k, 1);

    // g = 0 on the whole space: q_i is the indicator of {0}, so its prox
    // sends mu to 0 while theta takes a plain gradient step
    let s = DualState::from_vec(inst.layout(), vec![1.0, -0.5, 0.25, 2.0], 7).unwrap();
    let c = 0.3;
    let r = dpg_step(&inst, &s, c, &StepOptions::default()).unwrap();
    let x: Vec<f64> = (0..2)
        .map(|i| local_maximizer(&inst, i, s.as_slice()).unwrap()[0])
        .collect();
    for i in 0..2 {
        assert_eq!(r.next.mu(i)[0], 0.0);
        assert_eq!(r.next.theta(i)[0], s.theta(i)[0] + c * (x[0] - x[1]));
    }
}

#[test]
fn market_matches_dense_reference() {
    let (inst, h) = market();
    let k = 400;
    let mut cfg = RunConfig::sync(h, k);
    cfg.tol = None;
    let tr = run(&inst, &cfg).unwrap();
    let reference = dense_dpg_reference(&inst, 1.0 / h, k).unwrap();
    for (j, r) in reference.iter().enumerate() {
        let ours = tr.lambda(j).unwrap();
        for (a, b) in ours.iter().zip(r) {
            assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()), "k = {j}: {a} vs {b}");
        }
    }
}

#[test]
fn zero_delay_reduces_to_sync() {
    let (inst, h) = market();
    let mut sync = RunConfig::sync(h, 300);
    sync.tol = None;
    let a = run(&inst, &sync).unwrap();
    let mut asy = RunConfig::asynchronous(
        h,
        DelaySchedule::worst_case(0),
        StepSizes::PerAgent(vec![1.0 / h; 5]),
        300,
    );
    asy.tol = None;
    let b = run(&inst, &asy).unwrap();
    assert_eq!(a.lambdas, b.lambdas);
    assert_eq!(a.psi, b.psi);
}

#[test]
fn history_underflow_is_reported() {
    let (inst, h) = market();
    let s = DualState::from_vec(inst.layout(), vec![0.0; 10], 9).unwrap();
    let hist = History::new(s, 5);
    let steps = step_size_async(h, 5, &[1.0; 5]).unwrap();
    let err = asyn_dpg_step(
        &inst,
        &hist,
        &DelaySchedule::worst_case(5),
        &steps,
        StepCheck::Enforce { h },
        &StepOptions::default(),
    )
    .unwrap_err();
    assert_eq!(err, EngineError::HistoryUnderflow { k: 9, tau: 4 });
}

#[test]
fn step_condition_is_enforced() {
    let (inst, h) = market();
    let mut cfg = RunConfig::asynchronous(
        h,
        DelaySchedule::worst_case(3),
        StepSizes::Uniform(1.0 / h),
        10,
    );
    assert!(matches!(run(&inst, &cfg), Err(EngineError::StepSizeViolation { .. })));
    cfg.allow_step_violation = true;
    let tr = run(&inst, &cfg).unwrap();
    assert!(tr.meta.step_condition_overridden);
}

#[test]
fn early_async_rounds_read_the_initial_point() {
    assert_eq!(DelaySchedule::worst_case(5).tau(1), 0);
    let (inst, h) = market();
    let steps = step_size_async(h, 5, &[1.0; 5]).unwrap();
    let mut cfg = RunConfig::asynchronous(h, DelaySchedule::worst_case(5), steps, 6);
    cfg.tol = None;
    let tr = run(&inst, &cfg).unwrap();
    assert_eq!(&tr.tau[1..], &[0, 0, 0, 0, 0, 0]);
    // with gradients frozen at lambda(0) and no box activity the theta
    // iterates move along a straight line
    let d1 = tr.lambda(1).unwrap()[0] - tr.lambda(0).unwrap()[0];
    let d2 = tr.lambda(2).unwrap()[0] - tr.lambda(1).unwrap()[0];
    assert!((d1 - d2).abs() < 1e-12);
}

#[test]
fn zero_iterations_keep_one_record() {
    let (inst, h) = market();
    let tr = run(&inst, &RunConfig::sync(h, 0)).unwrap();
    assert_eq!(tr.len(), 1);
    assert_eq!(tr.iterations(), 0);
    assert_eq!(tr.lambda_final, vec![0.0; 10]);
}

#[test]
fn parallel_rounds_match_sequential() {
    let (inst, h) = market();
    let steps = step_size_async(h, 3, &[1.0; 5]).unwrap();
    let mut cfg = RunConfig::asynchronous(h, DelaySchedule::random(3, 11), steps, 500);
    cfg.tol = None;
    let a = run(&inst, &cfg).unwrap();
    cfg.options.parallel = true;
    let b = run(&inst, &cfg).unwrap();
    assert_eq!(a.lambdas, b.lambdas);
}

#[test]
fn same_seed_same_trace() {
    let (inst, h) = market();
    let steps = step_size_async(h, 4, &[1.0; 5]).unwrap();
    let mut cfg = RunConfig::asynchronous(h, DelaySchedule::random(4, 99), steps, 300);
    cfg.tol = None;
    let a = run(&inst, &cfg).unwrap();
    let b = run(&inst, &cfg).unwrap();
    assert_eq!(a.lambdas, b.lambdas);
    assert_eq!(a.tau, b.tau);
    cfg.schedule = DelaySchedule::random(4, 100);
    let c = run(&inst, &cfg).unwrap();
    assert_ne!(a.tau, c.tau);
}

#[test]
fn l1_conjugate_outside_ball_is_infinite() {
    let inst = pair(ProxFriendly::l1(1.0).unwrap());
    let v = dual_objective(&inst, &[0.0, 0.0, 1.5, 0.0]).unwrap();
    assert_eq!(v.q, ExtReal::PosInf);
    assert_eq!(v.psi, ExtReal::PosInf);
    let v = dual_objective(&inst, &[0.0, 0.0, 0.5, -1.0]).unwrap();
    assert!(v.psi.is_finite());
}

#[test]
fn zero_instance_objective_and_recovery() {
    let inst = pair(ProxFriendly::Zero);
    let v = dual_objective(&inst, &[0.0; 4]).unwrap();
    assert_eq!(v.psi, ExtReal::Finite(0.0));
    let r = recover_primal(&inst, &[0.0; 4]).unwrap();
    assert_eq!(r.flat_x(), vec![0.0, 0.0]);
    assert_eq!(r.mismatch, 0.0);
}

#[test]
fn perturbed_optimum_reports_mismatch() {
    let (inst, h) = market();
    let tr = run(&inst, &RunConfig::sync(h, 50_000)).unwrap();
    let at = recover_primal(&inst, &tr.lambda_final).unwrap();
    assert!(at.mismatch < 1e-3);
    let lam: Vec<f64> = tr.lambda_final.iter().map(|v| v + 1e-2).collect();
    let off = recover_primal(&inst, &lam).unwrap();
    assert!(off.mismatch > at.mismatch);
    assert!(off.mismatch > 0.0);
}

#[test]
fn market_trace_bounds_hold() {
    let (inst, h) = market();
    let tr = run(&inst, &RunConfig::sync(h, 50_000)).unwrap();
    let rep = verify_trace(&tr).unwrap();
    assert!(rep.sync_rate.as_ref().unwrap().holds(1e-9));
    assert!(rep.descent.as_ref().unwrap().holds(1e-9));
    let (l, r) = rep.window_sum_sides;
    assert!((l - r).abs() <= 1e-12 * r.max(1.0), "{l} vs {r}");

    let steps = step_size_async(h, 5, &[1.0; 5]).unwrap();
    let mut cfg = RunConfig::asynchronous(h, DelaySchedule::worst_case(5), steps, 20_000);
    cfg.tol = None;
    cfg.record = RecordLevel::Scalars;
    let tr = run(&inst, &cfg).unwrap();
    let rep = verify_trace(&tr).unwrap();
    let t2 = rep.delayed_rate.as_ref().unwrap();
    assert_eq!(t2.first_k, 3);
    assert!(rep.all_hold(1e-9), "{:?}", (t2.min_slack, rep.weighted_window_sum.min_slack, rep.window_sum.min_slack));
}

#[test]
fn verification_needs_two_records() {
    let (inst, h) = market();
    let tr = run(&inst, &RunConfig::sync(h, 0)).unwrap();
    assert_eq!(
        verify_trace(&tr).unwrap_err(),
        EngineError::InsufficientTrace { need: 2, have: 1 }
    );
}

#[test]
fn csv_round_trip_and_truncation() {
    let (inst, h) = market();
    let steps = step_size_async(h, 2, &[1.0; 5]).unwrap();
    let mut cfg = RunConfig::asynchronous(h, DelaySchedule::random(2, 5), steps, 200);
    cfg.tol = None;
    let tr = run(&inst, &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (csv, meta) = tr.write(dir.path(), "t").unwrap();
    assert!(meta.exists());
    let back = read_trace(&csv).unwrap();
    assert_eq!(back.lambdas, tr.lambdas);
    assert_eq!(back.psi, tr.psi);
    assert_eq!(back.tau, tr.tau);
    assert_eq!(back.agent_step_sq, tr.agent_step_sq);
    assert_eq!(back.meta, tr.meta);

    let text = std::fs::read_to_string(&csv).unwrap();
    let cut: String = text.lines().take(50).collect::<Vec<_>>().join("\n");
    std::fs::write(&csv, cut).unwrap();
    assert!(matches!(read_trace(&csv), Err(EngineError::MalformedTrace(_))));
}
