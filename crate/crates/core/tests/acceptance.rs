//! One test per acceptance criterion. Tolerances are written out here
//! rather than taken from the library so that changing them is visible.

use std::sync::OnceLock;

use dualprox::repro::{self, MarketRuns, ReproConfig};

fn runs() -> &'static MarketRuns {
    static RUNS: OnceLock<MarketRuns> = OnceLock::new();
    RUNS.get_or_init(|| MarketRuns::compute(&ReproConfig::default()).expect("market runs"))
}

fn report(r: &repro::CriterionResult) {
    println!(
        "criterion {:>3} {}: {} | {}",
        r.id,
        if r.passed { "PASS" } else { "FAIL" },
        r.title,
        r.detail
    );
}

#[test]
fn c01a_market_sync_recovers_target_optimum() {
    let m = runs();
    report(&repro::criterion_1a(m));
    let target = [0.0, 150.0, 48.5, 50.2, 51.3];
    for (i, (x, t)) in m.x_hat.iter().zip(target).enumerate() {
        assert!((x - t).abs() <= 0.1, "agent {i}: x = {x}, target {t}");
    }
}

/// The target limit 756.53 equals `P(lambda*)`; the full dual value
/// `P + Q` adds the box support terms. Checked as stated and left failing.
#[test]
fn c01b_market_sync_dual_value_matches_target() {
    let m = runs();
    report(&repro::criterion_1b(m));
    println!("P(lambda*) = {:.6}, Q(lambda*) = {:.6}", m.p_star, m.q_star);
    assert!(
        (m.psi_star - 756.53).abs() <= 0.5,
        "Psi = {} (P = {}, Q = {})",
        m.psi_star,
        m.p_star,
        m.q_star
    );
}

#[test]
fn c02_market_async_converges_and_orders_by_delay() {
    let m = runs();
    report(&repro::criterion_2(m));
    let delays: Vec<usize> = m.delayed.iter().map(|r| r.delay).collect();
    assert_eq!(delays, vec![0, 3, 5, 10, 15]);
    let mut prev = f64::NEG_INFINITY;
    for r in &m.delayed {
        assert!(r.eps_final.abs() <= 1e-6, "D = {}: final eps {}", r.delay, r.eps_final);
        let at = r.eps_checkpoint.expect("run reaches the checkpoint");
        assert!(at >= prev - 1e-9, "D = {}: eps({}) = {at} < {prev}", r.delay, m.checkpoint);
        prev = at;
    }
}

#[test]
fn c03_sync_rate_bound() {
    let m = runs();
    report(&repro::criterion_3(m));
    let b = m.sync.sync_rate.as_ref().expect("sync rate evaluated");
    assert_eq!(b.first_k, 1);
    assert_eq!(b.count, m.checkpoint);
    assert!(b.min_slack >= -1e-9, "min slack {} at K = {}", b.min_slack, b.argmin_k);
}

#[test]
fn c04_delayed_rate_bound() {
    let m = runs();
    report(&repro::criterion_4(m));
    for r in m.delayed.iter().chain(&m.random) {
        let b = r.delayed_rate.as_ref().expect("delayed rate evaluated");
        assert_eq!(b.first_k, r.delay.div_ceil(2), "{}", r.label);
        assert!(b.min_slack >= -1e-9, "{}: min slack {} at K = {}", r.label, b.min_slack, b.argmin_k);
    }
}

#[test]
fn c05_window_sum_inequalities() {
    let m = runs();
    report(&repro::criterion_5(m));
    for r in std::iter::once(&m.sync).chain(&m.delayed).chain(&m.random) {
        assert!(r.window_sum.min_slack >= -1e-9, "{}: window slack {}", r.label, r.window_sum.min_slack);
        assert!(r.weighted_window_sum.min_slack >= -1e-9, "{}: weighted slack {}", r.label, r.weighted_window_sum.min_slack);
        if r.delay == 0 {
            let (l, rr) = r.window_sum_sides;
            assert!((l - rr).abs() <= 1e-12 * rr.max(1.0), "{}: {l} vs {rr}", r.label);
        }
    }
}

#[test]
fn c06_zero_delay_reproduces_sync() {
    let m = runs();
    report(&repro::criterion_6(m));
    assert!(m.reduction_gap <= 1e-12, "gap {}", m.reduction_gap);
}

#[test]
fn c07_moreau_identity_suite() {
    let r = repro::criterion_7(ReproConfig::default().seed);
    report(&r);
    assert!(r.metrics["max_error"] <= 1e-9);
    assert!(r.passed);
}

#[test]
fn c08_conjugate_gradient_checks() {
    let r = repro::criterion_8(ReproConfig::default().seed);
    report(&r);
    assert!(r.metrics["max_fd_gap"] <= 1e-5);
    assert!(r.metrics["max_lipschitz_excess"] <= 1e-12);
    assert!(r.passed);
}

#[test]
fn c09_brute_force_oracle_equivalence() {
    let r = repro::criterion_9();
    report(&r);
    assert!(r.metrics["psi_gap"] <= 1e-3);
    assert!(r.metrics["x_gap"] <= 1e-4);
}

#[test]
fn c10_consensus_on_path() {
    let r = repro::criterion_10();
    report(&r);
    assert!(r.metrics["pairwise_gap"] <= 1e-4);
    assert!(r.metrics["mean_gap"] <= 1e-4);
}
