use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dualprox::engine::{dual_objective, run, RecordLevel, RunConfig};
use dualprox::linalg::{dist_sq, dot};
use dualprox::oracle;
use dualprox::problem::lipschitz_constant;
use dualprox::repro::{random_catalog_member, smooth_test_functions, two_agent_instance};
use dualprox::scenarios::{build_market, ConsensusDoc, MarketParams};
use dualprox::toolkit::{prox_conjugate_via_moreau, BoxSet, Domain, PiecewiseQuadraticUtility, SmoothConjugable};
use dualprox::{Config32, Instance, Instance32};

fn instances() -> Vec<Instance> {
    vec![
        build_market(&MarketParams::default()).unwrap(),
        ConsensusDoc::default().build().unwrap(),
        two_agent_instance(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn moreau_conjugate_prox_matches_direct(seed in any::<u64>(), c in 0.01f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..=3);
        let g = random_catalog_member(&mut rng, dim);
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let ours = prox_conjugate_via_moreau(&g, &v, c).unwrap();
        let direct = oracle::direct_conjugate_prox(&g, &v, c);
        for (a, b) in ours.iter().zip(&direct) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{g:?}: {ours:?} vs {direct:?}");
        }
        prop_assert!(g.conjugate_value(&ours).unwrap().is_finite());
    }

    #[test]
    fn prox_is_nonexpansive(seed in any::<u64>(), alpha in 0.01f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = rng.gen_range(1..=3);
        let g = random_catalog_member(&mut rng, dim);
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let pu = g.prox(&u, alpha).unwrap();
        let pv = g.prox(&v, alpha).unwrap();
        prop_assert!(dist_sq(&pu, &pv) <= dist_sq(&u, &v) * (1.0 + 1e-12) + 1e-18);
    }

    #[test]
    fn conjugate_argmax_is_lipschitz_and_matches_value(j in 0usize..7, u in -40.0f64..40.0, v in -40.0f64..40.0) {
        let fns: Vec<_> = smooth_test_functions().into_iter().filter(|(_, f)| f.dim() == 1).collect();
        let (name, f) = &fns[j % fns.len()];
        let zu = f.conjugate_argmax(&[u]).unwrap()[0];
        let zv = f.conjugate_argmax(&[v]).unwrap()[0];
        let gap = (zu - zv).abs();
        // user 2 saturates inside its box, so its argmax jumps at u = 0
        if !(name == "user2" && u * v <= 0.0) {
            let bound = (u - v).abs() / f.strong_convexity();
            prop_assert!(gap <= bound * (1.0 + 1e-12) + 1e-12, "{name}: {gap} > {bound}");
        }
        // f*(u) = u z - f(z) at the argmax
        let val = f.conjugate_value(&[u]).unwrap().to_scalar();
        let direct = oracle::conjugate_value_1d(f, u);
        prop_assert!((val - direct).abs() <= 1e-6 * (1.0 + val.abs()), "{name}: {val} vs {direct}");
    }

    #[test]
    fn operator_and_adjoint_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for inst in instances() {
            let lay = inst.layout();
            let lam: Vec<f64> = (0..lay.len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
            for i in 0..inst.n_agents() {
                let x: Vec<f64> = (0..inst.m()).map(|_| rng.gen_range(-5.0..5.0)).collect();
                let cl = inst.apply_c(i, &lam);
                let mut ctx = vec![0.0; lay.len()];
                inst.apply_c_adjoint_acc(i, 1.0, &x, &mut ctx);
                prop_assert!((dot(&cl, &x) - dot(&lam, &ctx)).abs() <= 1e-10 * (1.0 + dot(&cl, &x).abs()));
                let dense = oracle::dense_c(&inst, i) * nalgebra::DVector::from_column_slice(&lam);
                for (a, b) in cl.iter().zip(dense.iter()) {
                    prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()));
                }
            }
        }
    }

    #[test]
    fn dual_value_matches_dense_evaluation(t1 in -5.0f64..5.0, t2 in -5.0f64..5.0, m1 in -3.0f64..3.0, m2 in -3.0f64..3.0) {
        let inst = two_agent_instance();
        let lam = [t1, t2, m1, m2];
        let ours = dual_objective(&inst, &lam).unwrap().psi.to_scalar();
        let dense = oracle::dense_psi(&inst, &lam);
        prop_assert!((ours - dense).abs() <= 1e-9 * (1.0 + dense.abs()), "{ours} vs {dense}");
    }
}

#[test]
fn operators_respect_neighborhoods() {
    for inst in instances() {
        let lay = inst.layout();
        for i in 0..inst.n_agents() {
            let c = oracle::dense_c(&inst, i);
            for l in 0..inst.n_agents() {
                let touches = lay.theta(l).any(|col| c.column(col).iter().any(|&v| v != 0.0));
                let allowed = l == i || inst.topology().are_adjacent(i, l);
                assert!(!touches || allowed, "C_{i} reads theta_{l}");
                let mu_touch = lay.mu(l).any(|col| c.column(col).iter().any(|&v| v != 0.0));
                assert_eq!(mu_touch, l == i);
            }
        }
    }
}

/// The strong convexity constant `2 varsigma` does not bound the argmax
/// slope of user 2: its utility saturates at 147.24 inside the box
/// [0, 147.29], so the argmax jumps from the threshold to the bound at 0.
#[test]
fn saturated_user_breaks_argmax_lipschitz_at_zero() {
    let u = PiecewiseQuadraticUtility::new(12.28_f64, 0.0417).unwrap();
    let f = SmoothConjugable::utility(u, Domain::Box(BoxSet::interval(0.0, 147.29).unwrap())).unwrap();
    let below: f64 = f.conjugate_argmax(&[-1e-9]).unwrap()[0];
    let above = f.conjugate_argmax(&[1e-9]).unwrap()[0];
    assert!((below - 12.28 / (2.0 * 0.0417)).abs() < 1e-6);
    assert_eq!(above, 147.29);
    assert!(above - below > 2e-9 / f.strong_convexity());
}

#[test]
fn single_precision_market_run() {
    let inst: Instance32 = build_market(&MarketParams::default()).unwrap();
    let h = lipschitz_constant(&inst).unwrap().h;
    let mut cfg: Config32 = RunConfig::sync(h, 20_000);
    cfg.tol = Some(1e-4);
    cfg.record = RecordLevel::Scalars;
    let tr = run(&inst, &cfg).unwrap();
    let x = dualprox::engine::recover_primal(&inst, &tr.lambda_final).unwrap().flat_x();
    for (a, b) in x.iter().zip([0.0f32, 150.0, 48.5, 50.2, 51.3]) {
        assert!((a - b).abs() < 0.5, "{x:?}");
    }
}
