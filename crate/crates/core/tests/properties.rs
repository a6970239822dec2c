mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use smm::discrete::{q_both_ways, Policy};
use smm::hedging::{inner_product, optimize_basis, solve_hedge};
use smm::{
    conditional_q, evaluate, itas, markowitz_direction, markowitz_policy, merge_states, optimal_objective_value,
    q_of, smm_direction, smm_policy, tas, Objective,
};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(1000))]

    #[test]
    fn rank_one_identity(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_pair(&mut rng(seed), n);
        let smm = smm_direction(&m);
        let mp = markowitz_direction(&m);
        let zeta2 = m.sharpe_sq();
        let bound = 1e-9 * (1.0 + mp.amax());
        prop_assert!((&smm - &mp / (1.0 + zeta2)).amax() <= bound);

        let direct = m.second_moment().clone().try_inverse().unwrap() * m.mu();
        prop_assert!((&smm - &direct).amax() <= 1e-9 * (1.0 + direct.amax()));
    }

    #[test]
    fn conditional_q_matches_itas(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_pair(&mut rng(seed), n);
        let q = conditional_q(&m);
        prop_assert!((0.0..1.0).contains(&q));
        prop_assert!((q - itas(m.sharpe_sq().sqrt()).powi(2)).abs() <= 1e-10);
    }

    #[test]
    fn second_moment_direction_delevers(seed in any::<u64>(), n in 1usize..=8) {
        let m = random_pair(&mut rng(seed), n);
        let smm = smm_direction(&m);
        let mp = markowitz_direction(&m);
        let ratio = smm.dot(&mp) / mp.dot(&mp);
        prop_assert!(ratio > 0.0 && ratio < 1.0);
        prop_assert!((&smm - &mp * ratio).amax() <= 1e-10 * (1.0 + mp.amax()));
    }
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn tas_itas_inverse_odd_monotone(h in -0.999f64..0.999, d in 1e-6f64..0.5, s in -50.0f64..50.0) {
        prop_assert!((itas(tas(h).unwrap()) - h).abs() <= 1e-12);
        prop_assert!((tas(itas(s)).unwrap() - s).abs() <= 1e-9 * (1.0 + s.abs()));
        prop_assert_eq!(tas(-h).unwrap(), -tas(h).unwrap());
        prop_assert_eq!(itas(-s), -itas(s));
        prop_assert!(itas(s + d) > itas(s));
        let h2 = (h + d).min(0.9999);
        prop_assert!(h2 <= h || tas(h2).unwrap() > tas(h).unwrap());
    }

    #[test]
    fn sharpe_optimum_increases_in_q(q in 1e-6f64..0.99, d in 1e-6f64..0.009, r in 0.01f64..10.0, rf in 0.0f64..0.1) {
        let obj = Objective::sharpe(r, rf).unwrap();
        prop_assert!(optimal_objective_value(q + d, &obj).unwrap() > optimal_objective_value(q, &obj).unwrap());
    }

    #[test]
    fn discrete_q_formulas_agree(seed in any::<u64>(), k in 1usize..=6, n in 1usize..=5) {
        let mkt = random_market(&mut rng(seed), k, n);
        let (a, b) = q_both_ways(&mkt);
        prop_assert!((a - b).abs() <= 1e-10);
        prop_assert!((0.0..1.0).contains(&a));
    }
}

proptest! {
    #![proptest_config(cfg(200))]

    #[test]
    fn smm_beats_equal_risk_perturbations(seed in any::<u64>(), k in 1usize..=5, n in 1usize..=4) {
        let mut r = rng(seed);
        let mkt = random_market(&mut r, k, n);
        let obj = Objective::sharpe(1.0, 0.0).unwrap();
        let best = evaluate(&mkt, &smm_policy(&mkt, &obj).unwrap(), 0.0).unwrap().sharpe.unwrap();
        for j in 0..50 {
            let eps = 10f64.powi(j % 5 - 3);
            let noise = random_policy(&mut r, k, n);
            let base = smm_policy(&mkt, &obj).unwrap();
            let w = Policy::new(base.weights.iter().zip(&noise.weights).map(|(a, b)| a + b * eps).collect()).unwrap();
            let risk = evaluate(&mkt, &w, 0.0).unwrap().risk;
            prop_assume!(risk > 0.0);
            let perf = evaluate(&mkt, &w.scaled(1.0 / risk), 0.0).unwrap();
            prop_assert!(best >= perf.sharpe.unwrap() - 1e-9, "perturbed {} beats {}", perf.sharpe.unwrap(), best);
        }
        if let Ok(mp) = markowitz_policy(&mkt, &obj) {
            let mp_sharpe = evaluate(&mkt, &mp, 0.0).unwrap().sharpe.unwrap();
            prop_assert!(best >= mp_sharpe - 1e-12);
        }
    }

    #[test]
    fn evaluation_is_homogeneous(seed in any::<u64>(), k in 1usize..=5, n in 1usize..=4) {
        let mut r = rng(seed);
        let mkt = random_market(&mut r, k, n);
        let pol = random_policy(&mut r, k, n);
        let base = evaluate(&mkt, &pol, 0.0).unwrap();
        for c in [-2.0, 0.5, 3.0] {
            let p = evaluate(&mkt, &pol.scaled(c), 0.0).unwrap();
            prop_assert!(rel_err(p.mean, c * base.mean) <= 1e-12 || (p.mean - c * base.mean).abs() <= 1e-14);
            prop_assert!(rel_err(p.second_moment, c * c * base.second_moment) <= 1e-12);
            prop_assert!(rel_err(p.risk, c.abs() * base.risk) <= 1e-6);
        }
    }

    #[test]
    fn kelly_hansen_squared_is_q(seed in any::<u64>(), k in 1usize..=5, n in 1usize..=4) {
        let mkt = random_market(&mut rng(seed), k, n);
        let perf = evaluate(&mkt, &smm_policy(&mkt, &Objective::Kelly).unwrap(), 0.0).unwrap();
        prop_assert!((perf.hansen * perf.hansen - q_of(&mkt).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn merging_never_raises_q(seed in any::<u64>(), k in 2usize..=6, n in 1usize..=4, pick in any::<u64>()) {
        let mkt = random_market(&mut rng(seed), k, n);
        let mut subset: Vec<usize> = (0..k).filter(|i| (pick >> i) & 1 == 1).collect();
        if subset.len() < 2 {
            subset = vec![0, k - 1];
        }
        let (_, dq) = merge_states(&mkt, &subset).unwrap();
        prop_assert!(dq <= 1e-12);
    }

    #[test]
    fn kelly_and_mean_variance_values(seed in any::<u64>(), k in 1usize..=5, n in 1usize..=4, lambda in 0.1f64..5.0) {
        let mkt = random_market(&mut rng(seed), k, n);
        let q = q_of(&mkt).unwrap();
        let kelly = smm_policy(&mkt, &Objective::Kelly).unwrap();
        let g = |c: f64| Objective::Kelly.value(&evaluate(&mkt, &kelly.scaled(c), 0.0).unwrap()).unwrap();
        prop_assert!((g(1.0) - q / 2.0).abs() <= 1e-10);
        prop_assert!(g(0.9) < g(1.0) && g(1.1) < g(1.0));

        let mv = Objective::mean_variance(lambda).unwrap();
        let achieved = mv.value(&evaluate(&mkt, &smm_policy(&mkt, &mv).unwrap(), 0.0).unwrap()).unwrap();
        let expected = lambda / 4.0 * q / (1.0 - q);
        prop_assert!((achieved - expected).abs() <= 1e-10 * (1.0 + expected));
        prop_assert!((optimal_objective_value(q, &mv).unwrap() - expected).abs() <= 1e-10 * (1.0 + expected));
    }

    #[test]
    fn hedge_split_and_orthogonality(seed in any::<u64>(), k in 1usize..=4, n in 1usize..=4, m in 1usize..=3) {
        let mut r = rng(seed);
        let mkt = random_market(&mut r, k, n);
        prop_assume!(m < k * n);
        let cs = random_constraints(&mut r, &mkt, m);
        let (pol, sol) = match solve_hedge(&mkt, &cs, &Objective::Kelly) {
            Ok(x) => x,
            Err(smm::SmmError::SingularConstraintSystem { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        let q = q_of(&mkt).unwrap();
        prop_assert!((q - sol.q_g - sol.spanned_q).abs() <= 1e-10);
        for c in &cs {
            prop_assert!(inner_product(&pol, &c.g, &mkt).unwrap().abs() <= 1e-9);
        }
        // One fewer constraint never loses more.
        if m > 1 {
            let (_, fewer) = solve_hedge(&mkt, &cs[..m - 1], &Objective::Kelly).unwrap();
            prop_assert!(fewer.q_g >= sol.q_g - 1e-12);
        }
        // The spanned part is the optimum over {A⁻¹g_j}.
        let basis: Vec<Policy> = cs
            .iter()
            .map(|c| Policy::new(mkt.states().iter().zip(&c.g.weights).map(|(s, g)| s.solve_second_moment(g)).collect()).unwrap())
            .collect();
        if let Ok(opt) = optimize_basis(&mkt, &basis, &Objective::Kelly) {
            prop_assert!((opt.hansen_sq - sol.spanned_q).abs() <= 1e-10);
        }
    }

    #[test]
    fn basis_with_smm_direction_attains_q(seed in any::<u64>(), k in 1usize..=4, n in 1usize..=4) {
        prop_assume!(k * n >= 2);
        let mut r = rng(seed);
        let mkt = random_market(&mut r, k, n);
        let direction = Policy::new(mkt.states().iter().map(smm_direction).collect()).unwrap();
        let basis = vec![direction, random_policy(&mut r, k, n)];
        let opt = optimize_basis(&mkt, &basis, &Objective::Kelly).unwrap();
        prop_assert!((opt.hansen_sq - q_of(&mkt).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn inner_product_is_bilinear_and_symmetric(seed in any::<u64>(), k in 1usize..=4, n in 1usize..=4, a in -3.0f64..3.0) {
        let mut r = rng(seed);
        let mkt = random_market(&mut r, k, n);
        let (x, y, z) = (random_policy(&mut r, k, n), random_policy(&mut r, k, n), random_policy(&mut r, k, n));
        let ip = |u: &Policy, v: &Policy| inner_product(u, v, &mkt).unwrap();
        let combo = Policy::new(x.weights.iter().zip(&y.weights).map(|(u, v)| u * a + v).collect()).unwrap();
        let lhs = ip(&combo, &z);
        let rhs = a * ip(&x, &z) + ip(&y, &z);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
        prop_assert!((ip(&x, &y) - ip(&y, &x)).abs() <= 1e-12 * (1.0 + ip(&x, &y).abs()));
        prop_assert!(ip(&x, &x) > 0.0);
    }
}

#[test]
fn zero_mean_state_contributes_nothing() {
    let mut r = rng(3);
    let m = random_pair(&mut r, 3);
    let z = smm::MomentPair::from_covariance(DVector::zeros(3), m.sigma().clone()).unwrap();
    assert_eq!(conditional_q(&z), 0.0);
    assert_eq!(smm_direction(&z).amax(), 0.0);
}
