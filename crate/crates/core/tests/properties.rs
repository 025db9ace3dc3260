use num_complex::Complex;
use pinch_core::channel::Users;
use pinch_core::multi_opt::{ao_solve_multi, build_q, surrogate, waveguide_power_allocate, SimplexPoint};
use pinch_core::noma::LinkBudget;
use pinch_core::params::ScenarioConfig;
use pinch_core::sim::{draw_hash, run_realizations, sample_users, summarize, AveragePolicy};
use pinch_core::single_opt::{ao_solve, bisection_position, fine_tune_phases, power_gains};
use pinch_core::{Error, Scheme};
use proptest::prelude::*;

type Cfg = ScenarioConfig<f64>;

fn gains(k: usize) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), k).prop_map(|v| v.into_iter().map(|(r, i)| Complex::new(r, i)).collect())
}

fn simplex(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.001f64..1.0, k).prop_map(|w| {
        let s: f64 = w.iter().sum();
        w.iter().map(|x| (x / s).sqrt()).collect()
    })
}

fn users(side: f64) -> impl Strategy<Value = Users<f64>> {
    any::<u64>().prop_map(move |i| sample_users(17, i, side))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn surrogate_is_tight_and_below(
        (h, zi, z) in (1usize..=5).prop_flat_map(|k| (gains(k), simplex(k), simplex(k)))
    ) {
        let q = build_q(&h);
        let scale = q.value(&zi).abs().max(q.value(&z).abs()).max(1.0);
        prop_assert!((surrogate(&q, &zi, &zi) - q.value(&zi)).abs() <= 1e-12 * scale);
        prop_assert!(surrogate(&q, &zi, &z) <= q.value(&z) + 1e-12 * scale);
    }

    #[test]
    fn q_matrix_is_symmetric_psd((h, z) in (1usize..=5).prop_flat_map(|k| (gains(k), simplex(k)))) {
        let q = build_q(&h);
        prop_assert!(q.is_symmetric());
        prop_assert!(q.value(&z) >= -1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn mm_stays_on_simplex_and_never_drops(hs in gains(3), hb in gains(3), frac in 0.0f64..1.0) {
        let (qs, qb) = (build_q(&hs), build_q(&hb));
        let uni = SimplexPoint::<f64>::uniform(3);
        let t_b = frac * qs.value(&uni.z).min(qb.value(&uni.z));
        let out = waveguide_power_allocate(&qs, &qb, t_b, &Cfg::default()).unwrap();
        let sum: f64 = out.point.beta.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
        prop_assert!(out.point.beta.iter().all(|&b| b >= 0.0));
        prop_assert!(out.q_s_history.windows(2).all(|w| w[1] >= w[0] - 1e-9 * w[0].abs()));
        prop_assert!(qs.value(&out.point.z) >= t_b && qb.value(&out.point.z) >= t_b);
    }

    #[test]
    fn bisection_returns_admissible_valid_layouts(u in users(20.0), alpha in 0.01f64..0.5) {
        let cfg = Cfg::default();
        let b = bisection_position(alpha, &u, &cfg).unwrap();
        prop_assert_eq!(b.layout.is_some(), b.lead.is_some());
        if let Some(l) = b.layout {
            prop_assert!(l.is_valid(&cfg));
            let g = power_gains(&l, &u, &cfg.wavelengths()).unwrap();
            prop_assert!(LinkBudget::new(&cfg).admits(&g, alpha));
        }
    }

    #[test]
    fn fine_tuning_keeps_layout_valid_and_gain(u in users(20.0)) {
        let cfg = Cfg::default();
        let w = cfg.wavelengths();
        let alpha = 0.1;
        if let Some(l) = bisection_position(alpha, &u, &cfg).unwrap().layout {
            let tuned = fine_tune_phases(&l, &u, alpha, &cfg).unwrap();
            prop_assert!(tuned.is_valid(&cfg));
            let (g0, g1) = (power_gains(&l, &u, &w).unwrap(), power_gains(&tuned, &u, &w).unwrap());
            prop_assert!(g1.g2_s >= g0.g2_s);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn single_ao_history_is_monotone(u in users(30.0), n in 1usize..=5, p in 0.0f64..20.0) {
        let cfg = Cfg::default().with_side(30.0).with_antennas(n).with_power_dbm(p);
        let s = ao_solve(&u, &cfg).unwrap();
        prop_assert!(s.history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        prop_assert!(s.layout.is_valid(&cfg));
        prop_assert!(s.iteration <= cfg.max_iters);
        if !s.feasible {
            prop_assert_eq!(s.semantic_se, 0.0);
        }
    }

    #[test]
    fn multi_ao_history_is_monotone(u in users(30.0), p in 0.0f64..20.0) {
        let cfg = Cfg::default().with_side(30.0).with_power_dbm(p);
        let s = ao_solve_multi(&u, &cfg).unwrap();
        prop_assert!(s.history.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        let sum: f64 = s.power.beta.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn draws_stay_in_region(seed in any::<u64>(), i in any::<u64>(), side in 1.0f64..100.0) {
        let u = sample_users(seed, i, side);
        for p in [u.semantic, u.bit] {
            prop_assert!(p.x.abs() <= side / 2.0 && p.y.abs() <= side / 2.0 && p.z == 0.0);
        }
        prop_assert_eq!(u, sample_users(seed, i, side));
    }
}

#[test]
fn schemes_share_user_drops() {
    let cfg = Cfg::default().with_seed(3);
    let hashes: Vec<u64> = Scheme::ALL
        .iter()
        .map(|&s| {
            let res = run_realizations(&cfg, s, 40).unwrap();
            let users: Vec<_> = res.iter().map(|r| r.users).collect();
            draw_hash(&users)
        })
        .collect();
    assert!(hashes.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn realizations_are_deterministic_and_consistent() {
    let cfg = Cfg::default().with_seed(8).with_power_dbm(0.0).with_side(40.0);
    for s in Scheme::ALL {
        let a = run_realizations(&cfg, s, 60).unwrap();
        let b = run_realizations(&cfg, s, 60).unwrap();
        assert_eq!(a, b);
        for r in &a {
            assert!(r.feasible || r.semantic_se == 0.0);
        }
        let (mean, outage) = summarize(&a, AveragePolicy::InfeasibleAsZero);
        assert!(mean >= 0.0 && (0.0..=1.0).contains(&outage));
    }
}

#[test]
fn invalid_configs_name_their_key() {
    let too_many = Cfg::default().with_antennas(5000).with_side(5.0);
    match run_realizations(&too_many, Scheme::PassSingle, 1) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "n_antennas"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(
        SimplexPoint::<f64>::from_beta(vec![0.5, 0.6]),
        Err(Error::NotOnSimplex(_))
    ));
    assert!("nope".parse::<Scheme>().is_err());
}
