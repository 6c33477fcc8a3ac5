use hycast::geomsim::{sample_cache, PointKind, PointList};
use hycast::hybrid;
use hycast::multicast::MulticastModel;
use hycast::optimizer::{optimize_with, OptimizerOptions};
use hycast::popularity::{homotopy_popularity, zipf};
use hycast::scenario::{Policy, Scenario, CAPACITY_SLACK};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small(n_files: usize, capacity: usize, skew: f64) -> Scenario {
    Scenario {
        n_files,
        cache_capacity: capacity,
        zipf_skew: skew,
        ..Scenario::reference()
    }
}

/// Cache weights in [0, 1] scaled down, if needed, to fit the capacity.
fn feasible_weights(raw: Vec<f64>, capacity: usize) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    let scale = if total > capacity as f64 { capacity as f64 / total } else { 1.0 };
    raw.into_iter().map(|p| (p * scale).min(1.0)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homotopy_stays_a_distribution(n in 1usize..300, theta in 0.0f64..1.5) {
        let b = homotopy_popularity(n, theta, 1.5).unwrap();
        let sum: f64 = b.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
        prop_assert!(b.probs().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn policy_json_round_trip_is_exact(
        p in prop::collection::vec(0.0f64..=1.0, 1..20),
        u in 1usize..9,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let beta = p.iter().map(|_| rand::RngExt::random::<f64>(&mut rng) * 3.0).collect();
        let policy = Policy { cache_weights: p, beta, mux_order: u };
        let back = Policy::from_json_str(&policy.to_json_string()).unwrap();
        prop_assert_eq!(back, policy);
    }

    #[test]
    fn point_dump_round_trip_is_exact(
        rows in prop::collection::vec((0usize..3, -1e6f64..1e6, -1e6f64..1e6), 0..40),
    ) {
        let kinds = [PointKind::Hn, PointKind::Bs, PointKind::Ue];
        let list = PointList { points: rows.into_iter().map(|(k, x, y)| (kinds[k], [x, y])).collect() };
        let back: PointList = list.to_string().parse().unwrap();
        prop_assert_eq!(back, list);
    }

    #[test]
    fn cache_draws_fill_every_slot(
        raw in prop::collection::vec(0.0f64..=1.0, 1..30),
        capacity in 1usize..6,
        seed in any::<u64>(),
    ) {
        let p = feasible_weights(raw, capacity);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let draw = sample_cache(&p, capacity, &mut rng).unwrap();
            prop_assert_eq!(draw.len(), capacity);
            prop_assert!(draw.files.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(draw.files.iter().all(|&f| p[f] > 0.0));
            // Certain files are always present.
            prop_assert!(p.iter().enumerate().filter(|(_, &x)| x == 1.0).all(|(f, _)| draw.contains(f)));
        }
    }

    #[test]
    fn more_caching_never_hurts(p in 0.01f64..0.99, beta in 0.005f64..2.0, others in 0.0f64..3.0) {
        let model = MulticastModel::new(&Scenario::reference());
        let lo = model.file_outage(p, beta, beta + others).unwrap();
        let hi = model.file_outage((p + 0.01).min(1.0), beta, beta + others).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo));
        prop_assert!(hi <= lo + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hybrid_outage_beats_each_layer(
        raw in prop::collection::vec(0.0f64..=1.0, 5),
        beta in prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..0.5], 5),
        u in 1usize..9,
    ) {
        let s = small(5, 2, 0.8);
        let policy = Policy { cache_weights: feasible_weights(raw, 2), beta, mux_order: u };
        let m = hybrid::evaluate(&s, &policy, &zipf(5, 0.8).unwrap()).unwrap();
        prop_assert!(m.o_tot <= m.o_uc.min(m.o_mc) + 1e-15);
        prop_assert!(m.w_tot >= m.w_mc_eff && m.w_mc_eff >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn optimizer_output_is_feasible(n in 2usize..5, capacity in 1usize..3, skew in 0.0f64..1.2) {
        let s = small(n, capacity.min(n - 1), skew);
        let opt = optimize_with(&s, &OptimizerOptions::default()).unwrap();
        let policy = &opt.policy;
        prop_assert!(policy.validate(&s).is_ok());
        let total: f64 = policy.cache_weights.iter().sum();
        prop_assert!(total <= s.cache_capacity as f64 + CAPACITY_SLACK);
        prop_assert!(policy.beta.iter().all(|b| *b >= 0.0));
        // Never worse than serving everything by unicast.
        let (_, spuc) = hybrid::best_spuc_baseline(&s).unwrap();
        prop_assert!(opt.metrics.w_tot <= spuc.w_tot * (1.0 + 1e-9));
    }
}
