use pirlab_core::bounds::optimal_download_cost;
use pirlab_core::cache::{self, encode_cache, memory_share_cost, plan_suffix, LocalDatabases};
use pirlab_core::scheme::{message_symmetry_holds, round_counts_hold, PirShape, Variant};
use pirlab_core::{MessageStore, Rational, SchemeParams, SeededRandomness};
use proptest::prelude::*;

/// `(1 − p/q) · Σ_{k<K} N^{−k}` by direct summation.
fn expected_norm(n: i128, k: u32, p: i128, q: i128) -> Rational {
    let mut sum = Rational::ZERO;
    for j in 0..k {
        sum = sum + Rational::new(1, n.pow(j));
    }
    Rational::new(q - p, q) * sum
}

fn run(params: &SchemeParams, seed: u64) -> Vec<(bool, Rational)> {
    let mut rng = SeededRandomness::new(seed);
    let store = MessageStore::random(params, &mut rng);
    let z = encode_cache(&store, params).unwrap();
    (0..params.num_messages())
        .map(|theta| {
            let mut dbs = LocalDatabases::new(&store, params.num_databases());
            let (m, cost) = cache::retrieve(theta, params, &z, &mut dbs, &mut rng).unwrap();
            (m == *store.message(theta), cost.normalized())
        })
        .collect()
}

#[test]
fn grid_costs_match_direct_sum() {
    for n in 1..=4usize {
        for k in 1..=3usize {
            for q in 1..=4usize {
                for p in 0..=q {
                    let params = SchemeParams::new(n, k, p, q, 1).unwrap();
                    let want = expected_norm(n as i128, k as u32, p as i128, q as i128);
                    for (ok, cost) in run(&params, (n * 100 + k * 10 + q) as u64) {
                        assert!(ok, "decode failed at N={n} K={k} p/q={p}/{q}");
                        assert_eq!(cost, want, "N={n} K={k} p/q={p}/{q}");
                    }
                }
            }
        }
    }
}

#[test]
fn cost_strictly_decreases_with_cache() {
    for (n, k) in [(2, 2), (3, 2), (2, 3), (4, 1)] {
        let q = 4;
        let costs: Vec<Rational> = (0..=q)
            .map(|p| run(&SchemeParams::new(n, k, p, q, 1).unwrap(), 9)[0].1)
            .collect();
        assert!(costs.windows(2).all(|w| w[1] < w[0]), "{costs:?}");
    }
}

#[test]
fn measured_points_lie_on_the_sharing_line() {
    // (S, D) at S = sK is the α = 1 − s mix of the two endpoint schemes
    for (n, k) in [(2, 2), (2, 3), (3, 3)] {
        let d0 = run(&SchemeParams::new(n, k, 0, 1, 1).unwrap(), 1)[0].1;
        for (p, q) in [(1, 2), (1, 3), (2, 3), (3, 4)] {
            let params = SchemeParams::new(n, k, p, q, 1).unwrap();
            let alpha = Rational::new((q - p) as i128, q as i128);
            let kk = Rational::from(k);
            let (s, d) = memory_share_cost(Rational::ZERO, d0, kk, Rational::ZERO, alpha).unwrap();
            assert_eq!(s, params.storage());
            assert_eq!(d, run(&params, 2)[0].1);
            assert!(d >= optimal_download_cost(n, k, s).unwrap());
        }
    }
}

#[test]
fn multiplier_keeps_normalized_cost() {
    for m in 1..=3 {
        let params = SchemeParams::new(2, 2, 1, 2, m).unwrap();
        assert_eq!(params.message_len(), 8 * m);
        for (ok, cost) in run(&params, 4) {
            assert!(ok);
            assert_eq!(cost, Rational::new(3, 4));
        }
    }
}

fn instance() -> impl Strategy<Value = (SchemeParams, u64)> {
    (1usize..=3, 1usize..=3, 1usize..=4, 1usize..=2, any::<u64>())
        .prop_flat_map(|(n, k, q, m, seed)| (0..=q).prop_map(move |p| (SchemeParams::new(n, k, p, q, m).unwrap(), seed)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn retrieval_is_exact((params, seed) in instance()) {
        for (ok, cost) in run(&params, seed) {
            prop_assert!(ok);
            prop_assert_eq!(cost, optimal_download_cost(params.num_databases(), params.num_messages(), params.storage()).unwrap());
        }
    }

    #[test]
    fn wire_queries_stay_in_the_suffix((params, seed) in instance(), theta in 0usize..3) {
        let theta = theta % params.num_messages();
        let mut rng = SeededRandomness::new(seed);
        match plan_suffix(theta, &params, &mut rng, Variant::Faithful).unwrap() {
            None => prop_assert_eq!(params.cached_len(), params.message_len()),
            Some(plan) => {
                let shape = PirShape::for_params(&params).unwrap();
                for (q, local) in plan.wire_queries.iter().zip(plan.plan.queries()) {
                    prop_assert!(message_symmetry_holds(q, params.num_messages()));
                    prop_assert!(round_counts_hold(local, &shape));
                    for t in q.sums().iter().flat_map(|s| s.terms()) {
                        prop_assert!(t.index >= params.cached_len());
                        prop_assert!(t.index < params.message_len());
                    }
                }
            }
        }
    }
}
