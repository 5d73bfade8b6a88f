use pirlab_core::audit::{
    correctness_audit, eq2_audit, exact_query_distribution, lemma2_audit, privacy_tv_distance, sampled_privacy_check,
    QueryView,
};
use pirlab_core::scheme::{draw_permutations, message_symmetry_holds, Layout, PirShape, Variant};
use pirlab_core::{Rational, SchemeParams, SeededRandomness};
use proptest::prelude::*;

fn params(n: usize, k: usize, p: usize, q: usize) -> SchemeParams {
    SchemeParams::new(n, k, p, q, 1).unwrap()
}

#[test]
fn enumerable_instances_are_exactly_private() {
    for (n, k, p, q) in [(2, 2, 0, 1), (2, 2, 1, 2), (1, 2, 0, 1), (1, 3, 0, 1), (3, 1, 0, 1), (2, 1, 1, 3), (2, 2, 2, 2)] {
        let params = params(n, k, p, q);
        for db in 0..n {
            let r = privacy_tv_distance(&params, db, Variant::Faithful).unwrap();
            assert_eq!(r.tv(), Rational::ZERO, "N={n} K={k} s={p}/{q} db={db}");
        }
    }
}

#[test]
fn per_index_distributions_are_identical_maps() {
    let p = params(2, 2, 0, 1);
    for db in 0..2 {
        for view in [QueryView::Canonical, QueryView::Transmitted] {
            let a = exact_query_distribution(&p, 0, db, Variant::Faithful, view).unwrap();
            let b = exact_query_distribution(&p, 1, db, Variant::Faithful, view).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.values().copied().sum::<Rational>(), Rational::ONE);
        }
    }
}

/// Which audits in the privacy/correctness/converse family flag a variant on
/// small instances.
fn caught(variant: Variant) -> Vec<&'static str> {
    let mut hits = Vec::new();
    let p22 = params(2, 2, 0, 1);
    if (0..2).any(|db| !privacy_tv_distance(&p22, db, variant).unwrap().tv().is_zero()) {
        hits.push("exact-privacy");
    }
    let p23 = params(2, 3, 0, 1);
    let mut rng = SeededRandomness::new(17);
    if sampled_privacy_check(&p23, 0, 10_000, &mut rng, variant).map_or(true, |r| !r.passes()) {
        hits.push("sampled-privacy");
    }
    if correctness_audit(&p23, 3, &mut rng, variant).map_or(true, |r| !r.passes()) {
        hits.push("correctness");
    }
    if lemma2_audit(&p22, 2, variant).map_or(true, |r| !r.passes())
        || eq2_audit(&p22, variant).map_or(true, |r| !r.passes())
    {
        hits.push("converse");
    }
    hits
}

#[test]
fn faithful_scheme_passes_everything() {
    assert!(caught(Variant::Faithful).is_empty());
}

#[test]
fn every_mutation_is_caught() {
    for v in Variant::MUTATIONS {
        let hits = caught(v);
        assert!(!hits.is_empty(), "{v:?} slipped through");
    }
    assert!(caught(Variant::AllocationOrder).contains(&"exact-privacy"));
    assert!(caught(Variant::IdentityPermutation).contains(&"exact-privacy"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sampled_queries_are_message_symmetric(n in 1usize..=4, k in 1usize..=3, theta in 0usize..3, seed in any::<u64>()) {
        let theta = theta % k;
        let block_len = n.pow(k as u32);
        let shape = PirShape::new(n, k, block_len).unwrap();
        let layout = Layout::build(n, k, theta, Variant::Faithful).unwrap();
        let perms = draw_permutations(&shape, &mut SeededRandomness::new(seed));
        for db in 0..n {
            let q = layout.query_for(db, &perms, 1, 0);
            prop_assert!(message_symmetry_holds(&q, k));
            prop_assert_eq!(q.len(), shape.expected_download() / n);
        }
    }
}
