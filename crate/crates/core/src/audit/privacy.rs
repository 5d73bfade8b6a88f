//! Does any single database's view depend on the desired index?

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{for_each_permutation_tuple, permutation_atoms};
use crate::scheme::{draw_permutations, message_symmetry_holds, round_counts_hold, Layout, PirShape, Variant};
use crate::{canonical_form, Error, Query, Rational, Result, SchemeParams, SeededRandomness};

/// Hard cap on permutation tuples enumerated by the exact privacy audit.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

pub const MIN_SAMPLED_TRIALS: usize = 10_000;

const SAMPLED_DELTA: f64 = 1e-6;

/// Which serialization of a query counts as one atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueryView {
    /// Order-independent: the multiset of sums.
    Canonical,
    /// The sums in the order they go on the wire.
    Transmitted,
}

impl QueryView {
    fn encode(self, q: &Query) -> Vec<u8> {
        match self {
            QueryView::Canonical => canonical_form(q),
            QueryView::Transmitted => q.ordered_form(),
        }
    }
}

pub type QueryDistribution = BTreeMap<Vec<u8>, Rational>;

fn check_indices(params: &SchemeParams, desired: Option<usize>, db: usize) -> Result<()> {
    if let Some(d) = desired {
        if d >= params.num_messages() {
            return Err(Error::OutOfRange(format!("message {d} not in 0..{}", params.num_messages())));
        }
    }
    if db >= params.num_databases() {
        return Err(Error::OutOfRange(format!("database {db} not in 0..{}", params.num_databases())));
    }
    Ok(())
}

fn to_distribution(counts: BTreeMap<Vec<u8>, u64>, total: u128) -> QueryDistribution {
    counts
        .into_iter()
        .map(|(k, c)| (k, Rational::new(c as i128, total as i128)))
        .collect()
}

/// Counts of every view of the query `db` receives, for each desired index.
fn enumerate_views(
    params: &SchemeParams,
    db: usize,
    variant: Variant,
) -> Result<(u128, Vec<[QueryDistribution; 2]>)> {
    let k = params.num_messages();
    let Some(shape) = PirShape::for_params(params) else {
        // nothing is ever sent
        let marker = canonical_form(&Query::default());
        let point: QueryDistribution = [(marker, Rational::ONE)].into_iter().collect();
        return Ok((1, (0..k).map(|_| [point.clone(), point.clone()]).collect()));
    };
    let atoms = permutation_atoms(&shape);
    if atoms > ENUMERATION_LIMIT {
        return Err(Error::Infeasible { atoms, limit: ENUMERATION_LIMIT });
    }
    let offset = params.cached_len();
    let mut out = Vec::with_capacity(k);
    for theta in 0..k {
        let layout = Layout::build(shape.databases(), k, theta, variant)?;
        let mut canonical: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        let mut transmitted: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
        for_each_permutation_tuple(&shape, ENUMERATION_LIMIT, |perms| {
            let q = layout.query_for(db, perms, shape.blocks(), offset);
            *canonical.entry(QueryView::Canonical.encode(&q)).or_default() += 1;
            *transmitted.entry(QueryView::Transmitted.encode(&q)).or_default() += 1;
        })?;
        out.push([to_distribution(canonical, atoms), to_distribution(transmitted, atoms)]);
    }
    Ok((atoms, out))
}

/// Exact distribution of the query database `db` sees when the user wants
/// message `desired`, over all private permutation tuples.
pub fn exact_query_distribution(
    params: &SchemeParams,
    desired: usize,
    db: usize,
    variant: Variant,
    view: QueryView,
) -> Result<QueryDistribution> {
    check_indices(params, Some(desired), db)?;
    let (_, mut all) = enumerate_views(params, db, variant)?;
    let [canonical, transmitted] = all.swap_remove(desired);
    Ok(match view {
        QueryView::Canonical => canonical,
        QueryView::Transmitted => transmitted,
    })
}

/// Total variation distance `½ Σ |a − b|`.
pub fn tv_distance<K: Ord + Clone>(a: &BTreeMap<K, Rational>, b: &BTreeMap<K, Rational>) -> Rational {
    let mut diff = Rational::ZERO;
    for (k, pa) in a {
        diff = diff + (*pa - b.get(k).copied().unwrap_or(Rational::ZERO)).abs();
    }
    for (k, pb) in b {
        if !a.contains_key(k) {
            diff = diff + *pb;
        }
    }
    diff / Rational::integer(2)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivacyReport {
    pub database: usize,
    /// Permutation tuples enumerated per desired index.
    pub atoms: u128,
    pub canonical_tv: Rational,
    pub transmitted_tv: Rational,
}

impl PrivacyReport {
    /// Worst view; zero for a private scheme.
    pub fn tv(&self) -> Rational {
        self.canonical_tv.max(self.transmitted_tv)
    }
}

/// Largest total-variation distance between the exact query distributions
/// of any two desired indices, at database `db`.
pub fn privacy_tv_distance(params: &SchemeParams, db: usize, variant: Variant) -> Result<PrivacyReport> {
    check_indices(params, None, db)?;
    let (atoms, dists) = enumerate_views(params, db, variant)?;
    let mut canonical_tv = Rational::ZERO;
    let mut transmitted_tv = Rational::ZERO;
    for a in 0..dists.len() {
        for b in a + 1..dists.len() {
            canonical_tv = canonical_tv.max(tv_distance(&dists[a][0], &dists[b][0]));
            transmitted_tv = transmitted_tv.max(tv_distance(&dists[a][1], &dists[b][1]));
        }
    }
    Ok(PrivacyReport { database: db, atoms, canonical_tv, transmitted_tv })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledPrivacyReport {
    pub database: usize,
    pub trials: usize,
    /// Largest empirical TV over all profile features and index pairs.
    pub max_tv: f64,
    pub worst_feature: String,
    pub threshold: f64,
    /// Every sampled query passed the message-symmetry and round-count
    /// checks.
    pub structural_ok: bool,
}

impl SampledPrivacyReport {
    pub fn flagged(&self) -> bool {
        self.max_tv > self.threshold
    }

    pub fn passes(&self) -> bool {
        !self.flagged() && self.structural_ok
    }
}

/// `3·sqrt(ln(2/δ) / (2·trials))` with `δ = 10^−6`.
pub fn sampled_threshold(trials: usize) -> f64 {
    3.0 * libm::sqrt(libm::log(2.0 / SAMPLED_DELTA) / (2.0 * trials as f64))
}

/// Low-cardinality projections of a query. The full query space is far
/// too large to estimate a distance on from samples; each of these has a
/// small support and targets one way a scheme can leak.
fn profile(q: &Query, messages: usize) -> Vec<Vec<u64>> {
    let mut min_index = alloc::vec![u64::MAX; messages];
    let mut indices: Vec<Vec<u64>> = alloc::vec![Vec::new(); messages];
    let mut sizes: Vec<Vec<u64>> = alloc::vec![Vec::new(); messages];
    for s in q.sums() {
        for t in s.terms() {
            min_index[t.message] = min_index[t.message].min(t.index as u64);
            indices[t.message].push(t.index as u64);
            sizes[t.message].push(s.len() as u64);
        }
    }
    let members = |i: Option<usize>| -> Vec<u64> {
        i.and_then(|i| q.sums().get(i))
            .map(|s| s.terms().iter().map(|t| t.message as u64).collect())
            .unwrap_or_default()
    };
    let mut out = Vec::with_capacity(4 * messages + 2);
    for m in 0..messages {
        out.push(alloc::vec![min_index[m]]);
        let mut distinct = indices[m].clone();
        distinct.sort_unstable();
        distinct.dedup();
        out.push(alloc::vec![distinct.len() as u64]);
        sizes[m].sort_unstable();
        out.push(core::mem::take(&mut sizes[m]));
        out.push(distinct.last().copied().into_iter().collect());
    }
    out.push(members(Some(0)));
    out.push(members(q.len().checked_sub(1)));
    out
}

fn feature_name(i: usize, messages: usize) -> String {
    if i < 4 * messages {
        let kind = ["min-index", "distinct-indices", "sum-sizes", "max-index"][i % 4];
        format!("{kind}[W{}]", i / 4 + 1)
    } else if i == 4 * messages {
        "first-sum-messages".into()
    } else {
        "last-sum-messages".into()
    }
}

/// Sampling fallback for instances too large to enumerate: empirical
/// distance between per-index distributions of query profile features,
/// plus the deterministic structure checks on every sample.
pub fn sampled_privacy_check(
    params: &SchemeParams,
    db: usize,
    trials: usize,
    rng: &mut SeededRandomness,
    variant: Variant,
) -> Result<SampledPrivacyReport> {
    check_indices(params, None, db)?;
    if trials < MIN_SAMPLED_TRIALS {
        return Err(Error::InvalidParams(format!(
            "sampled privacy check needs at least {MIN_SAMPLED_TRIALS} trials, got {trials}"
        )));
    }
    let threshold = sampled_threshold(trials);
    let k = params.num_messages();
    let Some(shape) = PirShape::for_params(params) else {
        return Ok(SampledPrivacyReport {
            database: db,
            trials,
            max_tv: 0.0,
            worst_feature: "none".into(),
            threshold,
            structural_ok: true,
        });
    };
    let offset = params.cached_len();
    let features = 4 * k + 2;
    // counts[theta][feature][value]
    let mut counts: Vec<Vec<BTreeMap<Vec<u64>, u64>>> = alloc::vec![alloc::vec![BTreeMap::new(); features]; k];
    let mut structural_ok = true;
    for (theta, per_theta) in counts.iter_mut().enumerate() {
        let layout = Layout::build(shape.databases(), k, theta, variant)?;
        for _ in 0..trials {
            let perms = draw_permutations(&shape, rng);
            let q = layout.query_for(db, &perms, shape.blocks(), offset);
            structural_ok &= message_symmetry_holds(&q, k) && round_counts_hold(&q, &shape);
            for (f, value) in profile(&q, k).into_iter().enumerate() {
                *per_theta[f].entry(value).or_default() += 1;
            }
        }
    }
    let n = trials as f64;
    let mut max_tv = 0.0;
    let mut worst = 0;
    for a in 0..k {
        for b in a + 1..k {
            for (f, (ca, cb)) in counts[a].iter().zip(&counts[b]).enumerate() {
                let mut diff = 0.0;
                for (v, &x) in ca {
                    diff += libm::fabs(x as f64 - cb.get(v).copied().unwrap_or(0) as f64);
                }
                for (v, &y) in cb {
                    if !ca.contains_key(v) {
                        diff += y as f64;
                    }
                }
                let tv = diff / (2.0 * n);
                if tv > max_tv {
                    max_tv = tv;
                    worst = f;
                }
            }
        }
    }
    Ok(SampledPrivacyReport {
        database: db,
        trials,
        max_tv,
        worst_feature: feature_name(worst, k),
        threshold,
        structural_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, k: usize, p: usize, q: usize) -> SchemeParams {
        SchemeParams::new(n, k, p, q, 1).unwrap()
    }

    #[test]
    fn distribution_is_normalized() {
        let d = exact_query_distribution(&params(2, 2, 0, 1), 0, 0, Variant::Faithful, QueryView::Canonical).unwrap();
        let total: Rational = d.values().copied().sum();
        assert_eq!(total, Rational::ONE);
        // every realized index set is distinct per message: 4·3 choices for
        // W1 and for W2, 144 equally likely queries
        assert_eq!(d.len(), 144);
    }

    #[test]
    fn trivial_instance_is_a_point_mass() {
        let d = exact_query_distribution(&params(1, 1, 0, 1), 0, 0, Variant::Faithful, QueryView::Canonical).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.values().next(), Some(&Rational::ONE));
    }

    #[test]
    fn two_by_two_is_private() {
        for (p, q) in [(0, 1), (1, 2)] {
            for db in 0..2 {
                let r = privacy_tv_distance(&params(2, 2, p, q), db, Variant::Faithful).unwrap();
                assert_eq!(r.atoms, 576);
                assert_eq!(r.tv(), Rational::ZERO);
            }
            let a = exact_query_distribution(&params(2, 2, p, q), 0, 1, Variant::Faithful, QueryView::Transmitted);
            let b = exact_query_distribution(&params(2, 2, p, q), 1, 1, Variant::Faithful, QueryView::Transmitted);
            assert_eq!(a.unwrap(), b.unwrap());
        }
    }

    #[test]
    fn single_database_is_private() {
        for k in 1..=3 {
            let r = privacy_tv_distance(&params(1, k, 0, 1), 0, Variant::Faithful).unwrap();
            assert_eq!(r.tv(), Rational::ZERO);
        }
    }

    #[test]
    fn full_cache_is_vacuously_private() {
        let r = privacy_tv_distance(&params(2, 3, 1, 1), 1, Variant::Faithful).unwrap();
        assert_eq!(r.tv(), Rational::ZERO);
    }

    #[test]
    fn mutations_leak() {
        for v in Variant::MUTATIONS {
            let r = privacy_tv_distance(&params(2, 2, 0, 1), 0, v).unwrap();
            assert!(r.tv() > Rational::ZERO, "{v:?} not caught");
        }
        // reordering is only visible on the wire
        let r = privacy_tv_distance(&params(2, 2, 0, 1), 0, Variant::AllocationOrder).unwrap();
        assert_eq!(r.canonical_tv, Rational::ZERO);
        assert!(r.transmitted_tv > Rational::ZERO);
    }

    #[test]
    fn infeasible_names_atom_count() {
        let err = privacy_tv_distance(&params(3, 2, 0, 1), 0, Variant::Faithful).unwrap_err();
        assert!(matches!(err, Error::Infeasible { atoms, .. } if atoms == 362_880u128 * 362_880));
    }

    #[test]
    fn tv_examples() {
        let a: BTreeMap<u8, Rational> = [(0, Rational::ONE)].into_iter().collect();
        let b: BTreeMap<u8, Rational> = [(1, Rational::ONE)].into_iter().collect();
        assert_eq!(tv_distance(&a, &b), Rational::ONE);
        assert_eq!(tv_distance(&a, &a), Rational::ZERO);
        let c: BTreeMap<u8, Rational> = [(0, Rational::new(1, 2)), (1, Rational::new(1, 2))].into_iter().collect();
        assert_eq!(tv_distance(&a, &c), Rational::new(1, 2));
    }

    #[test]
    fn sampled_rejects_few_trials() {
        let mut rng = SeededRandomness::new(0);
        assert!(sampled_privacy_check(&params(2, 2, 0, 1), 0, 0, &mut rng, Variant::Faithful).is_err());
        assert!(sampled_privacy_check(&params(2, 2, 0, 1), 0, 9_999, &mut rng, Variant::Faithful).is_err());
    }

    #[test]
    fn sampled_passes_and_catches_mutations() {
        let mut rng = SeededRandomness::new(1);
        let p = params(2, 3, 0, 1);
        let r = sampled_privacy_check(&p, 0, 20_000, &mut rng, Variant::Faithful).unwrap();
        assert!(r.passes(), "{r:?}");
        for v in Variant::MUTATIONS {
            let r = sampled_privacy_check(&p, 0, 20_000, &mut rng, v).unwrap();
            assert!(r.flagged(), "{v:?}: {r:?}");
        }
    }

    #[test]
    fn threshold_value() {
        // 3·sqrt(ln(2e6)/2e5)
        assert!((sampled_threshold(100_000) - 0.025_551_7).abs() < 1e-6);
    }
}
