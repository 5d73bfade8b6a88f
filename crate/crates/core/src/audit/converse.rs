//! Exhaustive entropy audits of the converse chain on tiny instances.
//!
//! Messages are uniform 1-bit-symbol strings. The joint distribution of
//! messages, cache, queries and answers factors into an independent cached
//! prefix part `(W_prefix, Z)` and a suffix part `(W_suffix, Q, A)`; both are
//! enumerated exactly and combined as a [`FactoredJoint`]. All schemes here
//! are zero-error, so the `o(L)` slack terms are exactly zero.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{for_each_permutation_tuple, permutation_atoms, tv_distance};
use crate::bounds::{entropy, mutual_information, optimal_download_cost, FactoredJoint, JointDistribution};
use crate::scheme::{Layout, PirShape, Variant};
use crate::{Error, Rational, Result, SchemeParams};

/// Hard cap on enumerated (permutation tuple × message assignment) atoms
/// per factor.
pub const JOINT_LIMIT: u128 = 100_000_000;

#[derive(Default)]
struct Interner(BTreeMap<Vec<u8>, u64>);

impl Interner {
    fn id(&mut self, bytes: Vec<u8>) -> u64 {
        let next = self.0.len() as u64;
        *self.0.entry(bytes).or_insert(next)
    }
}

fn w(i: usize) -> String {
    format!("W{}", i + 1)
}

fn q(n: usize) -> String {
    format!("Q{}", n + 1)
}

fn a(n: usize) -> String {
    format!("A{}", n + 1)
}

struct SchemeJoint {
    joint: FactoredJoint<Rational>,
    /// The suffix factor alone, for the joint-tuple privacy check.
    suffix: JointDistribution<Rational>,
    download_bits: usize,
}

fn bits_needed(what: &'static str, bits: usize) -> Result<()> {
    if bits > 63 {
        return Err(Error::Overflow(what));
    }
    Ok(())
}

/// Exact joint of `(W_1..W_K, Z, Q_1..Q_N, A_1..A_N)` when the user wants
/// `desired`.
fn scheme_joint(params: &SchemeParams, desired: usize, variant: Variant, interner: &mut Interner) -> Result<SchemeJoint> {
    let k = params.num_messages();
    let n = params.num_databases();

    // cached prefix: every assignment of the K·sL prefix bits, Z = all of them
    let prefix_len = params.cached_len();
    bits_needed("cached prefix bits", k * prefix_len)?;
    let prefix_atoms = 1u128 << (k * prefix_len);
    if prefix_atoms > JOINT_LIMIT {
        return Err(Error::Infeasible { atoms: prefix_atoms, limit: JOINT_LIMIT });
    }
    let mut prefix_names: Vec<String> = (0..k).map(w).collect();
    prefix_names.push("Z".into());
    let mask = (1u64 << prefix_len) - 1;
    let prefix_counts: BTreeMap<Vec<u64>, u64> = (0..prefix_atoms as u64)
        .map(|z| {
            let mut v: Vec<u64> = (0..k).map(|i| (z >> (i * prefix_len)) & mask).collect();
            v.push(z);
            (v, 1)
        })
        .collect();
    let prefix = JointDistribution::from_counts(prefix_names, prefix_counts)?;

    let mut suffix_names: Vec<String> = (0..k).map(w).collect();
    suffix_names.extend((0..n).map(q));
    suffix_names.extend((0..n).map(a));

    let Some(shape) = PirShape::for_params(params) else {
        let counts = [(alloc::vec![0u64; k + 2 * n], 1u64)].into_iter().collect();
        let suffix = JointDistribution::from_counts(suffix_names, counts)?;
        return Ok(SchemeJoint {
            joint: FactoredJoint::new(alloc::vec![prefix, suffix.clone()]),
            suffix,
            download_bits: 0,
        });
    };

    let part = shape.part_len();
    bits_needed("uncached suffix bits", k * part)?;
    let perm_atoms = permutation_atoms(&shape);
    let atoms = perm_atoms.saturating_mul(1u128 << (k * part));
    if atoms > JOINT_LIMIT {
        return Err(Error::Infeasible { atoms, limit: JOINT_LIMIT });
    }
    let layout = Layout::build(n, k, desired, variant)?;
    let offset = params.cached_len();
    let mut download_bits = 0;
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    let mut failure = None;
    let part_mask = (1u64 << part) - 1;

    for_each_permutation_tuple(&shape, JOINT_LIMIT, |perms| {
        if failure.is_some() {
            return;
        }
        let queries: Vec<_> = (0..n).map(|db| layout.query_for(db, perms, shape.blocks(), 0)).collect();
        download_bits = queries.iter().map(|x| x.len()).sum();
        if let Some(big) = queries.iter().find(|x| x.len() > 64) {
            failure = Some(Error::InvalidParams(format!("{} sums at one database; audits support 64", big.len())));
            return;
        }
        let qids: Vec<u64> = queries.iter().map(|x| interner.id(x.shifted(offset).ordered_form())).collect();
        for assignment in 0..1u64 << (k * part) {
            let word = |m: usize| (assignment >> (m * part)) & part_mask;
            let mut values: Vec<u64> = (0..k).map(word).collect();
            values.extend_from_slice(&qids);
            for x in &queries {
                let mut bits = 0u64;
                for (i, s) in x.sums().iter().enumerate() {
                    let b = s.terms().iter().fold(0, |acc, t| acc ^ (word(t.message) >> t.index) & 1);
                    bits |= b << i;
                }
                values.push(bits);
            }
            *counts.entry(values).or_default() += 1;
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let suffix = JointDistribution::from_counts(suffix_names, counts)?;
    Ok(SchemeJoint {
        joint: FactoredJoint::new(alloc::vec![prefix, suffix.clone()]),
        suffix,
        download_bits,
    })
}

fn names(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn qa(n: usize) -> Vec<String> {
    (0..n).map(q).chain((0..n).map(a)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma2Report {
    /// 1-based message index of the step, `2 ≤ k ≤ K`.
    pub k: usize,
    /// `I(W_{k:K}; Q^[k−1], A^[k−1] | Z, W_{1:k−1})`
    pub lhs: f64,
    /// `[H(W_k | Z, W_{1:k−1}) + I(W_{k+1:K}; Q^[k], A^[k] | Z, W_{1:k})] / N`
    pub rhs: f64,
    pub slack: f64,
    /// Largest exact TV, over databases, between the distributions of
    /// `(Q_n, A_n, W_1..W_K, Z)` under desired indices `k−1` and `k`.
    pub joint_tuple_tv: Rational,
}

impl Lemma2Report {
    pub fn passes(&self) -> bool {
        self.slack >= -crate::bounds::ENTROPY_TOLERANCE && self.joint_tuple_tv.is_zero()
    }
}

/// One step of the interference recursion, checked exactly on the
/// implemented scheme. With `K = 1` the only valid `k` is 2 and both sides
/// are empty.
pub fn lemma2_audit(params: &SchemeParams, k: usize, variant: Variant) -> Result<Lemma2Report> {
    let messages = params.num_messages();
    let n = params.num_databases();
    if messages == 1 && k == 2 {
        return Ok(Lemma2Report { k, lhs: 0.0, rhs: 0.0, slack: 0.0, joint_tuple_tv: Rational::ZERO });
    }
    if k < 2 || k > messages {
        return Err(Error::OutOfRange(format!("k = {k} not in 2..={messages}")));
    }
    let mut interner = Interner::default();
    let prev = scheme_joint(params, k - 2, variant, &mut interner)?;
    let cur = scheme_joint(params, k - 1, variant, &mut interner)?;

    let ws: Vec<String> = (0..messages).map(w).collect();
    let qa = qa(n);
    let qa = names(&qa);
    let mut given: Vec<&str> = alloc::vec!["Z"];
    given.extend(ws[..k - 1].iter().map(String::as_str));
    let lhs = mutual_information(&prev.joint, &names(&ws[k - 1..]), &qa, &given)?;
    let h = entropy(&cur.joint, &[ws[k - 1].as_str()], &given)?;
    given.push(ws[k - 1].as_str());
    let tail = if k < messages {
        mutual_information(&cur.joint, &names(&ws[k..]), &qa, &given)?
    } else {
        0.0
    };
    let rhs = (h + tail) / n as f64;

    // the prefix factor is the same under both indices; only the suffix
    // factor can differ
    let mut joint_tuple_tv = Rational::ZERO;
    for db in 0..n {
        let (qn, an) = (q(db), a(db));
        let mut vars: Vec<&str> = alloc::vec![qn.as_str(), an.as_str()];
        vars.extend(ws.iter().map(String::as_str));
        let tv = tv_distance(&prev.suffix.marginal(&vars)?, &cur.suffix.marginal(&vars)?);
        joint_tuple_tv = joint_tuple_tv.max(tv);
    }
    Ok(Lemma2Report { k, lhs, rhs, slack: lhs - rhs, joint_tuple_tv })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eq2Report {
    /// Measured download `D` in bits.
    pub download_bits: usize,
    /// `L · D*(S)/L`.
    pub theory_bits: Rational,
    /// `H(W_1 | Z)`
    pub desired_entropy: f64,
    /// `I(W_{2:K}; Q^[1], A^[1] | Z, W_1)`
    pub interference: f64,
    /// `D − H(W_1|Z) − I(W_{2:K}; Q^[1], A^[1] | Z, W_1)`
    pub slack: f64,
}

impl Eq2Report {
    pub fn passes(&self) -> bool {
        self.slack >= -crate::bounds::ENTROPY_TOLERANCE
    }

    pub fn download_matches_theory(&self) -> bool {
        Rational::from(self.download_bits) == self.theory_bits
    }
}

/// `D ≥ H(W_1|Z) + I(W_{2:K}; Q^[1], A^[1] | Z, W_1)`, checked exactly when
/// the user wants the first message.
pub fn eq2_audit(params: &SchemeParams, variant: Variant) -> Result<Eq2Report> {
    let messages = params.num_messages();
    let n = params.num_databases();
    let mut interner = Interner::default();
    let joint = scheme_joint(params, 0, variant, &mut interner)?;
    let ws: Vec<String> = (0..messages).map(w).collect();
    let qa = qa(n);
    let desired_entropy = entropy(&joint.joint, &[ws[0].as_str()], &["Z"])?;
    let interference = if messages > 1 {
        mutual_information(&joint.joint, &names(&ws[1..]), &names(&qa), &["Z", ws[0].as_str()])?
    } else {
        0.0
    };
    let theory_bits =
        optimal_download_cost(n, messages, params.storage())? * Rational::from(params.message_len());
    Ok(Eq2Report {
        download_bits: joint.download_bits,
        theory_bits,
        desired_entropy,
        interference,
        slack: joint.download_bits as f64 - desired_entropy - interference,
    })
}
