//! Machine checks of privacy, correctness and the converse inequalities on
//! the implemented scheme.
//!
//! Exact audits enumerate every tuple of private permutations (and, for the
//! entropy audits, every 1-bit message assignment) with uniform weights, so
//! probabilities are exact rationals. Hard feasibility limits guard every
//! enumeration; nothing falls back to sampling silently.

mod converse;
mod correctness;
mod han_battery;
mod privacy;

pub use converse::{eq2_audit, lemma2_audit, Eq2Report, Lemma2Report, JOINT_LIMIT};
pub use correctness::{correctness_audit, CorrectnessReport};
pub use han_battery::{han_audit, random_joint_distribution, HanAuditReport};
pub use privacy::{
    exact_query_distribution, privacy_tv_distance, sampled_privacy_check, sampled_threshold, tv_distance,
    PrivacyReport, QueryDistribution, QueryView, SampledPrivacyReport, ENUMERATION_LIMIT, MIN_SAMPLED_TRIALS,
};

use alloc::vec::Vec;

use crate::perm::{all_permutations, factorial_saturating};
use crate::scheme::PirShape;
use crate::{Error, Result};

/// `(N^K)!^(blocks·K)`, saturating.
pub(crate) fn permutation_atoms(shape: &PirShape) -> u128 {
    let per = factorial_saturating(shape.block_len());
    (0..shape.permutation_count()).fold(1u128, |acc, _| acc.saturating_mul(per))
}

/// Calls `f` once per tuple of private permutations (indexed like
/// [`crate::scheme::draw_permutations`]).
pub(crate) fn for_each_permutation_tuple(
    shape: &PirShape,
    limit: u128,
    mut f: impl FnMut(&[Vec<u32>]),
) -> Result<u128> {
    let atoms = permutation_atoms(shape);
    if atoms > limit {
        return Err(Error::Infeasible { atoms, limit });
    }
    let base: Vec<Vec<u32>> = all_permutations(shape.block_len())
        .into_iter()
        .map(|p| p.into_iter().map(|x| x as u32).collect())
        .collect();
    let slots = shape.permutation_count();
    let mut idx = alloc::vec![0usize; slots];
    let mut tuple: Vec<Vec<u32>> = alloc::vec![base[0].clone(); slots];
    loop {
        f(&tuple);
        let mut i = 0;
        loop {
            if i == slots {
                return Ok(atoms);
            }
            idx[i] += 1;
            if idx[i] < base.len() {
                tuple[i].clone_from(&base[idx[i]]);
                break;
            }
            idx[i] = 0;
            tuple[i].clone_from(&base[0]);
            i += 1;
        }
    }
}
