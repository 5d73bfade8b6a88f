use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::bounds::{averaged_bound, permutation_bound, JointDistribution, SubsetEntropyTable, ENTROPY_TOLERANCE};
use crate::perm::all_permutations;
use crate::{Rational, Result, SeededRandomness};

/// A random joint law of `W1..Wk` and `Z`. Each variable gets an alphabet of
/// 2 to `alphabet_max` (`z_alphabet_max` for `Z`) letters; atoms get integer
/// weights, about a third of them zero, so dependence varies widely.
pub fn random_joint_distribution(
    k: usize,
    alphabet_max: u32,
    z_alphabet_max: u32,
    rng: &mut SeededRandomness,
) -> JointDistribution<Rational> {
    let mut sizes: Vec<u64> = (0..k).map(|_| 2 + rng.below(alphabet_max.max(2) - 1) as u64).collect();
    sizes.push(2 + rng.below(z_alphabet_max.max(2) - 1) as u64);
    let total: u64 = sizes.iter().product();

    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for mut code in 0..total {
        let weight = match rng.below(3) {
            0 => 0,
            _ => 1 + rng.below(12) as u64,
        };
        if weight == 0 {
            continue;
        }
        let values = sizes
            .iter()
            .map(|&s| {
                let v = code % s;
                code /= s;
                v
            })
            .collect();
        counts.insert(values, weight);
    }
    if counts.is_empty() {
        counts.insert(alloc::vec![0; k + 1], 1);
    }
    let mut names: Vec<String> = (1..=k).map(|i| format!("W{i}")).collect();
    names.push("Z".into());
    JointDistribution::from_counts(names, counts).expect("weights are positive")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HanAuditReport {
    pub distributions: usize,
    /// Tables with some `μ_k > μ_{k−1} + tolerance`.
    pub chain_violations: usize,
    /// Tables whose averaged bound is off the mean over all message
    /// orderings by more than the tolerance.
    pub average_mismatches: usize,
    pub max_average_error: f64,
}

impl HanAuditReport {
    pub fn passes(&self) -> bool {
        self.distributions > 0 && self.chain_violations == 0 && self.average_mismatches == 0
    }
}

/// Checks the `μ_k` chain and the averaging identity on `count` random
/// distributions, alternating `K = 2` and `K = 3` with `N` drawn from 1..=4.
pub fn han_audit(count: usize, rng: &mut SeededRandomness) -> Result<HanAuditReport> {
    let mut report = HanAuditReport {
        distributions: 0,
        chain_violations: 0,
        average_mismatches: 0,
        max_average_error: 0.0,
    };
    let names = ["W1", "W2", "W3"];
    for i in 0..count {
        let k = 2 + i % 2;
        let n = 1 + rng.below(4) as usize;
        let d = random_joint_distribution(k, 4, 8, rng);
        let table = SubsetEntropyTable::from_source(&d, &names[..k], &["Z"])?;
        let bound = averaged_bound(&table, n)?;
        let perms = all_permutations(k);
        let mut mean = 0.0;
        for p in &perms {
            mean += permutation_bound(&table, n, p)?;
        }
        mean /= perms.len() as f64;
        let err = (mean - bound.averaged).abs();

        report.distributions += 1;
        if !bound.han.holds {
            report.chain_violations += 1;
        }
        if err > ENTROPY_TOLERANCE {
            report.average_mismatches += 1;
        }
        report.max_average_error = report.max_average_error.max(err);
    }
    Ok(report)
}
