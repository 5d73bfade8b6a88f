//! Subset entropies `H(W_S | Z)`, their per-element averages `μ_k`, and the
//! lower bounds built from them.

use alloc::format;
use alloc::vec::Vec;

use super::entropy::{entropy, EntropySource};
use crate::perm::binomial;
use crate::{Error, Result};

/// Tolerance for every float entropy comparison.
pub const ENTROPY_TOLERANCE: f64 = 1e-9;

/// `H(W_S | Z)` for every `S ⊆ [K]`, indexed by bitmask (bit `i` is message
/// `i`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEntropyTable {
    messages: usize,
    values: Vec<f64>,
}

const MAX_TABLE_MESSAGES: usize = 20;

impl SubsetEntropyTable {
    /// Supplied table; `values.len()` must be `2^K` and `H(∅|Z)` zero.
    pub fn new(messages: usize, values: Vec<f64>) -> Result<Self> {
        if messages == 0 || messages > MAX_TABLE_MESSAGES {
            return Err(Error::InvalidParams(format!("table over {messages} messages")));
        }
        if values.len() != 1 << messages {
            return Err(Error::InvalidParams(format!(
                "incomplete table: {} entries for {} subsets",
                values.len(),
                1usize << messages
            )));
        }
        if values[0].abs() > ENTROPY_TOLERANCE {
            return Err(Error::InvalidParams("H(∅|Z) must be 0".into()));
        }
        Ok(SubsetEntropyTable { messages, values })
    }

    /// Computes every `H(W_S | given)` from a distribution; `message_vars[i]`
    /// names message `i`.
    pub fn from_source<S: EntropySource + ?Sized>(src: &S, message_vars: &[&str], given: &[&str]) -> Result<Self> {
        let k = message_vars.len();
        if k == 0 || k > MAX_TABLE_MESSAGES {
            return Err(Error::InvalidParams(format!("table over {k} messages")));
        }
        let mut values = alloc::vec![0.0; 1 << k];
        for (mask, v) in values.iter_mut().enumerate().skip(1) {
            let subset: Vec<&str> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| message_vars[i]).collect();
            *v = entropy(src, &subset, given)?;
        }
        Ok(SubsetEntropyTable { messages: k, values })
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.values[mask]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `H(W_S|Z)` for `S` given as message ids.
    pub fn subset(&self, members: &[usize]) -> f64 {
        self.values[members.iter().fold(0, |m, &i| m | 1 << i)]
    }

    /// Nondecreasing under inclusion (within tolerance).
    pub fn is_monotone(&self) -> bool {
        (0..self.values.len()).all(|mask| {
            (0..self.messages)
                .filter(|i| mask >> i & 1 == 0)
                .all(|i| self.values[mask | 1 << i] + ENTROPY_TOLERANCE >= self.values[mask])
        })
    }

    /// `H(A) + H(B) ≥ H(A∪B) + H(A∩B)` for all pairs (within tolerance).
    pub fn is_submodular(&self) -> bool {
        let n = self.values.len();
        (0..n).all(|a| {
            (0..n).all(|b| {
                self.values[a] + self.values[b] + ENTROPY_TOLERANCE >= self.values[a | b] + self.values[a & b]
            })
        })
    }

    /// Average of `H(W_S|Z)` over all `|S| = k`.
    fn size_average(&self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        let total: f64 = (0..self.values.len())
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| self.values[m])
            .sum();
        total / binomial(self.messages, k) as f64
    }
}

/// `μ_k = (1/C(K,k)) Σ_{|S|=k} H(W_S|Z)/k`.
pub fn subset_mu(table: &SubsetEntropyTable, k: usize) -> Result<f64> {
    if k == 0 || k > table.messages {
        return Err(Error::OutOfRange(format!("k = {k} not in 1..={}", table.messages)));
    }
    Ok(table.size_average(k) / k as f64)
}

fn all_mus(table: &SubsetEntropyTable) -> Vec<f64> {
    (1..=table.messages).map(|k| table.size_average(k) / k as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HanCheck {
    pub holds: bool,
    /// 1-based `k` of the first `μ_k > μ_{k−1}`.
    pub first_violation: Option<usize>,
}

/// `μ_1 ≥ μ_2 ≥ … ≥ μ_K` within [`ENTROPY_TOLERANCE`].
pub fn han_chain_check(mus: &[f64]) -> HanCheck {
    let first_violation = mus
        .windows(2)
        .position(|w| w[1] > w[0] + ENTROPY_TOLERANCE)
        .map(|i| i + 2);
    HanCheck { holds: first_violation.is_none(), first_violation }
}

fn inv_pow(databases: usize, e: usize) -> f64 {
    libm::pow(databases as f64, -(e as f64))
}

/// `Σ_k [H(W_{π_1..π_k}|Z) − H(W_{π_1..π_{k−1}}|Z)] / N^(k−1)`.
pub fn permutation_bound(table: &SubsetEntropyTable, databases: usize, perm: &[usize]) -> Result<f64> {
    let k = table.messages;
    let mut seen = alloc::vec![false; k];
    if perm.len() != k || perm.iter().any(|&p| p >= k || core::mem::replace(&mut seen[p], true)) {
        return Err(Error::InvalidParams(format!("{perm:?} is not a permutation of 0..{k}")));
    }
    if databases == 0 {
        return Err(Error::InvalidParams("need N ≥ 1".into()));
    }
    let mut mask = 0usize;
    let mut bound = 0.0;
    for (i, &m) in perm.iter().enumerate() {
        let prev = table.values[mask];
        mask |= 1 << m;
        bound += (table.values[mask] - prev) * inv_pow(databases, i);
    }
    Ok(bound)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragedBound {
    /// `Σ_k (kμ_k − (k−1)μ_{k−1}) / N^(k−1)`, the mean over all orderings.
    pub averaged: f64,
    /// `μ_K · Σ_{k<K} N^(−k)`, what remains after replacing every `μ_k` by
    /// `μ_K`.
    pub relaxed: f64,
    pub mus: Vec<f64>,
    pub han: HanCheck,
}

pub fn averaged_bound(table: &SubsetEntropyTable, databases: usize) -> Result<AveragedBound> {
    if databases == 0 {
        return Err(Error::InvalidParams("need N ≥ 1".into()));
    }
    let k = table.messages;
    let mut averaged = 0.0;
    for j in 1..=k {
        averaged += (table.size_average(j) - table.size_average(j - 1)) * inv_pow(databases, j - 1);
    }
    let mus = all_mus(table);
    let geometric: f64 = (0..k).map(|j| inv_pow(databases, j)).sum();
    let relaxed = mus[k - 1] * geometric;
    let han = han_chain_check(&mus);
    debug_assert!(
        !han.holds || averaged + ENTROPY_TOLERANCE * k as f64 >= relaxed,
        "averaged {averaged} below relaxed {relaxed} although the chain holds"
    );
    Ok(AveragedBound { averaged, relaxed, mus, han })
}
